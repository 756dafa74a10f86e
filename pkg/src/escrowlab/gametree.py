"""Extensive-form game of the escrow contract after both parties accepted.

The tree has five decision nodes and six leaves:

    root (seller): send | not-send
      send -> buyer: accept | dispute
        dispute -> seller: counter | forfeit
      not-send -> buyer: accept | dispute
        dispute -> seller: counter | forfeit

Leaf payoffs are expected changes in funds, buyer first.  Arbiter randomness
is folded into expectations, so the tree is deterministic.  The buyer's item
value y enters an arbitration leaf only on the branch where the buyer wins;
that convention is what makes the no-dispute and arbitration leaves line up
with the contract's actual fund flows.

When fees are enabled, every non-default move on the path to a leaf costs its
mover the fee; default actions (accept for the buyer, forfeit for the seller,
and the seller staying silent) are free because a party can always reach them
by timing out.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .trade import InvalidTradeError, TradeParams, WagerScheme


class Party(enum.Enum):
    BUYER = "buyer"
    SELLER = "seller"

    def other(self) -> "Party":
        return Party.SELLER if self is Party.BUYER else Party.BUYER


class Action(enum.Enum):
    SEND = "send"
    NOT_SEND = "not-send"
    ACCEPT = "accept"
    DISPUTE = "dispute"
    COUNTER = "counter"
    FORFEIT = "forfeit"


class Leaf(enum.Enum):
    """The six terminal outcomes, named by the path that reaches them."""

    SEND_ACCEPT = "send,accept"
    SEND_DISPUTE_FORFEIT = "send,dispute,forfeit"
    SEND_DISPUTE_COUNTER = "send,dispute,counter"
    NOSEND_ACCEPT = "not-send,accept"
    NOSEND_DISPUTE_FORFEIT = "not-send,dispute,forfeit"
    NOSEND_DISPUTE_COUNTER = "not-send,dispute,counter"


class PayoffPair(tuple):
    """(buyer, seller) expected payoff at a leaf."""

    def __new__(cls, buyer: Fraction, seller: Fraction):
        return super().__new__(cls, (Fraction(buyer), Fraction(seller)))

    @property
    def buyer(self) -> Fraction:
        return self[0]

    @property
    def seller(self) -> Fraction:
        return self[1]

    def for_party(self, party: Party) -> Fraction:
        return self[0] if party is Party.BUYER else self[1]


# Fee-bearing moves by each party on the path to every leaf.  Accepting and
# forfeiting coincide with timeout defaults and cost nothing; so does the
# seller never sending.
_FEE_MOVES: dict[Leaf, tuple[int, int]] = {
    Leaf.SEND_ACCEPT: (0, 1),
    Leaf.SEND_DISPUTE_FORFEIT: (1, 1),
    Leaf.SEND_DISPUTE_COUNTER: (1, 2),
    Leaf.NOSEND_ACCEPT: (0, 0),
    Leaf.NOSEND_DISPUTE_FORFEIT: (1, 0),
    Leaf.NOSEND_DISPUTE_COUNTER: (1, 1),
}


def leaf_payoff(
    leaf_id: Union[Leaf, str],
    params: TradeParams,
    scheme: WagerScheme,
    fees_enabled: bool = True,
) -> PayoffPair:
    """Expected (buyer, seller) payoff at one of the six named outcomes."""
    try:
        leaf = Leaf(leaf_id) if not isinstance(leaf_id, Leaf) else leaf_id
    except ValueError:
        raise ValueError(f"unknown leaf id {leaf_id!r}") from None

    x = params.price
    xs = params.seller_value
    y = params.buyer_value
    g = params.arbiter_error
    win = scheme.win_gain(params)
    loss = scheme.loss_cost(params)

    if leaf is Leaf.SEND_ACCEPT:
        pair = (y - x, x - xs)
    elif leaf is Leaf.SEND_DISPUTE_FORFEIT:
        pair = (y, -xs)
    elif leaf is Leaf.SEND_DISPUTE_COUNTER:
        # Disputing buyer (who has the item) wins with probability g.
        buyer = g * (y + win - x) + (1 - g) * (-x - loss)
        seller = (1 - g) * win - g * loss - xs
        pair = (buyer, seller)
    elif leaf is Leaf.NOSEND_ACCEPT:
        pair = (-x, x)
    elif leaf is Leaf.NOSEND_DISPUTE_FORFEIT:
        pair = (Fraction(0), Fraction(0))
    else:  # NOSEND_DISPUTE_COUNTER: honest buyer wins with probability 1 - g.
        buyer = (1 - g) * (win - x) + g * (-x - loss)
        seller = g * win - (1 - g) * loss
        pair = (buyer, seller)

    if fees_enabled and params.fee:
        b_moves, s_moves = _FEE_MOVES[leaf]
        pair = (pair[0] - b_moves * params.fee, pair[1] - s_moves * params.fee)
    return PayoffPair(*pair)


@dataclass(frozen=True)
class LeafNode:
    leaf_id: Leaf
    payoff: PayoffPair


@dataclass(frozen=True)
class DecisionNode:
    node_id: str
    owner: Party
    actions: dict[Action, "TreeNode"] = field(hash=False)


TreeNode = Union[DecisionNode, LeafNode]

ROOT = "root"
AFTER_SEND = "after_send"
DISPUTE_AFTER_SEND = "dispute_after_send"
AFTER_NOSEND = "after_not_send"
DISPUTE_AFTER_NOSEND = "dispute_after_not_send"

#: The honest action at every decision node: deliver, accept deliveries,
#: contest bogus disputes, raise and stand by justified ones.
HONEST_PROFILE: dict[str, Action] = {
    ROOT: Action.SEND,
    AFTER_SEND: Action.ACCEPT,
    DISPUTE_AFTER_SEND: Action.COUNTER,
    AFTER_NOSEND: Action.DISPUTE,
    DISPUTE_AFTER_NOSEND: Action.FORFEIT,
}


@dataclass(frozen=True)
class GameTree:
    root: DecisionNode
    params: TradeParams
    scheme: WagerScheme
    fees_enabled: bool

    def decision_nodes(self) -> list[DecisionNode]:
        out: list[DecisionNode] = []

        def walk(node: TreeNode) -> None:
            if isinstance(node, DecisionNode):
                out.append(node)
                for child in node.actions.values():
                    walk(child)

        walk(self.root)
        return out

    def leaves(self) -> list[LeafNode]:
        out: list[LeafNode] = []

        def walk(node: TreeNode) -> None:
            if isinstance(node, LeafNode):
                out.append(node)
            else:
                for child in node.actions.values():
                    walk(child)

        walk(self.root)
        return out

    def node(self, node_id: str) -> DecisionNode:
        for node in self.decision_nodes():
            if node.node_id == node_id:
                return node
        raise KeyError(node_id)


def build_game_tree(
    params: TradeParams, scheme: WagerScheme, fees_enabled: bool = True
) -> GameTree:
    """Build the contract's game tree with scheme- and fee-adjusted payoffs."""
    if not isinstance(params, TradeParams):
        raise InvalidTradeError("params must be a TradeParams instance")

    def leaf(leaf_id: Leaf) -> LeafNode:
        return LeafNode(leaf_id, leaf_payoff(leaf_id, params, scheme, fees_enabled))

    dispute_after_send = DecisionNode(
        DISPUTE_AFTER_SEND,
        Party.SELLER,
        {
            Action.COUNTER: leaf(Leaf.SEND_DISPUTE_COUNTER),
            Action.FORFEIT: leaf(Leaf.SEND_DISPUTE_FORFEIT),
        },
    )
    after_send = DecisionNode(
        AFTER_SEND,
        Party.BUYER,
        {
            Action.ACCEPT: leaf(Leaf.SEND_ACCEPT),
            Action.DISPUTE: dispute_after_send,
        },
    )
    dispute_after_nosend = DecisionNode(
        DISPUTE_AFTER_NOSEND,
        Party.SELLER,
        {
            Action.COUNTER: leaf(Leaf.NOSEND_DISPUTE_COUNTER),
            Action.FORFEIT: leaf(Leaf.NOSEND_DISPUTE_FORFEIT),
        },
    )
    after_nosend = DecisionNode(
        AFTER_NOSEND,
        Party.BUYER,
        {
            Action.ACCEPT: leaf(Leaf.NOSEND_ACCEPT),
            Action.DISPUTE: dispute_after_nosend,
        },
    )
    root = DecisionNode(
        ROOT,
        Party.SELLER,
        {
            Action.SEND: after_send,
            Action.NOT_SEND: after_nosend,
        },
    )
    return GameTree(root=root, params=params, scheme=scheme, fees_enabled=fees_enabled)
