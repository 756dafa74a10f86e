"""Equilibrium analysis of the contract game.

Three independent routes answer the same questions:

* closed-form node margins (the analytic checkers below),
* backward induction over the built tree,
* brute-force enumeration of every pure strategy profile.

The analytic layer is the production surface; the other two act as oracles in
the test suite.  Everything is exact rational arithmetic, so strict versus
non-strict boundaries are decided without tolerance.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Union

from .gametree import (
    AFTER_NOSEND,
    AFTER_SEND,
    DISPUTE_AFTER_NOSEND,
    DISPUTE_AFTER_SEND,
    HONEST_PROFILE,
    ROOT,
    Action,
    DecisionNode,
    GameTree,
    LeafNode,
    Party,
    PayoffPair,
    TreeNode,
    build_game_tree,
)
from .trade import (
    Generic,
    Standard,
    TradeParams,
    WagerScheme,
    Withheld,
    WinnerRebate,
    as_fraction,
)

Profile = dict[str, Action]

# Constraint names, ordered as the completeness then soundness inequalities.
SELLER_COUNTERS = "honest-seller-counters"
SELLER_FORFEITS = "dishonest-seller-forfeits"
BUYER_ACCEPTS = "buyer-accepts-delivery"
BUYER_DISPUTES = "dispute-worth-the-fee"
SELLER_SENDS = "delivery-worth-the-fee"


def node_margins(params: TradeParams, scheme: WagerScheme) -> dict[str, Fraction]:
    """Honest-action advantage at each decision node, honest play downstream.

    Positive margin means the honest action strictly beats the alternative.
    Fees enter with the sign of the move they attach to: countering and
    disputing cost the fee, while the timeout defaults are free.
    """
    x = params.price
    xs = params.seller_value
    y = params.buyer_value
    g = params.arbiter_error
    t = params.fee
    win = scheme.win_gain(params)
    loss = scheme.loss_cost(params)

    counter = (1 - g) * win - g * loss - t
    forfeit = (1 - g) * loss - g * win + t
    accept = y * (1 - g) + forfeit
    return {
        DISPUTE_AFTER_SEND: counter,
        DISPUTE_AFTER_NOSEND: forfeit,
        AFTER_SEND: accept,
        AFTER_NOSEND: x - t,
        ROOT: x - xs - t,
    }


_COMPLETENESS_NAMES = {
    DISPUTE_AFTER_SEND: SELLER_COUNTERS,
    DISPUTE_AFTER_NOSEND: SELLER_FORFEITS,
    AFTER_SEND: BUYER_ACCEPTS,
    AFTER_NOSEND: BUYER_DISPUTES,
    ROOT: SELLER_SENDS,
}


def check_completeness(
    params: TradeParams, scheme: WagerScheme
) -> tuple[bool, dict[str, Fraction]]:
    """Is the honest profile the unique subgame perfect equilibrium?

    True exactly when every honest action is strictly preferred, i.e. every
    slack below is positive.  The last two constraints only bite when fees
    are charged.
    """
    margins = node_margins(params, scheme)
    slacks = {_COMPLETENESS_NAMES[node]: margin for node, margin in margins.items()}
    return all(margin > 0 for margin in margins.values()), slacks


class SoundnessPreconditionError(ValueError):
    """The deviation bound is incompatible with the trade surplus bounds
    (needs buyer_value - epsilon >= price >= epsilon)."""


_SOUNDNESS_NODES = (DISPUTE_AFTER_SEND, DISPUTE_AFTER_NOSEND, AFTER_SEND)


def soundness_margins(params: TradeParams, scheme: WagerScheme) -> dict[str, Fraction]:
    """The three dispute-layer margins that bound every dishonest deviation."""
    margins = node_margins(params, scheme)
    return {_COMPLETENESS_NAMES[node]: margins[node] for node in _SOUNDNESS_NODES}


def check_soundness(params: TradeParams, scheme: WagerScheme, epsilon) -> bool:
    """Does every dishonest action lose at least epsilon versus honest play?

    Decided on the three dispute-layer constraints (non-strict at epsilon).
    The side conditions buyer_value - epsilon >= price >= epsilon are a
    hypothesis of the bound, not part of the verdict, and are signalled
    separately when violated.
    """
    eps = as_fraction(epsilon)
    if eps <= 0:
        raise ValueError(f"epsilon must be > 0, got {eps}")
    if not (params.buyer_value - eps >= params.price >= eps):
        raise SoundnessPreconditionError(
            f"need buyer_value - eps >= price >= eps, got "
            f"y={params.buyer_value} x={params.price} eps={eps}"
        )
    return all(margin >= eps for margin in soundness_margins(params, scheme).values())


def sound_epsilon_max(params: TradeParams, scheme: WagerScheme) -> Optional[Fraction]:
    """Largest deviation bound the dispute-layer constraints support, if any."""
    worst = min(soundness_margins(params, scheme).values())
    return worst if worst > 0 else None


# ---------------------------------------------------------------------------
# Security report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SecurityReport:
    """Summary of the contract's game-theoretic guarantees for one setup."""

    complete: bool
    sound_epsilon_max: Optional[Fraction]
    strong: bool
    strong_epsilon: Optional[Fraction]
    weak: bool
    slacks: dict[str, Fraction]
    binding: tuple[str, ...]
    gamma: Fraction
    wager: Fraction
    fee: Fraction
    scheme: str

    CSV_FIELDS = ("gamma", "lambda", "tau", "scheme", "complete", "eps_max", "strong", "weak")

    def to_row(self) -> dict[str, str]:
        """Flat record for CSV output."""
        return {
            "gamma": str(self.gamma),
            "lambda": str(self.wager),
            "tau": str(self.fee),
            "scheme": self.scheme,
            "complete": str(self.complete).lower(),
            "eps_max": "" if self.sound_epsilon_max is None else str(self.sound_epsilon_max),
            "strong": str(self.strong).lower(),
            "weak": str(self.weak).lower(),
        }


def security_report(params: TradeParams, scheme: WagerScheme) -> SecurityReport:
    margins = node_margins(params, scheme)
    complete, slacks = check_completeness(params, scheme)
    eps_max = sound_epsilon_max(params, scheme)
    strong = complete and eps_max is not None
    weak = all(margin >= 0 for margin in margins.values())
    low = min(slacks.values())
    binding = tuple(name for name, slack in slacks.items() if slack == low)
    return SecurityReport(
        complete=complete,
        sound_epsilon_max=eps_max,
        strong=strong,
        strong_epsilon=eps_max if strong else None,
        weak=weak,
        slacks=slacks,
        binding=binding,
        gamma=params.arbiter_error,
        wager=scheme.stake(params),
        fee=params.fee,
        scheme=scheme.name,
    )


# ---------------------------------------------------------------------------
# Named-scheme results
# ---------------------------------------------------------------------------


def winner_rebate_lambda(params: TradeParams, epsilon) -> Fraction:
    """Wager making the winner-rebate contract epsilon-strong:
    (x * gamma + epsilon) / (1 - 2 * gamma)."""
    eps = as_fraction(epsilon)
    g = params.arbiter_error
    if eps <= 0:
        raise ValueError(f"epsilon must be > 0, got {eps}")
    if g >= Fraction(1, 2):
        raise ValueError(
            f"no wager achieves this with arbiter_error {g} >= 1/2"
        )
    return (params.price * g + eps) / (1 - 2 * g)


def withheld_security(params: TradeParams) -> SecurityReport:
    """Report for the withheld-wager contract at its canonical wager x/2."""
    return security_report(params, Withheld(params.price / 2))


def generic_impossibility(omega, ell, gamma) -> bool:
    """Can an arbitrary payout rule make the seller's dispute choices honest?

    True iff a dishonest seller's countering value is strictly below an
    honest seller's, which for any rule where winning is preferred to losing
    happens exactly when the arbiter favors honest parties (gamma < 1/2).
    """
    w, l, g = as_fraction(omega), as_fraction(ell), as_fraction(gamma)
    if w + l <= 0:
        raise ValueError("winning must be preferred to losing (omega > -ell)")
    return w * g - l * (1 - g) < w * (1 - g) - l * g


# ---------------------------------------------------------------------------
# Admissible wager intervals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LambdaInterval:
    """Interval of admissible wagers; upper=None means unbounded above."""

    lower: Fraction
    lower_closed: bool
    upper: Optional[Fraction]
    upper_closed: bool
    empty: bool = False

    @classmethod
    def nothing(cls) -> "LambdaInterval":
        return cls(Fraction(0), False, Fraction(0), False, empty=True)

    def contains(self, value) -> bool:
        if self.empty:
            return False
        v = as_fraction(value)
        if v < self.lower or (v == self.lower and not self.lower_closed):
            return False
        if self.upper is not None:
            if v > self.upper or (v == self.upper and not self.upper_closed):
                return False
        return True

    def __str__(self) -> str:
        if self.empty:
            return "(empty)"
        lo = "[" if self.lower_closed else "("
        hi = "]" if self.upper_closed else ")"
        top = "+inf" if self.upper is None else str(self.upper)
        return f"{lo}{self.lower}, {top}{hi}"


_SCHEME_KINDS = {
    "standard": Standard,
    "winner_rebate": WinnerRebate,
    "withheld": Withheld,
}
# win_gain as an affine function of the wager: win = x + slope * wager.
_WIN_SLOPE = {Standard: 0, WinnerRebate: 1, Withheld: -1}


def lambda_interval(
    params: TradeParams,
    scheme: Union[WagerScheme, type, str] = Standard,
    epsilon=None,
    tau=None,
) -> LambdaInterval:
    """Wagers under which the scheme is complete (epsilon=None) or
    epsilon-sound (epsilon given).

    Completeness bounds are open (strict inequalities), soundness bounds
    closed.  Empty when the constraints conflict, including when a
    wager-independent completeness condition already fails.
    """
    kind = _scheme_kind(scheme)
    if kind is Generic:
        raise ValueError("generic schemes have no single wager to solve for")
    slope = _WIN_SLOPE[kind]

    x = params.price
    g = params.arbiter_error
    t = params.fee if tau is None else as_fraction(tau)
    if epsilon is None:
        strict = True
        eps = Fraction(0)
    else:
        strict = False
        eps = as_fraction(epsilon)
        if eps <= 0:
            raise ValueError(f"epsilon must be > 0, got {eps}")

    if strict and not (x > t and x - params.seller_value > t):
        return LambdaInterval.nothing()

    # Margins are affine in the wager w:
    #   counter: (1-g)(x + slope*w) - g*w - t  >= eps (or > 0)
    #   forfeit: (1-g)*w - g*(x + slope*w) + t >= eps (or > 0)
    constraints = [
        ((1 - g) * slope - g, eps + t - (1 - g) * x),
        ((1 - g) - g * slope, eps - t + g * x),
    ]
    lower, lower_closed = Fraction(0), False  # wagers must be positive
    upper: Optional[Fraction] = None
    upper_closed = False
    for coeff, bound in constraints:
        if coeff == 0:
            if bound > 0 or (strict and bound == 0):
                return LambdaInterval.nothing()
            continue
        point = bound / coeff
        if coeff > 0:
            if point > lower:
                lower, lower_closed = point, not strict
            elif point == lower:
                lower_closed = lower_closed and not strict
        else:
            if upper is None or point < upper:
                upper, upper_closed = point, not strict
            elif point == upper:
                upper_closed = upper_closed and not strict

    if upper is not None:
        if lower > upper:
            return LambdaInterval.nothing()
        if lower == upper and not (lower_closed and upper_closed):
            return LambdaInterval.nothing()
    return LambdaInterval(lower, lower_closed, upper, upper_closed)


def _scheme_kind(scheme: Union[WagerScheme, type, str]) -> type:
    if isinstance(scheme, str):
        try:
            return _SCHEME_KINDS[scheme.lower().replace("-", "_")]
        except KeyError:
            raise ValueError(f"unknown scheme {scheme!r}") from None
    if isinstance(scheme, type):
        return scheme
    return type(scheme)


# ---------------------------------------------------------------------------
# Backward induction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SolvedTree:
    """Backward-induction annotation of a game tree.

    chosen maps every decision node to the owner-optimal action (the honest
    action on exact ties, with all maximizers listed in tied); margin is the
    chosen action's value lead over the best alternative, so the solved
    profile is the unique pure SPE exactly when every margin is positive.
    """

    tree: GameTree
    chosen: dict[str, Action]
    margins: dict[str, Fraction]
    tied: dict[str, tuple[Action, ...]]
    values: dict[str, PayoffPair]

    @property
    def profile(self) -> Profile:
        return dict(self.chosen)

    @property
    def is_honest(self) -> bool:
        return self.chosen == HONEST_PROFILE

    @property
    def unique(self) -> bool:
        return all(margin > 0 for margin in self.margins.values())


def backward_induction(tree: GameTree) -> SolvedTree:
    chosen: dict[str, Action] = {}
    margins: dict[str, Fraction] = {}
    tied: dict[str, tuple[Action, ...]] = {}
    values: dict[str, PayoffPair] = {}

    def solve(node: TreeNode) -> PayoffPair:
        if isinstance(node, LeafNode):
            return node.payoff
        outcomes = {action: solve(child) for action, child in node.actions.items()}
        ranked = sorted(
            outcomes.items(), key=lambda item: item[1].for_party(node.owner), reverse=True
        )
        best_value = ranked[0][1].for_party(node.owner)
        maximizers = [a for a, p in outcomes.items() if p.for_party(node.owner) == best_value]
        honest = HONEST_PROFILE.get(node.node_id)
        pick = honest if honest in maximizers else maximizers[0]
        runner_up = max(
            (p.for_party(node.owner) for a, p in outcomes.items() if a != pick),
            default=best_value,
        )
        chosen[node.node_id] = pick
        margins[node.node_id] = best_value - runner_up
        tied[node.node_id] = tuple(maximizers)
        values[node.node_id] = outcomes[pick]
        return outcomes[pick]

    solve(tree.root)
    return SolvedTree(tree=tree, chosen=chosen, margins=margins, tied=tied, values=values)


# ---------------------------------------------------------------------------
# Brute-force subgame perfect equilibrium oracle
# ---------------------------------------------------------------------------

MAX_BRUTE_FORCE_NODES = 20


def all_profiles(tree: GameTree) -> Iterable[Profile]:
    nodes = tree.decision_nodes()
    action_sets = [list(node.actions) for node in nodes]
    for combo in itertools.product(*action_sets):
        yield {node.node_id: action for node, action in zip(nodes, combo)}


def profile_value(tree: GameTree, profile: Profile, node: Optional[TreeNode] = None) -> PayoffPair:
    """Payoff vector when play follows `profile` from `node` (default root)."""
    current: TreeNode = tree.root if node is None else node
    while isinstance(current, DecisionNode):
        current = current.actions[profile[current.node_id]]
    return current.payoff


def profile_epsilon(tree: GameTree, profile: Profile) -> Fraction:
    """Smallest slack at which the profile is a subgame perfect equilibrium.

    The maximum, over every subgame and every unilateral deviation by the
    subgame's mover-to-be owners, of the deviation's gain.  Zero means exact
    subgame perfection.
    """
    worst = Fraction(0)
    for node in tree.decision_nodes():
        actual = profile_value(tree, profile, node).for_party(node.owner)
        best = _best_response_value(tree, profile, node, node.owner)
        gain = best - actual
        if gain > worst:
            worst = gain
    return worst


def _best_response_value(
    tree: GameTree, profile: Profile, node: TreeNode, player: Party
) -> Fraction:
    if isinstance(node, LeafNode):
        return node.payoff.for_party(player)
    if node.owner is player:
        return max(
            _best_response_value(tree, profile, child, player)
            for child in node.actions.values()
        )
    return _best_response_value(tree, profile, node.actions[profile[node.node_id]], player)


def brute_force_spe(tree: GameTree, epsilon=Fraction(0)) -> list[Profile]:
    """Every pure profile that is a subgame perfect epsilon-equilibrium.

    epsilon=0 gives the exact SPE set.  Ground truth for the analytic
    checkers; quadratic in the profile count, so capped at 20 decision nodes.
    """
    if len(tree.decision_nodes()) > MAX_BRUTE_FORCE_NODES:
        raise ValueError(f"tree too large for enumeration (> {MAX_BRUTE_FORCE_NODES} nodes)")
    eps = as_fraction(epsilon)
    found = [p for p in all_profiles(tree) if profile_epsilon(tree, p) <= eps]
    found.sort(key=lambda p: tuple(p[k].value for k in sorted(p)))
    return found


def spe_is_uniquely_honest(params: TradeParams, scheme: WagerScheme) -> bool:
    """Oracle form of completeness: enumeration finds exactly the honest profile."""
    tree = build_game_tree(params, scheme)
    return brute_force_spe(tree, 0) == [HONEST_PROFILE]
