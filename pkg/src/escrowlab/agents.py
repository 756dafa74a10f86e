"""Scripted agents, a trial harness, and security-region sweeps.

A strategy fixes one pure action at every point its role can move, which is
exactly the game tree's strategy space per role.  The harness runs whole
contract episodes on a fresh ledger per trial with the biased oracle as
arbiter, measuring realized utilities:

* buyer utility  = cash delta + item value if the item arrived and the buyer
  did not lose an arbitration over it (a lost dispute forfeits the claim),
* seller utility = cash delta - production cost when the item was shipped.

Payoffs, rates, and means are exact rationals, so identical seeds give
identical statistics bit for bit.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from random import Random
from typing import Iterable, Optional, Sequence

from .arbiter import oracle_arbitrate
from .contract import EscrowContract, Phase, propose
from .equilibrium import SecurityReport, security_report
from .gametree import (
    AFTER_NOSEND,
    AFTER_SEND,
    DISPUTE_AFTER_NOSEND,
    DISPUTE_AFTER_SEND,
    ROOT,
    Action,
    Leaf,
    Party,
)
from .ledger import Ledger, TimeoutPolicy
from .trade import Standard, TradeParams, WagerScheme, Withheld, WinnerRebate


@dataclass(frozen=True)
class SellerStrategy:
    send: bool
    counter_if_delivered: bool
    counter_if_undelivered: bool

    @classmethod
    def honest(cls) -> "SellerStrategy":
        return cls(send=True, counter_if_delivered=True, counter_if_undelivered=False)

    def to_profile(self) -> dict[str, Action]:
        return {
            ROOT: Action.SEND if self.send else Action.NOT_SEND,
            DISPUTE_AFTER_SEND: Action.COUNTER if self.counter_if_delivered else Action.FORFEIT,
            DISPUTE_AFTER_NOSEND: Action.COUNTER if self.counter_if_undelivered else Action.FORFEIT,
        }


@dataclass(frozen=True)
class BuyerStrategy:
    dispute_if_delivered: bool
    dispute_if_undelivered: bool

    @classmethod
    def honest(cls) -> "BuyerStrategy":
        return cls(dispute_if_delivered=False, dispute_if_undelivered=True)

    def to_profile(self) -> dict[str, Action]:
        return {
            AFTER_SEND: Action.DISPUTE if self.dispute_if_delivered else Action.ACCEPT,
            AFTER_NOSEND: Action.DISPUTE if self.dispute_if_undelivered else Action.ACCEPT,
        }


def all_seller_strategies() -> list[SellerStrategy]:
    return [
        SellerStrategy(send, cd, cu)
        for send in (True, False)
        for cd in (True, False)
        for cu in (True, False)
    ]


def all_buyer_strategies() -> list[BuyerStrategy]:
    return [
        BuyerStrategy(dd, du) for dd in (True, False) for du in (True, False)
    ]


def strategies_for_leaf(leaf: Leaf) -> tuple[SellerStrategy, BuyerStrategy]:
    """The strategy pair that forces play down to the given leaf."""
    send = leaf in (Leaf.SEND_ACCEPT, Leaf.SEND_DISPUTE_FORFEIT, Leaf.SEND_DISPUTE_COUNTER)
    dispute = leaf not in (Leaf.SEND_ACCEPT, Leaf.NOSEND_ACCEPT)
    counter = leaf in (Leaf.SEND_DISPUTE_COUNTER, Leaf.NOSEND_DISPUTE_COUNTER)
    seller = SellerStrategy(send, counter, counter)
    buyer = BuyerStrategy(dispute_if_delivered=dispute, dispute_if_undelivered=dispute)
    return seller, buyer


@dataclass(frozen=True)
class SimStats:
    trials: int
    mean_buyer_payoff: Fraction
    mean_seller_payoff: Fraction
    dispute_rate: Fraction
    arbitration_rate: Fraction
    fees_total: Fraction

    def to_row(self) -> dict[str, str]:
        return {
            "trials": str(self.trials),
            "mean_buyer_payoff": str(self.mean_buyer_payoff),
            "mean_seller_payoff": str(self.mean_seller_payoff),
            "dispute_rate": str(self.dispute_rate),
            "arbitration_rate": str(self.arbitration_rate),
            "fees_total": str(self.fees_total),
        }


def run_trial(
    params: TradeParams,
    scheme: WagerScheme,
    seller_strategy: SellerStrategy,
    buyer_strategy: BuyerStrategy,
    rng: Random,
    policy: Optional[TimeoutPolicy] = None,
) -> tuple[Fraction, Fraction, EscrowContract, Ledger]:
    """One full contract episode; returns both utilities plus the artifacts."""
    stake = scheme.stake(params)
    endow = params.price + stake + 10 * (params.fee + 1)
    ledger = Ledger(tau=params.fee)
    ledger.open_account("buyer", endow)
    ledger.open_account("seller", endow)
    contract = propose(ledger, "trade", "buyer", "seller", params, scheme, policy)
    contract.accept("seller")
    contract.fund("buyer")

    if seller_strategy.send:
        contract.notify_delivery("seller")
        disputing = buyer_strategy.dispute_if_delivered
        countering = seller_strategy.counter_if_delivered
    else:
        disputing = buyer_strategy.dispute_if_undelivered
        countering = seller_strategy.counter_if_undelivered

    if not disputing:
        contract.accept_delivery("buyer")
    else:
        contract.dispute("buyer")
        if not countering:
            contract.forfeit("seller")
        else:
            contract.counter("seller")
            honest = Party.SELLER if contract.delivered else Party.BUYER
            contract.run_arbitration(
                lambda c: oracle_arbitrate(honest, params.arbiter_error, rng)
            )

    assert contract.phase is Phase.SETTLED
    buyer_lost_item = (
        contract.last_verdict is not None
        and contract.disputed_after_delivery
        and contract.last_verdict.winner is Party.SELLER
    )
    buyer_utility = ledger.balance("buyer") - endow
    if contract.delivered and not buyer_lost_item:
        buyer_utility += params.buyer_value
    seller_utility = ledger.balance("seller") - endow
    if contract.delivered:
        seller_utility -= params.seller_value
    return buyer_utility, seller_utility, contract, ledger


def simulate(
    params: TradeParams,
    scheme: WagerScheme,
    seller_strategy: SellerStrategy,
    buyer_strategy: BuyerStrategy,
    trials: int,
    seed: int,
    policy: Optional[TimeoutPolicy] = None,
) -> SimStats:
    """Repeated trades with one strategy pair, deterministic for a seed.

    Each trial owns its ledger and draws from its own seed-derived stream, so
    trials are order-independent and safe to fan out.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    buyer_total = Fraction(0)
    seller_total = Fraction(0)
    disputes = arbitrations = 0
    fees = Fraction(0)
    for i in range(trials):
        rng = Random(f"{seed}:{i}")
        buyer_utility, seller_utility, contract, ledger = run_trial(
            params, scheme, seller_strategy, buyer_strategy, rng, policy
        )
        buyer_total += buyer_utility
        seller_total += seller_utility
        disputes += contract.settled_how != "accept"
        arbitrations += contract.last_verdict is not None
        fees += ledger.fee_sink
    return SimStats(
        trials=trials,
        mean_buyer_payoff=buyer_total / trials,
        mean_seller_payoff=seller_total / trials,
        dispute_rate=Fraction(disputes, trials),
        arbitration_rate=Fraction(arbitrations, trials),
        fees_total=fees,
    )


def best_buyer_response(
    params: TradeParams,
    scheme: WagerScheme,
    seller_strategy: SellerStrategy,
    trials: int,
    seed: int,
) -> tuple[BuyerStrategy, dict[BuyerStrategy, Fraction]]:
    """Empirically best buyer strategy against a fixed seller."""
    means = {
        strategy: simulate(params, scheme, seller_strategy, strategy, trials, seed).mean_buyer_payoff
        for strategy in all_buyer_strategies()
    }
    best = max(means, key=lambda s: means[s])
    return best, means


_SCHEME_BUILDERS = {
    "standard": Standard,
    "winner_rebate": WinnerRebate,
    "withheld": Withheld,
}


def sweep(
    price,
    seller_value,
    buyer_value,
    gammas: Iterable,
    wagers: Iterable,
    fees: Iterable = (0,),
    schemes: Sequence[str] = ("standard",),
) -> list[SecurityReport]:
    """Security report at every grid point, one row per combination."""
    reports = []
    for scheme_name in schemes:
        builder = _SCHEME_BUILDERS[scheme_name]
        for gamma in gammas:
            for fee in fees:
                params = TradeParams(
                    price=price,
                    seller_value=seller_value,
                    buyer_value=buyer_value,
                    arbiter_error=gamma,
                    fee=fee,
                )
                for wager in wagers:
                    reports.append(security_report(params, builder(wager)))
    return reports


def sweep_csv(reports: Sequence[SecurityReport]) -> str:
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=SecurityReport.CSV_FIELDS)
    writer.writeheader()
    for report in reports:
        writer.writerow(report.to_row())
    return out.getvalue()
