"""Shared helpers: seeded random rational parameter draws and a two-party
oracle for multiparty settlement tests."""

from fractions import Fraction
from random import Random

from escrowlab.arbiter import BASIS_ORACLE, Verdict
from escrowlab.contract import propose
from escrowlab.gametree import Party
from escrowlab.ledger import Ledger
from escrowlab.trade import Standard, TradeParams


def rand_fraction(rng: Random, lo, hi, max_den: int = 12) -> Fraction:
    """Random rational in [lo, hi] with a small denominator."""
    lo, hi = Fraction(lo), Fraction(hi)
    den = rng.randint(1, max_den)
    num_lo = -(-lo.numerator * den // lo.denominator)  # ceil(lo * den)
    num_hi = hi.numerator * den // hi.denominator  # floor(hi * den)
    if num_hi < num_lo:
        return lo
    return Fraction(rng.randint(num_lo, num_hi), den)


def draw_params(
    rng: Random,
    gamma_lo=0,
    gamma_hi=1,
    fee=0,
    seller_value_zero: bool = False,
) -> TradeParams:
    """Random valid trade: buyer_value > price > seller_value >= 0."""
    price = rand_fraction(rng, Fraction(1, 4), 8)
    seller_value = (
        Fraction(0)
        if seller_value_zero
        else rand_fraction(rng, 0, price) * Fraction(rng.randint(0, 9), 10)
    )
    if seller_value >= price:
        seller_value = price * Fraction(1, 2)
    buyer_value = price + rand_fraction(rng, Fraction(1, 4), 8)
    gamma = rand_fraction(rng, gamma_lo, gamma_hi, max_den=20)
    return TradeParams(
        price=price,
        seller_value=seller_value,
        buyer_value=buyer_value,
        arbiter_error=gamma,
        fee=fee,
    )


# ---------------------------------------------------------------------------
# Two-party oracle for multiparty settlement
# ---------------------------------------------------------------------------

#: Per-trade outcomes: no dispute, uncountered dispute, arbitration won by
#: the buyer (coin 0) or by the seller (coin 1).
PAIR_STATES = ("accept", "forfeit", "arb_buyer", "arb_seller")


def two_party_trade_outcome(price, state):
    """(buyer delta, seller delta, arbiter take) of one contract run, fee-free.

    Drives the real two-party state machine with the wager set to the price,
    which is exactly what one multiparty trade is supposed to compose to.
    """
    ledger = Ledger()
    endow = 10 * Fraction(price) + 10
    ledger.open_account("B", endow)
    ledger.open_account("S", endow)
    params = TradeParams(price=price, seller_value=0, buyer_value=2 * Fraction(price) + 1)
    contract = propose(ledger, "t", "B", "S", params, Standard(price))
    contract.accept("S")
    contract.fund("B")
    if state == "accept":
        contract.accept_delivery("B")
    else:
        contract.dispute("B")
        if state == "forfeit":
            contract.forfeit("S")
        else:
            contract.counter("S")
            winner = Party.BUYER if state == "arb_buyer" else Party.SELLER
            contract.begin_arbitration()
            contract.settle_arbitration(
                Verdict(winner, BASIS_ORACLE, (("arbiter", f"RULE {winner.value}"),))
            )
    return (
        ledger.balance("B") - endow,
        ledger.balance("S") - endow,
        ledger.arbiter_sink,
    )


def matrices_from_states(n, trades, states):
    """Build payment/dispute/counter/coin matrices from per-trade outcomes.

    trades: list of (buyer, seller, price); states: matching list drawn from
    PAIR_STATES.
    """
    payments = [[Fraction(0)] * n for _ in range(n)]
    disputes = [[0] * n for _ in range(n)]
    counters = [[0] * n for _ in range(n)]
    coin = [[0] * n for _ in range(n)]
    for (i, j, price), state in zip(trades, states):
        payments[i][j] = Fraction(price)
        if state != "accept":
            disputes[i][j] = 1
        if state in ("arb_buyer", "arb_seller"):
            counters[j][i] = 1
            coin[i][j] = 1 if state == "arb_seller" else 0
    return payments, disputes, counters, coin
