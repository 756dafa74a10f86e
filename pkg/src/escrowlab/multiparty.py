"""Multiparty settlement: any number of pairwise trades, O(n) fee events.

n parties trade pairwise (payments[i][j] is what party i pays party j), then
settle every trade in one batch instead of n^2 separate contracts.  Each
party makes at most three deposits (payments, dispute wagers, counter wagers)
and receives at most one withdrawal, so fee-bearing ledger interactions stay
at four per party however many trades they entered.

Settlement is the composition of independent two-party contracts: each
disputed trade resolves exactly as the two-party coin-toss contract with the
wager set to that trade's price, using one coin matrix entry per trade.  The
loser's wager compensates the arbiter, as in the standard two-party scheme.

A party that cannot fund a step has that step's moves converted to defaults:
unfunded purchases are cancelled, unfunded disputes become acceptance,
unfunded counters become forfeits.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from random import Random
from typing import Optional, Sequence

from .ledger import InsufficientFundsError, Ledger
from .trade import as_fraction

Matrix = tuple[tuple[Fraction, ...], ...]
BitMatrix = tuple[tuple[int, ...], ...]


class MultipartyError(ValueError):
    pass


@dataclass(frozen=True)
class SettlementMatrix:
    """Inputs and outcome of one settlement batch.

    disputes/counters are the effective matrices after default conversion:
    counters[i][j] answers disputes[j][i], so it can only be set where that
    dispute exists.  payouts[i] is the gross withdrawal owed to party i.
    """

    parties: tuple[str, ...]
    payments: Matrix
    disputes: BitMatrix
    counters: BitMatrix
    coin: BitMatrix
    payouts: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        n = len(self.parties)
        for name, m in (
            ("payments", self.payments),
            ("disputes", self.disputes),
            ("counters", self.counters),
            ("coin", self.coin),
        ):
            if len(m) != n or any(len(row) != n for row in m):
                raise MultipartyError(f"{name} must be {n}x{n}")
        for i in range(n):
            if self.payments[i][i] != 0:
                raise MultipartyError("self-payments are not allowed")
            if self.disputes[i][i] or self.counters[i][i]:
                raise MultipartyError("self-disputes are not allowed")
            for j in range(n):
                if self.counters[i][j] and not self.disputes[j][i]:
                    raise MultipartyError(
                        f"counter ({i},{j}) answers no dispute"
                    )

    def payout_of(self, party: str) -> Fraction:
        return self.payouts[self.parties.index(party)]


def _as_payment_matrix(parties: Sequence[str], payments) -> Matrix:
    n = len(parties)
    rows = []
    for i in range(n):
        row = [as_fraction(v) for v in payments[i]]
        if len(row) != n:
            raise MultipartyError(f"payments must be {n}x{n}")
        if any(v < 0 for v in row):
            raise MultipartyError("payments must be >= 0")
        if row[i] != 0:
            raise MultipartyError("self-payments are not allowed")
        rows.append(tuple(row))
    return tuple(rows)


def _as_bits(parties: Sequence[str], bits, name: str) -> list[list[int]]:
    n = len(parties)
    rows = []
    for i in range(n):
        try:
            row = [int(v) for v in bits[i]]
        except (TypeError, ValueError):
            raise MultipartyError(f"{name} entries must be 0 or 1") from None
        if len(row) != n:
            raise MultipartyError(f"{name} must be {n}x{n}")
        if any(v not in (0, 1) for v in row):
            raise MultipartyError(f"{name} entries must be 0 or 1")
        rows.append(row)
    return rows


def multiparty_run(
    ledger: Ledger,
    parties: Sequence[str],
    payments,
    disputes,
    counters,
    rng: Optional[Random] = None,
    coin_matrix=None,
    contract_id: str = "multiparty",
) -> SettlementMatrix:
    """Run one settlement batch against the ledger.

    disputes[i][j] says party i disputes the item bought from j; counters are
    masked to existing disputes.  The coin matrix is sampled from rng unless
    supplied explicitly (entry [i][j] settles the trade i bought from j, the
    seller winning on 1).
    """
    parties = tuple(parties)
    n = len(parties)
    if n < 2:
        raise MultipartyError("need at least two parties")
    if len(set(parties)) != n:
        raise MultipartyError("party names must be distinct")
    x = [list(row) for row in _as_payment_matrix(parties, payments)]
    d = _as_bits(parties, disputes, "disputes")
    c = _as_bits(parties, counters, "counters")
    if coin_matrix is None:
        if rng is None:
            raise MultipartyError("need an rng or an explicit coin matrix")
        b = [[rng.getrandbits(1) for _ in range(n)] for _ in range(n)]
    else:
        b = _as_bits(parties, coin_matrix, "coin")

    # Purchase deposits; a row that cannot pay is cancelled outright.
    for i, party in enumerate(parties):
        total = sum(x[i], Fraction(0))
        if total == 0:
            continue
        try:
            ledger.escrow_deposit(party, contract_id, total, contract_move=True)
        except InsufficientFundsError:
            x[i] = [Fraction(0)] * n

    # Dispute wagers (the trade's price); unfunded disputes default to accept.
    for i, party in enumerate(parties):
        d[i] = [d[i][j] if x[i][j] > 0 else 0 for j in range(n)]
        d[i][i] = 0
        total = sum((x[i][j] for j in range(n) if d[i][j]), Fraction(0))
        if total == 0:
            continue
        try:
            ledger.escrow_deposit(party, contract_id, total, contract_move=True)
        except InsufficientFundsError:
            d[i] = [0] * n

    # Counter wagers (the disputed trade's price); unfunded counters forfeit.
    for i, party in enumerate(parties):
        c[i] = [c[i][j] if d[j][i] else 0 for j in range(n)]
        c[i][i] = 0
        total = sum((x[j][i] for j in range(n) if c[i][j]), Fraction(0))
        if total == 0:
            continue
        try:
            ledger.escrow_deposit(party, contract_id, total, contract_move=True)
        except InsufficientFundsError:
            c[i] = [0] * n

    # Settle every trade as its own two-party outcome.
    payouts = [Fraction(0)] * n
    for i in range(n):  # buyer
        for j in range(n):  # seller
            price = x[i][j]
            if price == 0:
                continue
            if not d[i][j]:
                payouts[j] += price
            elif not c[j][i]:
                payouts[i] += 2 * price  # price and wager back
            elif b[i][j]:
                payouts[j] += 2 * price
                ledger.pot_to_arbiter(contract_id, price)
            else:
                payouts[i] += 2 * price
                ledger.pot_to_arbiter(contract_id, price)

    for i, party in enumerate(parties):
        if payouts[i] > 0:
            ledger.escrow_release(contract_id, party, payouts[i], contract_move=True)

    return SettlementMatrix(
        parties=parties,
        payments=tuple(tuple(row) for row in x),
        disputes=tuple(tuple(row) for row in d),
        counters=tuple(tuple(row) for row in c),
        coin=tuple(tuple(row) for row in b),
        payouts=tuple(payouts),
    )


def literal_settlement_payouts(payments, disputes, counters, coin, wagers=None) -> list[Fraction]:
    """The one-line payout formula, kept for comparison.

    payout_i = sum_j (x_ji - b_ij * c_ij * d_ij * lam_ij), with lam_ij
    defaulting to x_ji.  Unlike the batch settlement above it never refunds a
    buyer whose dispute went uncountered, and it pairs the dispute and counter
    flags by position rather than by the trade they refer to, so the two only
    agree on dispute-free runs.
    """
    n = len(payments)
    x = [[as_fraction(v) for v in row] for row in payments]
    lam = [[as_fraction(v) for v in row] for row in wagers] if wagers else [
        [x[j][i] for j in range(n)] for i in range(n)
    ]
    out = []
    for i in range(n):
        total = Fraction(0)
        for j in range(n):
            total += x[j][i] - coin[i][j] * counters[i][j] * disputes[i][j] * lam[i][j]
        out.append(total)
    return out
