"""Deterministic in-memory ledger with escrow pots, per-move fees, discrete
time, and timeout callbacks.

Funds are exact rationals.  The conservation invariant is that the sum of all
account balances, escrow pots, and the two sinks never changes: fees and
forfeited liveness deposits are burned into the fee sink, withheld wagers go
to the arbiter sink.  Each operation validates every debit before touching
state, so a rejected operation leaves the ledger untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .trade import as_fraction


class LedgerError(Exception):
    pass


class UnknownAccountError(LedgerError):
    pass


class InsufficientFundsError(LedgerError):
    pass


@dataclass(frozen=True)
class TimeoutPolicy:
    """Response-time policy: free until `threshold`, default action forced at
    `timeout`, liveness deposit refunded on a linear ramp in between.

    deposit=None lets the contract derive the deposit from the wager size.
    """

    threshold: int
    timeout: int
    deposit: Optional[Fraction] = None

    def __post_init__(self) -> None:
        if not 0 <= self.threshold < self.timeout:
            raise ValueError(
                f"need 0 <= threshold < timeout, got {self.threshold}, {self.timeout}"
            )
        if self.deposit is not None:
            object.__setattr__(self, "deposit", as_fraction(self.deposit))
            if self.deposit < 0:
                raise ValueError(f"deposit must be >= 0, got {self.deposit}")


def deposit_payback(t: int, policy: TimeoutPolicy, deposit=None) -> Fraction:
    """Refund for a party who responded t ticks into their window.

    Full deposit up to the threshold, linear ramp down to zero at the
    timeout, nothing after.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    amount = as_fraction(deposit) if deposit is not None else policy.deposit
    if amount is None:
        raise ValueError("no deposit configured on the policy or supplied")
    if t <= policy.threshold:
        return amount
    if t < policy.timeout:
        ramp = Fraction(t - policy.threshold, policy.timeout - policy.threshold)
        return amount * (1 - ramp)
    return Fraction(0)


@dataclass
class Ledger:
    tau: Fraction = Fraction(0)
    balances: dict[str, Fraction] = field(default_factory=dict)
    pots: dict[str, Fraction] = field(default_factory=dict)
    fee_sink: Fraction = Fraction(0)
    arbiter_sink: Fraction = Fraction(0)
    time: int = 0
    move_counts: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.tau = as_fraction(self.tau)
        if self.tau < 0:
            raise ValueError(f"tau must be >= 0, got {self.tau}")
        self._timeouts: dict[str, tuple[int, Callable[[], None]]] = {}

    # -- accounts ----------------------------------------------------------

    def open_account(self, name: str, balance=0) -> None:
        if name in self.balances:
            raise LedgerError(f"account {name!r} already exists")
        amount = as_fraction(balance)
        if amount < 0:
            raise ValueError("opening balance must be >= 0")
        self.balances[name] = amount

    def balance(self, name: str) -> Fraction:
        self._require_account(name)
        return self.balances[name]

    def _require_account(self, name: str) -> None:
        if name not in self.balances:
            raise UnknownAccountError(name)

    def _require_funds(self, name: str, needed: Fraction) -> None:
        self._require_account(name)
        if self.balances[name] < needed:
            raise InsufficientFundsError(
                f"{name} has {self.balances[name]}, needs {needed}"
            )

    # -- fund movement -----------------------------------------------------

    def transfer(self, src: str, dst: str, amount, contract_move: bool = False) -> None:
        """Move funds between accounts; a contract move also costs the fee."""
        value = as_fraction(amount)
        if value < 0:
            raise ValueError("amount must be >= 0")
        self._require_account(dst)
        fee = self.tau if contract_move else Fraction(0)
        self._require_funds(src, value + fee)
        self.balances[src] -= value + fee
        self.balances[dst] += value
        self.fee_sink += fee
        if contract_move:
            self.move_counts[src] = self.move_counts.get(src, 0) + 1

    def escrow_deposit(self, party: str, contract_id: str, amount, contract_move: bool = False) -> None:
        value = as_fraction(amount)
        if value < 0:
            raise ValueError("amount must be >= 0")
        fee = self.tau if contract_move else Fraction(0)
        self._require_funds(party, value + fee)
        self.balances[party] -= value + fee
        self.pots[contract_id] = self.pots.get(contract_id, Fraction(0)) + value
        self.fee_sink += fee
        if contract_move:
            self.move_counts[party] = self.move_counts.get(party, 0) + 1

    def escrow_release(self, contract_id: str, party: str, amount, contract_move: bool = False) -> None:
        """Pay out of a pot; a fee-bearing release is a withdrawal claimed by
        the recipient, who covers the fee out of the proceeds."""
        value = as_fraction(amount)
        if value < 0:
            raise ValueError("amount must be >= 0")
        pot = self.pots.get(contract_id, Fraction(0))
        if pot < value:
            raise InsufficientFundsError(f"pot {contract_id} has {pot}, needs {value}")
        self._require_account(party)
        fee = self.tau if contract_move else Fraction(0)
        if self.balances[party] + value < fee:
            raise InsufficientFundsError(f"{party} cannot cover the withdrawal fee")
        self.pots[contract_id] = pot - value
        self.balances[party] += value - fee
        self.fee_sink += fee
        if contract_move:
            self.move_counts[party] = self.move_counts.get(party, 0) + 1

    def charge_move(self, party: str) -> None:
        """A fee-bearing contract move with no fund movement of its own."""
        self._require_funds(party, self.tau)
        self.balances[party] -= self.tau
        self.fee_sink += self.tau
        self.move_counts[party] = self.move_counts.get(party, 0) + 1

    def pot_to_arbiter(self, contract_id: str, amount) -> None:
        value = as_fraction(amount)
        pot = self.pots.get(contract_id, Fraction(0))
        if value < 0 or pot < value:
            raise InsufficientFundsError(f"pot {contract_id} has {pot}, needs {value}")
        self.pots[contract_id] = pot - value
        self.arbiter_sink += value

    def burn_from_pot(self, contract_id: str, amount) -> None:
        value = as_fraction(amount)
        pot = self.pots.get(contract_id, Fraction(0))
        if value < 0 or pot < value:
            raise InsufficientFundsError(f"pot {contract_id} has {pot}, needs {value}")
        self.pots[contract_id] = pot - value
        self.fee_sink += value

    def pot_balance(self, contract_id: str) -> Fraction:
        return self.pots.get(contract_id, Fraction(0))

    def total_funds(self) -> Fraction:
        return (
            sum(self.balances.values(), Fraction(0))
            + sum(self.pots.values(), Fraction(0))
            + self.fee_sink
            + self.arbiter_sink
        )

    # -- time and timeouts ---------------------------------------------------

    def register_timeout(self, contract_id: str, due: int, callback: Callable[[], None]) -> None:
        if due <= self.time:
            raise ValueError(f"due {due} is not in the future (now {self.time})")
        self._timeouts[contract_id] = (due, callback)

    def cancel_timeout(self, contract_id: str) -> None:
        self._timeouts.pop(contract_id, None)

    def advance_time(self, ticks: int) -> None:
        """Advance the clock, firing every due timeout exactly once.

        Timeouts fire at their due instant, in (due, contract-id) order;
        callbacks may register follow-up timeouts within the window.
        """
        if ticks <= 0:
            raise ValueError(f"ticks must be > 0, got {ticks}")
        target = self.time + ticks
        while True:
            due_now = sorted(
                (due, cid) for cid, (due, _) in self._timeouts.items() if due <= target
            )
            if not due_now:
                break
            due, cid = due_now[0]
            _, callback = self._timeouts.pop(cid)
            self.time = max(self.time, due)
            callback()
        self.time = target

    # -- snapshot ------------------------------------------------------------

    def snapshot(self) -> str:
        """Line-oriented dump: accounts, then pots and sinks, then the clock."""
        lines = [f"{name} {self.balances[name]}" for name in sorted(self.balances)]
        lines += [f"pot:{cid} {self.pots[cid]}" for cid in sorted(self.pots) if self.pots[cid]]
        lines.append(f"fee_sink {self.fee_sink}")
        lines.append(f"arbiter_sink {self.arbiter_sink}")
        lines.append(f"time {self.time}")
        return "\n".join(lines) + "\n"
