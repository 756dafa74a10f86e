"""Economic parameters of a single escrow trade and the wager schemes.

All money amounts and probabilities are exact rationals (`fractions.Fraction`)
so that the strict/non-strict inequality distinctions in the equilibrium
analysis are decidable without floating-point ties.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Rational = Union[int, str, float, Fraction]


class InvalidTradeError(ValueError):
    """The trade is ill-posed (no gains from trade, or parameters out of range)."""


def as_fraction(value: Rational) -> Fraction:
    """Coerce to an exact Fraction.

    Floats go through their decimal repr ("0.1" -> 1/10) rather than their
    binary expansion, so CLI-style inputs stay exact.
    """
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


@dataclass(frozen=True)
class TradeParams:
    """The economic quintuple of a trade.

    price:        what the buyer pays (x), must be positive
    seller_value: the item's value to the seller (x'), below the price
    buyer_value:  the item's value to the buyer (y), above the price
    arbiter_error: probability the arbiter rules against the honest party
    fee:          cost of one non-default contract move (0 disables fees)

    A trade only makes sense when buyer_value > price > seller_value; anything
    else is rejected as ill-posed.
    """

    price: Fraction
    seller_value: Fraction = Fraction(0)
    buyer_value: Fraction = Fraction(0)
    arbiter_error: Fraction = Fraction(0)
    fee: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        for name in ("price", "seller_value", "buyer_value", "arbiter_error", "fee"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if not self.buyer_value > self.price > self.seller_value:
            raise InvalidTradeError(
                f"need buyer_value > price > seller_value, got "
                f"{self.buyer_value} / {self.price} / {self.seller_value}"
            )
        if self.price <= 0 or self.seller_value < 0:
            raise InvalidTradeError("price must be > 0 and seller_value >= 0")
        if not 0 <= self.arbiter_error <= 1:
            raise InvalidTradeError(f"arbiter_error must lie in [0, 1], got {self.arbiter_error}")
        if self.fee < 0:
            raise InvalidTradeError(f"fee must be >= 0, got {self.fee}")


class InvalidSchemeError(ValueError):
    """The wager scheme's parameters are out of range."""


@dataclass(frozen=True)
class Standard:
    """Both disputants stake `wager`; the winner is repaid price + wager,
    the loser's wager compensates the arbiter."""

    wager: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "wager", as_fraction(self.wager))
        if self.wager <= 0:
            raise InvalidSchemeError(f"wager must be > 0, got {self.wager}")

    name = "standard"

    def stake(self, params: TradeParams) -> Fraction:
        return self.wager

    def win_gain(self, params: TradeParams) -> Fraction:
        return params.price

    def loss_cost(self, params: TradeParams) -> Fraction:
        return self.wager


@dataclass(frozen=True)
class WinnerRebate:
    """Like Standard, but the winner also pockets the loser's wager."""

    wager: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "wager", as_fraction(self.wager))
        if self.wager <= 0:
            raise InvalidSchemeError(f"wager must be > 0, got {self.wager}")

    name = "winner_rebate"

    def stake(self, params: TradeParams) -> Fraction:
        return self.wager

    def win_gain(self, params: TradeParams) -> Fraction:
        return params.price + self.wager

    def loss_cost(self, params: TradeParams) -> Fraction:
        return self.wager


@dataclass(frozen=True)
class Withheld:
    """No wager is ever returned: the winner recovers only the escrowed price."""

    wager: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "wager", as_fraction(self.wager))
        if self.wager <= 0:
            raise InvalidSchemeError(f"wager must be > 0, got {self.wager}")

    name = "withheld"

    def stake(self, params: TradeParams) -> Fraction:
        return self.wager

    def win_gain(self, params: TradeParams) -> Fraction:
        return params.price - self.wager

    def loss_cost(self, params: TradeParams) -> Fraction:
        return self.wager


@dataclass(frozen=True)
class Generic:
    """Arbitrary payout rule: the arbitration winner nets +win_amount and the
    loser nets -loss_amount, both measured from their pre-dispute position and
    inclusive of all wager handling.

    Winning must be strictly preferred to losing (win_amount > -loss_amount).
    Each disputant's stake is loss_amount (the loser forfeits exactly their
    stake); the winner's gross payout from the pot is win_amount + loss_amount.
    """

    win_amount: Fraction
    loss_amount: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "win_amount", as_fraction(self.win_amount))
        object.__setattr__(self, "loss_amount", as_fraction(self.loss_amount))
        if self.loss_amount < 0:
            raise InvalidSchemeError(f"loss_amount must be >= 0, got {self.loss_amount}")
        if self.win_amount + self.loss_amount <= 0:
            raise InvalidSchemeError(
                "winning must be strictly preferred to losing "
                f"(win_amount > -loss_amount), got win={self.win_amount} loss={self.loss_amount}"
            )

    name = "generic"

    def stake(self, params: TradeParams) -> Fraction:
        return self.loss_amount

    def win_gain(self, params: TradeParams) -> Fraction:
        return self.win_amount

    def loss_cost(self, params: TradeParams) -> Fraction:
        return self.loss_amount


WagerScheme = Union[Standard, WinnerRebate, Withheld, Generic]

_KV_KEYS = ("x", "x_seller", "y", "gamma", "tau", "scheme", "lambda", "omega", "ell")


def to_kv(params: TradeParams, scheme: WagerScheme) -> str:
    """Serialize a parameter set to the flat key=value text format."""
    lines = [
        f"x={params.price}",
        f"x_seller={params.seller_value}",
        f"y={params.buyer_value}",
        f"gamma={params.arbiter_error}",
        f"tau={params.fee}",
        f"scheme={scheme.name}",
    ]
    if isinstance(scheme, Generic):
        lines.append(f"omega={scheme.win_amount}")
        lines.append(f"ell={scheme.loss_amount}")
    else:
        lines.append(f"lambda={scheme.wager}")
    return "\n".join(lines) + "\n"


def from_kv(text: str) -> tuple[TradeParams, WagerScheme]:
    """Parse the flat key=value format back into (TradeParams, WagerScheme).

    Blank lines and '#' comments are ignored; values may be integers,
    decimals, or ratios like 1/4.
    """
    values: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _KV_KEYS:
            raise ValueError(f"unknown key {key!r}")
        values[key] = val.strip()

    for required in ("x", "y"):
        if required not in values:
            raise ValueError(f"missing key {required!r}")
    params = TradeParams(
        price=values["x"],
        seller_value=values.get("x_seller", "0"),
        buyer_value=values["y"],
        arbiter_error=values.get("gamma", "0"),
        fee=values.get("tau", "0"),
    )
    scheme = scheme_from_kv(values, params)
    return params, scheme


def scheme_from_kv(values: dict[str, str], params: TradeParams) -> WagerScheme:
    """Build a WagerScheme from parsed key/value strings.

    The wager defaults to the price (lambda = x) for the named variants.
    """
    kind = values.get("scheme", "standard").lower().replace("-", "_")
    wager = as_fraction(values["lambda"]) if "lambda" in values else params.price
    if kind == "standard":
        return Standard(wager)
    if kind == "winner_rebate":
        return WinnerRebate(wager)
    if kind == "withheld":
        return Withheld(wager)
    if kind == "generic":
        if "omega" not in values or "ell" not in values:
            raise ValueError("generic scheme needs omega and ell")
        return Generic(as_fraction(values["omega"]), as_fraction(values["ell"]))
    raise ValueError(f"unknown scheme {kind!r}")
