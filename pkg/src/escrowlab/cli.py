"""Command-line front end.

Subcommands:

* solve       one security report for a parameter set
* sweep       CSV of reports over gamma/wager/fee grids
* simulate    repeated contract episodes with scripted strategies
* multiparty  one settlement batch from a payment-matrix file

Parameters mirror the key=value file format (x, x_seller, y, gamma, tau,
scheme, lambda, omega, ell); values may be integers, decimals, or ratios.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path
from random import Random

from .agents import BuyerStrategy, SellerStrategy, simulate, sweep, sweep_csv
from .equilibrium import lambda_interval, security_report
from .ledger import Ledger
from .multiparty import multiparty_run
from .trade import TradeParams, as_fraction, from_kv, scheme_from_kv

SELLER_STRATEGIES = {
    "honest": SellerStrategy.honest(),
    "never-send": SellerStrategy(send=False, counter_if_delivered=True, counter_if_undelivered=False),
    "never-counter": SellerStrategy(send=True, counter_if_delivered=False, counter_if_undelivered=False),
    "always-counter": SellerStrategy(send=True, counter_if_delivered=True, counter_if_undelivered=True),
}

BUYER_STRATEGIES = {
    "honest": BuyerStrategy.honest(),
    "always-dispute": BuyerStrategy(dispute_if_delivered=True, dispute_if_undelivered=True),
    "never-dispute": BuyerStrategy(dispute_if_delivered=False, dispute_if_undelivered=False),
}


def _add_param_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--params", type=Path, help="key=value parameter file")
    parser.add_argument("--x", help="price")
    parser.add_argument("--x-seller", default="0", help="seller's value of the item")
    parser.add_argument("--y", help="buyer's value of the item")
    parser.add_argument("--gamma", default="0", help="arbiter error rate")
    parser.add_argument("--tau", default="0", help="per-move fee")
    parser.add_argument("--scheme", default="standard",
                        choices=["standard", "winner_rebate", "withheld", "generic"])
    parser.add_argument("--lambda", dest="wager", help="wager size (defaults to the price)")
    parser.add_argument("--omega", help="generic scheme: winner's net gain")
    parser.add_argument("--ell", help="generic scheme: loser's net loss")


def _build_params(args: argparse.Namespace):
    if args.params is not None:
        return from_kv(args.params.read_text())
    if args.x is None or args.y is None:
        raise SystemExit("need --x and --y (or --params FILE)")
    params = TradeParams(
        price=args.x,
        seller_value=args.x_seller,
        buyer_value=args.y,
        arbiter_error=args.gamma,
        fee=args.tau,
    )
    values = {"scheme": args.scheme}
    if args.wager is not None:
        values["lambda"] = args.wager
    if args.omega is not None:
        values["omega"] = args.omega
    if args.ell is not None:
        values["ell"] = args.ell
    return params, scheme_from_kv(values, params)


def _fractions_list(text: str) -> list[Fraction]:
    return [as_fraction(part) for part in text.split(",") if part.strip()]


def _read_matrix(path: Path) -> list[list[str]]:
    rows = [line.split() for line in path.read_text().splitlines() if line.strip()]
    if not rows or any(len(row) != len(rows) for row in rows):
        raise SystemExit(f"{path}: expected a square whitespace-separated grid")
    return rows


def cmd_solve(args: argparse.Namespace) -> None:
    params, scheme = _build_params(args)
    report = security_report(params, scheme)
    for key, value in report.to_row().items():
        print(f"{key}={value}")
    if scheme.name != "generic":
        print(f"complete_interval={lambda_interval(params, scheme)}")


def cmd_sweep(args: argparse.Namespace) -> None:
    gammas = _fractions_list(args.gammas)
    wagers = _fractions_list(args.lambdas) if args.lambdas else [as_fraction(args.x)]
    fees = _fractions_list(args.taus)
    reports = sweep(
        args.x, args.x_seller, args.y,
        gammas=gammas, wagers=wagers, fees=fees,
        schemes=args.schemes.split(","),
    )
    sys.stdout.write(sweep_csv(reports))


def cmd_simulate(args: argparse.Namespace) -> None:
    params, scheme = _build_params(args)
    stats = simulate(
        params, scheme,
        SELLER_STRATEGIES[args.seller],
        BUYER_STRATEGIES[args.buyer],
        trials=args.trials,
        seed=args.seed,
    )
    for key, value in stats.to_row().items():
        print(f"{key}={value}")


def cmd_multiparty(args: argparse.Namespace) -> None:
    payments = _read_matrix(args.matrix)
    n = len(payments)
    zeros = [[0] * n for _ in range(n)]
    disputes = _read_matrix(args.disputes) if args.disputes else zeros
    counters = _read_matrix(args.counters) if args.counters else zeros

    parties = [f"p{i + 1}" for i in range(n)]
    ledger = Ledger(tau=args.tau)
    totals = [sum(as_fraction(v) for v in row) for row in payments]
    for name, row_total in zip(parties, totals):
        endow = 3 * (row_total + sum(totals)) + 3 * ledger.tau + 1
        ledger.open_account(name, endow)
    before = dict(ledger.balances)

    result = multiparty_run(
        ledger, parties, payments, disputes, counters, rng=Random(args.seed)
    )
    for i, name in enumerate(parties):
        delta = ledger.balance(name) - before[name]
        sign = f"+{delta}" if delta > 0 else str(delta)
        moves = ledger.move_counts.get(name, 0)
        print(f"party {name} payout {result.payouts[i]} delta {sign} fee_moves {moves}")
    print(f"arbiter_sink {ledger.arbiter_sink}")
    print(f"fee_sink {ledger.fee_sink}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="escrowlab",
        description="Wager-based escrow contract laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="security report for one parameter set")
    _add_param_flags(solve)
    solve.set_defaults(func=cmd_solve)

    sweep_cmd = sub.add_parser("sweep", help="CSV report over parameter grids")
    sweep_cmd.add_argument("--x", required=True)
    sweep_cmd.add_argument("--x-seller", default="0")
    sweep_cmd.add_argument("--y", required=True)
    sweep_cmd.add_argument("--gammas", default=",".join(f"{k}/20" for k in range(20)))
    sweep_cmd.add_argument("--lambdas", default=None, help="comma list; defaults to the price")
    sweep_cmd.add_argument("--taus", default="0")
    sweep_cmd.add_argument("--schemes", default="standard")
    sweep_cmd.set_defaults(func=cmd_sweep)

    sim = sub.add_parser("simulate", help="repeated trades with scripted strategies")
    _add_param_flags(sim)
    sim.add_argument("--seller", default="honest", choices=sorted(SELLER_STRATEGIES))
    sim.add_argument("--buyer", default="honest", choices=sorted(BUYER_STRATEGIES))
    sim.add_argument("--trials", type=int, default=1000)
    sim.add_argument("--seed", type=int, default=0)
    sim.set_defaults(func=cmd_simulate)

    mp = sub.add_parser("multiparty", help="settle one payment-matrix batch")
    mp.add_argument("--matrix", type=Path, required=True, help="n x n payment grid")
    mp.add_argument("--disputes", type=Path, default=None)
    mp.add_argument("--counters", type=Path, default=None)
    mp.add_argument("--seed", type=int, default=0)
    mp.add_argument("--tau", default="0")
    mp.set_defaults(func=cmd_multiparty)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
