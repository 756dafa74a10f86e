from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from escrowlab.ledger import (
    InsufficientFundsError,
    Ledger,
    TimeoutPolicy,
    UnknownAccountError,
    deposit_payback,
)


def fresh_ledger(tau=0):
    ledger = Ledger(tau=tau)
    ledger.open_account("buyer", 10)
    ledger.open_account("seller", 10)
    return ledger


def test_plain_transfer_moves_exactly_the_amount():
    ledger = fresh_ledger()
    ledger.escrow_deposit("buyer", "c1", 1)
    assert ledger.balance("buyer") == 9
    assert ledger.pot_balance("c1") == 1
    assert ledger.fee_sink == 0


def test_contract_move_charges_the_fee_to_the_mover():
    ledger = fresh_ledger(tau="1/10")
    ledger.escrow_deposit("buyer", "c1", 1, contract_move=True)
    assert ledger.balance("buyer") == Fraction(89, 10)
    assert ledger.pot_balance("c1") == 1
    assert ledger.fee_sink == Fraction(1, 10)
    assert ledger.move_counts == {"buyer": 1}


def test_default_moves_charge_nothing():
    ledger = fresh_ledger(tau="1/10")
    ledger.escrow_deposit("buyer", "c1", 1, contract_move=False)
    assert ledger.fee_sink == 0
    assert ledger.move_counts == {}


def test_overdraw_rejected_atomically():
    ledger = fresh_ledger(tau="1/2")
    with pytest.raises(InsufficientFundsError):
        ledger.escrow_deposit("buyer", "c1", 10, contract_move=True)  # 10 + fee > 10
    assert ledger.balance("buyer") == 10
    assert ledger.pot_balance("c1") == 0
    assert ledger.fee_sink == 0


def test_unknown_accounts_rejected():
    ledger = fresh_ledger()
    with pytest.raises(UnknownAccountError):
        ledger.transfer("nobody", "seller", 1)
    with pytest.raises(UnknownAccountError):
        ledger.transfer("buyer", "nobody", 1)


def test_pot_release_and_sinks():
    ledger = fresh_ledger()
    ledger.escrow_deposit("buyer", "c1", 3)
    ledger.escrow_release("c1", "seller", 1)
    ledger.pot_to_arbiter("c1", 1)
    ledger.burn_from_pot("c1", 1)
    assert ledger.pot_balance("c1") == 0
    assert ledger.balance("seller") == 11
    assert ledger.arbiter_sink == 1
    assert ledger.fee_sink == 1
    with pytest.raises(InsufficientFundsError):
        ledger.escrow_release("c1", "seller", 1)


OPS = st.lists(
    st.tuples(
        st.sampled_from(["deposit", "release", "transfer", "arbiter", "burn", "fee_move"]),
        st.sampled_from(["buyer", "seller"]),
        st.fractions(min_value=0, max_value=20, max_denominator=8),
    ),
    max_size=40,
)


@settings(max_examples=200, deadline=None)
@given(ops=OPS, tau=st.fractions(min_value=0, max_value=1, max_denominator=4))
def test_conservation_under_random_operation_sequences(ops, tau):
    ledger = fresh_ledger(tau=tau)
    total = ledger.total_funds()
    for op, party, amount in ops:
        try:
            if op == "deposit":
                ledger.escrow_deposit(party, "c1", amount, contract_move=True)
            elif op == "release":
                ledger.escrow_release("c1", party, amount)
            elif op == "transfer":
                ledger.transfer(party, "buyer" if party == "seller" else "seller", amount)
            elif op == "arbiter":
                ledger.pot_to_arbiter("c1", amount)
            elif op == "burn":
                ledger.burn_from_pot("c1", amount)
            else:
                ledger.charge_move(party)
        except (InsufficientFundsError, ValueError):
            pass
        assert ledger.total_funds() == total
        assert all(balance >= 0 for balance in ledger.balances.values())
        assert all(pot >= 0 for pot in ledger.pots.values())


# ---------------------------------------------------------------------------
# Liveness payback
# ---------------------------------------------------------------------------

POLICY = TimeoutPolicy(threshold=10, timeout=30, deposit=6)


def test_payback_full_until_threshold():
    assert deposit_payback(0, POLICY) == 6
    assert deposit_payback(10, POLICY) == 6


def test_payback_ramps_linearly():
    assert deposit_payback(20, POLICY) == 3  # midpoint of the ramp
    assert deposit_payback(15, POLICY) == Fraction(9, 2)


def test_payback_zero_from_timeout_on():
    assert deposit_payback(30, POLICY) == 0
    assert deposit_payback(1000, POLICY) == 0


def test_payback_is_monotone_and_continuous_at_the_threshold():
    values = [deposit_payback(t, POLICY) for t in range(0, 40)]
    assert all(a >= b for a, b in zip(values, values[1:]))
    # Approaching the threshold from above: ramp value at threshold equals D.
    ramp_at_threshold = POLICY.deposit * (
        1 - Fraction(POLICY.threshold - POLICY.threshold, POLICY.timeout - POLICY.threshold)
    )
    assert ramp_at_threshold == deposit_payback(POLICY.threshold, POLICY)


def test_payback_deposit_override_and_validation():
    bare = TimeoutPolicy(threshold=1, timeout=2)
    assert deposit_payback(0, bare, deposit=4) == 4
    with pytest.raises(ValueError):
        deposit_payback(0, bare)
    with pytest.raises(ValueError):
        deposit_payback(-1, POLICY)
    with pytest.raises(ValueError):
        TimeoutPolicy(threshold=5, timeout=5)


# ---------------------------------------------------------------------------
# Clock and timeout scheduler
# ---------------------------------------------------------------------------


def test_timeouts_fire_once_at_their_due_instant():
    ledger = fresh_ledger()
    fired = []
    ledger.register_timeout("c1", 5, lambda: fired.append(("c1", ledger.time)))
    ledger.advance_time(3)
    assert fired == []
    ledger.advance_time(10)
    assert fired == [("c1", 5)]
    assert ledger.time == 13
    ledger.advance_time(5)  # nothing left to fire
    assert fired == [("c1", 5)]


def test_timeouts_fire_in_due_then_contract_id_order():
    ledger = fresh_ledger()
    fired = []
    ledger.register_timeout("b", 5, lambda: fired.append("b"))
    ledger.register_timeout("a", 5, lambda: fired.append("a"))
    ledger.register_timeout("c", 2, lambda: fired.append("c"))
    ledger.advance_time(6)
    assert fired == ["c", "a", "b"]


def test_timeout_callbacks_may_chain_within_the_window():
    ledger = fresh_ledger()
    fired = []

    def first():
        fired.append("first")
        ledger.register_timeout("c1", ledger.time + 2, lambda: fired.append("second"))

    ledger.register_timeout("c1", 2, first)
    ledger.advance_time(10)
    assert fired == ["first", "second"]


def test_cancelled_timeouts_do_not_fire():
    ledger = fresh_ledger()
    fired = []
    ledger.register_timeout("c1", 2, lambda: fired.append("x"))
    ledger.cancel_timeout("c1")
    ledger.advance_time(5)
    assert fired == []


def test_time_only_moves_forward():
    ledger = fresh_ledger()
    with pytest.raises(ValueError):
        ledger.advance_time(0)
    with pytest.raises(ValueError):
        ledger.register_timeout("c1", 0, lambda: None)


def test_snapshot_format_is_stable():
    ledger = fresh_ledger(tau="1/10")
    ledger.escrow_deposit("buyer", "c1", 2, contract_move=True)
    ledger.pot_to_arbiter("c1", 1)
    ledger.advance_time(4)
    assert ledger.snapshot() == (
        "buyer 79/10\n"
        "seller 10\n"
        "pot:c1 1\n"
        "fee_sink 1/10\n"
        "arbiter_sink 1\n"
        "time 4\n"
    )
