"""Dispute arbiters behind one Verdict interface.

Two production arbiters:

* a biased oracle that rules against the honest party with a configured
  error probability, and
* a commit-then-reveal coin toss between the disputants, where the seller
  commits to a bit, the buyer answers with a bit, and the XOR decides.

Messages are tagged records with a stable one-line wire form, and every
verdict carries its transcript; replaying a transcript re-derives the same
winner, including the timeout and invalid-opening paths.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from random import Random
from typing import Optional, Protocol, Union

from .gametree import Party
from .ledger import TimeoutPolicy
from .trade import as_fraction

#: Size of the commitment randomness, in bits.
COMMIT_RANDOMNESS_BITS = 256
_COMMIT_TAG = b"escrowlab/coin-commit/v1"


class CommitmentError(ValueError):
    pass


def commit(bit: int, randomness: bytes) -> bytes:
    """Hash commitment to a single bit.

    Hiding and binding rest on the hash; adequate at desk scale, not a
    substitute for a real commitment scheme against resourceful adversaries.
    """
    if bit not in (0, 1):
        raise CommitmentError(f"bit must be 0 or 1, got {bit!r}")
    if len(randomness) * 8 != COMMIT_RANDOMNESS_BITS:
        raise CommitmentError(
            f"randomness must be exactly {COMMIT_RANDOMNESS_BITS} bits"
        )
    return hashlib.sha256(_COMMIT_TAG + bytes([bit]) + randomness).digest()


def verify(digest: bytes, bit: int, randomness: bytes) -> bool:
    try:
        return commit(bit, randomness) == digest
    except CommitmentError:
        return False


@dataclass(frozen=True)
class Commitment:
    """A committer's local state: the published digest and its secret opening."""

    digest: bytes
    bit: int
    randomness: bytes

    @classmethod
    def create(cls, bit: int, randomness: bytes) -> "Commitment":
        return cls(digest=commit(bit, randomness), bit=bit, randomness=randomness)

    @classmethod
    def sample(cls, rng: Random) -> "Commitment":
        return cls.create(rng.getrandbits(1), rng.randbytes(COMMIT_RANDOMNESS_BITS // 8))

    def opening(self) -> tuple[int, bytes]:
        return self.bit, self.randomness


# ---------------------------------------------------------------------------
# Wire messages
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Commit:
    digest: bytes

    def wire(self) -> str:
        return f"COMMIT {self.digest.hex()}"


@dataclass(frozen=True)
class Bit:
    value: int

    def wire(self) -> str:
        return f"BIT {self.value}"


@dataclass(frozen=True)
class Open:
    bit: int
    randomness: bytes

    def wire(self) -> str:
        return f"OPEN {self.bit} {self.randomness.hex()}"


Message = Union[Commit, Bit, Open]


def parse_message(line: str) -> Message:
    parts = line.strip().split()
    try:
        if parts[0] == "COMMIT" and len(parts) == 2:
            return Commit(bytes.fromhex(parts[1]))
        if parts[0] == "BIT" and len(parts) == 2 and parts[1] in ("0", "1"):
            return Bit(int(parts[1]))
        if parts[0] == "OPEN" and len(parts) == 3 and parts[1] in ("0", "1"):
            return Open(int(parts[1]), bytes.fromhex(parts[2]))
    except (ValueError, IndexError):
        pass
    raise ValueError(f"malformed message {line!r}")


Transcript = tuple[tuple[str, str], ...]


def serialize_transcript(transcript: Transcript) -> str:
    return "\n".join(f"{sender} {line}" for sender, line in transcript) + "\n"


def parse_transcript(text: str) -> Transcript:
    entries = []
    for raw in text.splitlines():
        if not raw.strip():
            continue
        sender, _, line = raw.partition(" ")
        entries.append((sender, line))
    return tuple(entries)


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------

BASIS_ORACLE = "oracle"
BASIS_COIN = "coin"
BASIS_TIMEOUT = "forfeit-by-timeout"
BASIS_INVALID_OPENING = "invalid-opening"


@dataclass(frozen=True)
class Verdict:
    winner: Party
    basis: str
    transcript: Transcript

    def replay(self) -> Party:
        return replay_winner(self.transcript)


def replay_winner(transcript: Transcript) -> Party:
    """Re-derive the winner from a transcript alone."""
    if not transcript:
        raise ValueError("empty transcript")
    sender, line = transcript[-1]
    if line.startswith("RULE "):
        return Party(line.split()[1])
    if line == "TIMEOUT":
        return Party(sender).other()

    digest = buyer_bit = opening = None
    for sender, line in transcript:
        msg = parse_message(line)
        if isinstance(msg, Commit):
            digest = msg.digest
        elif isinstance(msg, Bit):
            buyer_bit = msg.value
        elif isinstance(msg, Open):
            opening = msg
    if digest is None or buyer_bit is None or opening is None:
        raise ValueError("incomplete transcript")
    if verify(digest, opening.bit, opening.randomness):
        coin = opening.bit ^ buyer_bit
    else:
        coin = 0
    return Party.SELLER if coin == 1 else Party.BUYER


# ---------------------------------------------------------------------------
# Oracle arbiter
# ---------------------------------------------------------------------------


def oracle_arbitrate(honest_party: Party, gamma, rng: Random) -> Verdict:
    """Rule for the honest party except with probability gamma.

    The error event is drawn exactly on the rational gamma, so seeded runs
    hit the advertised frequency without float rounding.
    """
    g = as_fraction(gamma)
    if not 0 <= g <= 1:
        raise ValueError(f"gamma must lie in [0, 1], got {g}")
    errs = rng.randrange(g.denominator) < g.numerator
    winner = honest_party.other() if errs else honest_party
    transcript = (("arbiter", f"RULE {winner.value}"),)
    return Verdict(winner=winner, basis=BASIS_ORACLE, transcript=transcript)


def jury_arbitrate(honest_party: Party, jurors: int, per_juror_error, rng: Random) -> Verdict:
    """Majority vote of independent, equally unreliable jurors.

    Experimentation plumbing only; no security claims attach to it.
    """
    if jurors < 1 or jurors % 2 == 0:
        raise ValueError("need an odd, positive number of jurors")
    g = as_fraction(per_juror_error)
    votes_for_honest = sum(
        1 for _ in range(jurors) if not (rng.randrange(g.denominator) < g.numerator)
    )
    winner = honest_party if 2 * votes_for_honest > jurors else honest_party.other()
    transcript = (
        ("jury", f"VOTES {votes_for_honest}/{jurors}"),
        ("jury", f"RULE {winner.value}"),
    )
    return Verdict(winner=winner, basis=BASIS_ORACLE, transcript=transcript)


# ---------------------------------------------------------------------------
# Coin-toss arbiter
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Late:
    """A response delivered after `ticks` of delay."""

    message: Message
    ticks: int


class Channel(Protocol):
    def respond(self, request: str, transcript: Transcript) -> Union[Message, Late, None]:
        ...


class HonestSeller:
    """Samples a bit, commits, and opens honestly when asked."""

    def __init__(self, rng: Random):
        self.rng = rng
        self._commitment: Optional[Commitment] = None

    def respond(self, request: str, transcript: Transcript):
        if request == "commit":
            self._commitment = Commitment.sample(self.rng)
            return Commit(self._commitment.digest)
        if request == "open":
            return Open(*self._commitment.opening())
        return None


class HonestBuyer:
    def __init__(self, rng: Random):
        self.rng = rng

    def respond(self, request: str, transcript: Transcript):
        if request == "bit":
            return Bit(self.rng.getrandbits(1))
        return None


_EXPECTED = {"commit": Commit, "bit": Bit, "open": Open}


def coin_toss_arbitrate(
    seller_channel: Channel,
    buyer_channel: Channel,
    policy: Optional[TimeoutPolicy] = None,
) -> Verdict:
    """Run the commit / bit / open exchange and decide by XOR.

    A party that stays silent, answers with the wrong record, or (under a
    policy) answers at or past the timeout forfeits on the spot.  An opening
    that fails verification counts as heads-for-the-buyer rather than a
    forfeit: the coin is forced to 0.
    """
    transcript: list[tuple[str, str]] = []

    def ask(channel: Channel, party: Party, request: str) -> Optional[Message]:
        response = channel.respond(request, tuple(transcript))
        ticks = 0
        if isinstance(response, Late):
            response, ticks = response.message, response.ticks
        expected = _EXPECTED[request]
        timed_out = (
            response is None
            or not isinstance(response, expected)
            or (policy is not None and ticks >= policy.timeout)
        )
        if timed_out:
            transcript.append((party.value, "TIMEOUT"))
            return None
        transcript.append((party.value, response.wire()))
        return response

    commitment = ask(seller_channel, Party.SELLER, "commit")
    if commitment is None:
        return Verdict(Party.BUYER, BASIS_TIMEOUT, tuple(transcript))
    buyer_bit = ask(buyer_channel, Party.BUYER, "bit")
    if buyer_bit is None:
        return Verdict(Party.SELLER, BASIS_TIMEOUT, tuple(transcript))
    opening = ask(seller_channel, Party.SELLER, "open")
    if opening is None:
        return Verdict(Party.BUYER, BASIS_TIMEOUT, tuple(transcript))

    if verify(commitment.digest, opening.bit, opening.randomness):
        coin = opening.bit ^ buyer_bit.value
        basis = BASIS_COIN
    else:
        coin = 0
        basis = BASIS_INVALID_OPENING
    winner = Party.SELLER if coin == 1 else Party.BUYER
    return Verdict(winner=winner, basis=basis, transcript=tuple(transcript))
