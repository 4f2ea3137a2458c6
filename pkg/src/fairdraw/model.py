"""Domain types for drawing procedures and their canonical byte encoding.

Every hash and signature in the protocol consumes the ``DRAWv1`` encoding
produced here, so the layout is normative and bit-exact:

    DRAWv1
      did          : u32 length | UTF-8 of "proceeding#counter"
      stakeholders : u32 count  | per entry: u32 length | fingerprint bytes
      eligible     : u32 count  | per entry: u32 length | UTF-8 candidate id,
                                  u64 weight (big-endian)
      info         : u32 length | UTF-8 (length 0 when absent)

All integers are big-endian.  Two specs encode to the same bytes iff they
are field-wise equal (display names are not part of the encoding).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

from .errors import FormatError, SpecError
from .weights import WeightedEligibleList

ENCODING_TAG = b"DRAWv1"
DID_SEPARATOR = "#"
FINGERPRINT_LEN = 32


@dataclass(frozen=True, order=True)
class DrawId:
    """Unique identifier of one drawing: proceeding id plus a counter."""

    proceeding_id: str
    counter: int

    def __post_init__(self):
        if not self.proceeding_id:
            raise SpecError("proceeding id must be non-empty")
        if self.counter < 0:
            raise SpecError("draw counter must be non-negative")

    def render(self) -> str:
        # Strict write: new identifiers never embed the reserved separator.
        if DID_SEPARATOR in self.proceeding_id:
            raise SpecError(
                f"proceeding id {self.proceeding_id!r} contains reserved separator {DID_SEPARATOR!r}"
            )
        return f"{self.proceeding_id}{DID_SEPARATOR}{self.counter}"

    def render_lenient(self) -> str:
        """Render without the separator check, for identifiers read from legacy data."""
        return f"{self.proceeding_id}{DID_SEPARATOR}{self.counter}"

    def next_counter(self) -> "DrawId":
        return DrawId(self.proceeding_id, self.counter + 1)


def parse_draw_id(text: str) -> DrawId:
    """Parse ``proceeding#counter``, splitting on the *last* separator.

    Lenient read: proceeding ids from legacy data may contain ``#``.
    """
    head, sep, tail = text.rpartition(DID_SEPARATOR)
    if not sep:
        raise SpecError(f"draw id {text!r} is missing the {DID_SEPARATOR!r} separator")
    if not head:
        raise SpecError(f"draw id {text!r} has an empty proceeding id")
    if not tail.isdigit():
        raise SpecError(f"draw id {text!r} has a non-numeric counter {tail!r}")
    return DrawId(head, int(tail))


@dataclass(frozen=True)
class StakeholderId:
    """A participating witness, identified by its public-key fingerprint."""

    fingerprint: bytes
    display_name: str = ""

    def short(self) -> str:
        return self.fingerprint.hex()[:12]


@dataclass(frozen=True)
class DrawSpec:
    """Public context of one drawing: {DID, stakeholders, eligible list, info}."""

    did: DrawId
    stakeholders: tuple[StakeholderId, ...]
    eligible: WeightedEligibleList
    info: str = ""

    def __post_init__(self):
        object.__setattr__(self, "stakeholders", tuple(self.stakeholders))

    def fingerprints(self) -> tuple[bytes, ...]:
        return tuple(s.fingerprint for s in self.stakeholders)

    def stakeholder(self, fingerprint: bytes) -> StakeholderId | None:
        for s in self.stakeholders:
            if s.fingerprint == fingerprint:
                return s
        return None


@dataclass(frozen=True)
class DrawList:
    """An ordered list of drawings sharing one stakeholder roster."""

    draws: tuple[DrawSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "draws", tuple(self.draws))

    def stakeholders(self) -> tuple[StakeholderId, ...]:
        return self.draws[0].stakeholders


@dataclass
class ValidationReport:
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems


def validate_spec(spec: DrawSpec) -> ValidationReport:
    """Check every DrawSpec invariant; the report lists all violations."""
    report = ValidationReport()
    if DID_SEPARATOR in spec.did.proceeding_id:
        report.problems.append(
            f"proceeding id {spec.did.proceeding_id!r} contains reserved separator"
        )
    if not spec.stakeholders:
        report.problems.append("stakeholder list is empty")
    seen = set()
    for s in spec.stakeholders:
        if len(s.fingerprint) != FINGERPRINT_LEN:
            report.problems.append(
                f"fingerprint {s.fingerprint.hex()} has length {len(s.fingerprint)}, expected {FINGERPRINT_LEN}"
            )
        if s.fingerprint in seen:
            report.problems.append(f"duplicate stakeholder fingerprint {s.fingerprint.hex()}")
        seen.add(s.fingerprint)
    fps = [s.fingerprint for s in spec.stakeholders]
    if fps != sorted(fps):
        report.problems.append("unsorted stakeholders (must be ascending by fingerprint bytes)")
    if not spec.eligible.entries:
        report.problems.append("eligible list is empty")
    return report


def validate_draw_list(draws: DrawList) -> ValidationReport:
    report = ValidationReport()
    if not draws.draws:
        report.problems.append("draw list is empty")
        return report
    roster = draws.draws[0].stakeholders
    for spec in draws.draws:
        sub = validate_spec(spec)
        report.problems.extend(f"{spec.did.render_lenient()}: {p}" for p in sub.problems)
        if spec.stakeholders != roster:
            report.problems.append(
                f"{spec.did.render_lenient()}: stakeholder roster differs from first draw"
            )
    rendered = [s.did.render_lenient() for s in draws.draws]
    if rendered != sorted(rendered):
        report.problems.append("draws not sorted by rendered draw id")
    if len(set(rendered)) != len(rendered):
        report.problems.append("duplicate draw ids in draw list")
    return report


def _lp(data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + data


def canonical_encode(spec: DrawSpec) -> bytes:
    """Deterministic, injective ``DRAWv1`` byte encoding of a valid spec."""
    report = validate_spec(spec)
    if not report.ok:
        raise SpecError("invalid DrawSpec: " + "; ".join(report.problems))
    out = [ENCODING_TAG]
    out.append(_lp(spec.did.render_lenient().encode()))
    out.append(struct.pack(">I", len(spec.stakeholders)))
    for s in spec.stakeholders:
        out.append(_lp(s.fingerprint))
    out.append(struct.pack(">I", len(spec.eligible.entries)))
    for candidate, weight in spec.eligible.entries:
        out.append(_lp(candidate.identifier.encode()))
        out.append(struct.pack(">Q", weight))
    out.append(_lp(spec.info.encode()))
    return b"".join(out)


def canonical_encode_list(draws: DrawList) -> bytes:
    """Concatenated canonical encodings, in draw order."""
    report = validate_draw_list(draws)
    if not report.ok:
        raise SpecError("invalid DrawList: " + "; ".join(report.problems))
    return b"".join(canonical_encode(spec) for spec in draws.draws)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError("truncated DRAWv1 encoding", offset=self.pos)
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self.take(8))[0]

    def lp(self) -> bytes:
        return self.take(self.u32())


def canonical_decode(data: bytes) -> DrawSpec:
    """Inverse of :func:`canonical_encode`; exists so the format is testable."""
    from .weights import CandidateId  # local import to avoid cycle at module load

    r = _Reader(data)
    if r.take(len(ENCODING_TAG)) != ENCODING_TAG:
        raise FormatError("missing DRAWv1 tag", offset=0)
    did = parse_draw_id(r.lp().decode())
    stakeholders = tuple(StakeholderId(r.lp()) for _ in range(r.u32()))
    entries = tuple((CandidateId(r.lp().decode()), r.u64()) for _ in range(r.u32()))
    info = r.lp().decode()
    if r.pos != len(data):
        raise FormatError("trailing bytes after DRAWv1 encoding", offset=r.pos)
    eligible = WeightedEligibleList(entries)
    return DrawSpec(did=did, stakeholders=stakeholders, eligible=eligible, info=info)


def restart_spec(spec: DrawSpec, remove: set[bytes] = frozenset()) -> DrawSpec:
    """Successor spec after an abort: counter bumped, offenders removed."""
    remaining = tuple(s for s in spec.stakeholders if s.fingerprint not in remove)
    if not remaining:
        raise SpecError("removing the offending stakeholders would empty the roster")
    return DrawSpec(
        did=spec.did.next_counter(),
        stakeholders=remaining,
        eligible=spec.eligible,
        info=spec.info,
    )
