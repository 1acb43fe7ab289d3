"""Closed-form detection model, key-space arithmetic, and CSV reporting.

A replay attacker slips past one verification when all three replays
succeed, so a single verification detects with probability
(1-p_wh)(1-p_id)(1-p_rtt).  Re-verifying under n distinct symmetric IDs
gives n independent chances, 1 - (1-P)^n overall.
"""

from __future__ import annotations

import decimal
import random
from dataclasses import dataclass

from .adversary import ReplayProfile, sample_detection
from .model import KEY_BITS


@dataclass(frozen=True)
class DetectionModel:
    """A replay profile together with the verifier's ID count."""

    profile: ReplayProfile
    n_ids: int

    def __post_init__(self):
        if self.n_ids < 1:
            raise ValueError(f"verifier needs at least one id, got {self.n_ids}")


def detection_probability(profile: ReplayProfile) -> float:
    """Chance a single verification catches the modeled replay attacker."""
    return (
        (1.0 - profile.p_wormhole)
        * (1.0 - profile.p_id_replay)
        * (1.0 - profile.p_rtt_replay)
    )


def detection_rate(model: DetectionModel) -> float:
    """Chance at least one of n_ids independent verifications catches."""
    single = detection_probability(model.profile)
    return 1.0 - (1.0 - single) ** model.n_ids


def keyspace_size(bits: int = KEY_BITS) -> int:
    """Exact count of distinct keys at the given width."""
    if bits < 1:
        raise ValueError(f"key width must be positive, got {bits}")
    return 1 << bits


def brute_force_average(bits: int = KEY_BITS) -> int:
    """Expected trials to hit one key by exhaustive search: half the space."""
    return keyspace_size(bits) // 2


def scientific_string(n: int, digits: int = 10) -> str:
    """Exact scientific rendering of an integer to the given significance."""
    if n <= 0:
        raise ValueError(f"expected a positive integer, got {n}")
    if digits < 1:
        raise ValueError(f"need at least one significant digit, got {digits}")
    with decimal.localcontext() as ctx:
        ctx.prec = digits
        quantized = +decimal.Decimal(n)
    exponent = quantized.adjusted()
    # Re-render from the decimal tuple so the format is stable.
    _, raw_digits, _ = quantized.as_tuple()
    digit_str = "".join(str(d) for d in raw_digits).rstrip("0") or "0"
    head, tail = digit_str[0], digit_str[1:]
    body = f"{head}.{tail}" if tail else head
    return f"{body}e+{exponent}" if exponent >= 0 else f"{body}e{exponent}"


def empirical_detection_rate(
    profile: ReplayProfile,
    n_ids: int,
    attempts: int,
    rng: random.Random,
) -> float:
    """Monte-Carlo detection fraction over simulated replay attempts.

    Each attempt faces one verification per provisioned ID and is counted
    as detected when any verification catches it.
    """
    if attempts < 1:
        raise ValueError(f"need at least one attempt, got {attempts}")
    detected = 0
    for _ in range(attempts):
        if any(sample_detection(profile, rng) for _ in range(n_ids)):
            detected += 1
    return detected / attempts


@dataclass(frozen=True)
class DetectionComparison:
    """Analytic vs simulated detection rate at one ID count."""

    n_ids: int
    analytic: float
    empirical: float
    attempts: int

    @property
    def abs_gap(self) -> float:
        return abs(self.analytic - self.empirical)


def compare_analytic_empirical(
    n_ids_values: list[int],
    profile: ReplayProfile,
    attempts: int = 10_000,
    seed: int = 0,
) -> list[DetectionComparison]:
    """Closed-form detection rates against seeded attempt simulations.

    The replay checks are independent of traffic, so the simulation is the
    attempt process itself: per ID count, `attempts` attackers each face
    one verification per provisioned ID.
    """
    rng = random.Random(seed)
    rows = []
    for n in n_ids_values:
        model = DetectionModel(profile, n)
        rows.append(
            DetectionComparison(
                n_ids=n,
                analytic=detection_rate(model),
                empirical=empirical_detection_rate(profile, n, attempts, rng),
                attempts=attempts,
            )
        )
    return rows


@dataclass(frozen=True)
class SweepSpec:
    """One-variable sweep: which knob, its values, replications per value."""

    variable: str  # "tx_rate" | "node_speed" | "n_ids"
    values: tuple[float, ...]
    repetitions: int = 1

    def __post_init__(self):
        if self.variable not in ("tx_rate", "node_speed", "n_ids"):
            raise ValueError(f"unknown sweep variable: {self.variable!r}")
        if not self.values:
            raise ValueError("sweep needs at least one value")
        if self.repetitions < 1:
            raise ValueError("sweep needs at least one repetition")


def emit_csv(records: list[dict], destination, fieldnames: list[str] | None = None) -> None:
    """Write records as a deterministic RFC-4180-style CSV.

    destination is a path or a writable text file.  Column order follows
    fieldnames, defaulting to the first record's key order; every record
    must share the schema.  Identical records yield identical bytes.
    """
    import csv

    if not records:
        raise ValueError("refusing to emit an empty csv")
    if fieldnames is None:
        fieldnames = list(records[0].keys())
    for record in records:
        if set(record.keys()) != set(fieldnames):
            raise ValueError("records do not share one schema")

    def write(out) -> None:
        writer = csv.DictWriter(out, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(records)

    if isinstance(destination, (str, bytes)) or hasattr(destination, "__fspath__"):
        with open(destination, "w", newline="") as handle:
            write(handle)
    else:
        write(destination)


def parse_csv(source) -> list[dict]:
    """Read back a CSV emitted by emit_csv, values as strings."""
    import csv

    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, "r", newline="") as handle:
            return list(csv.DictReader(handle))
    return list(csv.DictReader(source))
