"""Measurement planning from diagonal counts and a threshold.

Measuring the computational-basis (diagonal) distribution first bounds every
off-diagonal element through |rho_ij| <= sqrt(rho_ii * rho_jj).  A plan then
keeps only the off-diagonal elements whose bound reaches the threshold; at
t = 0 every element with a nonvanishing bound is kept and the plan grows to
the conventional 4**n measurements.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import ElementIndex, basis_word
from .projectors import projector_for

EXPECTED_ZERO = 1e-12


@dataclass(frozen=True)
class DiagonalRecord:
    """Counts of one computational-basis measurement round."""

    counts: np.ndarray
    shots: int

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        if self.shots <= 0:
            raise ValueError("shots must be positive")
        if counts.ndim != 1 or counts.size < 2 or counts.size & (counts.size - 1):
            raise ValueError(f"counts length {counts.size} is not a power of two >= 2")
        if (counts < 0).any():
            raise ValueError("counts must be non-negative")
        if counts.sum() != self.shots:
            raise ValueError(f"counts sum to {counts.sum()}, expected shots={self.shots}")

    @property
    def n(self) -> int:
        return int(self.counts.size).bit_length() - 1

    def probabilities(self) -> np.ndarray:
        return self.counts / self.shots


@dataclass(frozen=True)
class MeasurementPlan:
    """Ordered measurement targets: all diagonal elements first, then the
    selected off-diagonal (re, im) pairs with j > i."""

    n: int
    threshold: float
    targets: tuple

    @property
    def size(self) -> int:
        return len(self.targets)

    def offdiagonal_pairs(self) -> list[tuple[int, int]]:
        seen = []
        for idx, _ in self.targets:
            if idx.part == "re":
                seen.append((idx.i, idx.j))
        return seen


def diagonal_plan(n: int) -> MeasurementPlan:
    """Plan containing only the 2**n computational-basis measurements."""
    if n < 1:
        raise ValueError("qubit count must be >= 1")
    targets = tuple(
        (ElementIndex(k, k, "diag"), basis_word(k, n)) for k in range(2**n)
    )
    return MeasurementPlan(n=n, threshold=1.0, targets=targets)


def select_offdiagonal(diag: DiagonalRecord, t: float) -> MeasurementPlan:
    """Build the measurement plan for threshold ``t`` from diagonal counts.

    A pair (i, j) is selected when sqrt(p_i * p_j) >= t and the product is
    nonzero; a vanishing diagonal estimate pins the whole row and column to
    zero, so those pairs are never measured even at t = 0.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {t}")
    n = diag.n
    p = diag.probabilities()
    targets = []
    for k in range(2**n):
        targets.append((ElementIndex(k, k, "diag"), basis_word(k, n)))
    for i in range(2**n):
        if p[i] == 0.0:
            continue
        for j in range(i + 1, 2**n):
            s = math.sqrt(p[i] * p[j])
            if s > 0.0 and s >= t:
                for part in ("re", "im"):
                    idx = ElementIndex(i, j, part)
                    targets.append((idx, projector_for(n, idx)))
    return MeasurementPlan(n=n, threshold=float(t), targets=tuple(targets))


@dataclass(frozen=True)
class ThresholdEstimate:
    """Noise/signal count levels and the normalized threshold derived from them.

    ``favorable`` records whether the signal level cleared the noise level;
    when it does not, the diagonal distribution offers no usable separation
    between populated and unpopulated entries.
    """

    noise_threshold: float
    signal_threshold: float
    threshold: float
    favorable: bool


def estimate_threshold(
    ideal_diag: np.ndarray,
    noisy_runs: list[DiagonalRecord],
    n: int,
    noise_factor: float | None = None,
) -> ThresholdEstimate:
    """Estimate a circuit-specific threshold from replicated noisy diagonals.

    The ideal distribution splits indices into expected-zero and
    expected-nonzero.  Across all runs, ``c0`` is the largest count seen on
    an expected-zero index and ``c1`` the smallest count seen at the weakest
    expected-nonzero index.  The noise level is c0 + f*sqrt(c0) and the
    signal level c1 - f*sqrt(c1); the threshold is their maximum divided by
    the shots.  ``f`` defaults to the qubit count ``n``.
    """
    ideal = np.asarray(ideal_diag, dtype=float)
    if abs(ideal.sum() - 1.0) > 1e-9:
        raise ValueError(f"ideal diagonal sums to {ideal.sum()}, expected 1")
    if len(noisy_runs) < 2:
        raise ValueError("need at least two noisy runs")
    shots = noisy_runs[0].shots
    for run in noisy_runs:
        if run.shots != shots:
            raise ValueError("noisy runs must share the same shot count")
        if run.counts.size != ideal.size:
            raise ValueError("noisy run length does not match the ideal diagonal")
    factor = float(n if noise_factor is None else noise_factor)

    nonzero = np.flatnonzero(ideal >= EXPECTED_ZERO)
    if nonzero.size == 0:
        raise ValueError("ideal diagonal has no expected-nonzero entries")
    zero = np.flatnonzero(ideal < EXPECTED_ZERO)

    counts = np.stack([run.counts for run in noisy_runs])
    c0 = float(counts[:, zero].max()) if zero.size else 0.0
    weakest = nonzero[np.argmin(ideal[nonzero])]
    c1 = float(counts[:, weakest].min())

    noise_level = c0 + factor * math.sqrt(c0)
    signal_level = c1 - factor * math.sqrt(c1)
    return ThresholdEstimate(
        noise_threshold=noise_level,
        signal_threshold=signal_level,
        threshold=max(noise_level, signal_level) / shots,
        favorable=signal_level > noise_level,
    )


# ---------------------------------------------------------------------------
# file formats


def write_diagonal_csv(path: str | Path, record: DiagonalRecord) -> None:
    """Diagonal counts CSV: a header comment carrying the shot count, then
    one (basis_index, count) row per computational-basis state."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# n_s={record.shots}\n")
        writer = csv.writer(fh)
        writer.writerow(["basis_index", "count"])
        for k, c in enumerate(record.counts):
            writer.writerow([k, int(c)])


def read_diagonal_csv(path: str | Path) -> DiagonalRecord:
    shots = None
    rows = {}
    with open(path, newline="") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                m = re.search(r"n_s\s*=\s*(\d+)", line)
                if m:
                    shots = int(m.group(1))
                continue
            first, _, rest = line.partition(",")
            if first == "basis_index":
                continue
            rows[int(first)] = int(rest)
    if shots is None:
        raise ValueError(f"{path}: missing '# n_s=...' header")
    if not rows:
        raise ValueError(f"{path}: no count rows")
    size = max(rows) + 1
    dim = 1 << (size - 1).bit_length()
    counts = np.zeros(max(dim, 2), dtype=np.int64)
    for k, c in rows.items():
        counts[k] = c
    return DiagonalRecord(counts=counts, shots=shots)


def write_plan_csv(path: str | Path, plan: MeasurementPlan) -> None:
    """Plan CSV: one row per target with fields i, j, part, projector_word."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# n_qubits={plan.n} threshold={plan.threshold!r}\n")
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "part", "projector_word"])
        for idx, word in plan.targets:
            writer.writerow([idx.i, idx.j, idx.part, word])


def read_plan_csv(path: str | Path) -> MeasurementPlan:
    n = None
    threshold = 0.0
    targets = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            if row[0].startswith("#"):
                m = re.search(r"n_qubits\s*=\s*(\d+)", row[0])
                if m:
                    n = int(m.group(1))
                m = re.search(r"threshold\s*=\s*([0-9.eE+-]+)", row[0])
                if m:
                    threshold = float(m.group(1))
                continue
            if row[0] == "i":
                continue
            i, j, part, word = int(row[0]), int(row[1]), row[2], row[3]
            targets.append((ElementIndex(i, j, part), word))
    if not targets:
        raise ValueError(f"{path}: no plan targets")
    if n is None:
        n = len(targets[0][1])
    return MeasurementPlan(n=n, threshold=threshold, targets=tuple(targets))
