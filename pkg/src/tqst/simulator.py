"""Target states, noise injection, and synthetic measurement counts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import expectation, n_qubits_of
from .threshold import DiagonalRecord, MeasurementPlan
from .mle import CountRecord

#: Computational components of the 7-qubit color-code logical states, written
#: as bit strings with the first qubit most significant.
_COLOR_CODE_BITS = {
    0: ("1010101", "1100011", "0101101", "0011011",
        "1001110", "0110110", "1111000", "0000000"),
    1: ("0101010", "1010010", "0011100", "1100100",
        "0110001", "1001001", "0000111", "1111111"),
}


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing mixture strength plus the shot-sampling mode.

    ``sampling="exact"`` returns rounded expectation values instead of random
    draws; with ``depolarizing=0`` that reproduces the ideal expectations.
    """

    depolarizing: float = 0.0
    sampling: str = "multinomial"
    seed: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.depolarizing <= 1.0:
            raise ValueError("depolarizing strength must be in [0, 1]")
        if self.sampling not in ("exact", "multinomial"):
            raise ValueError("sampling must be 'exact' or 'multinomial'")


def _pure(ket: np.ndarray) -> np.ndarray:
    ket = ket / np.linalg.norm(ket)
    return np.outer(ket, ket.conj())


def w_state(n: int) -> np.ndarray:
    """Equal superposition of the n single-excitation basis states."""
    if n < 1:
        raise ValueError("qubit count must be >= 1")
    ket = np.zeros(2**n, dtype=complex)
    for k in range(n):
        ket[1 << k] = 1.0
    return _pure(ket)


def ghz_state(n: int) -> np.ndarray:
    """(|0...0> + |1...1>)/sqrt(2)."""
    if n < 1:
        raise ValueError("qubit count must be >= 1")
    ket = np.zeros(2**n, dtype=complex)
    ket[0] = ket[-1] = 1.0
    return _pure(ket)


def color_code_state(logical: int) -> np.ndarray:
    """7-qubit color-code logical codeword (logical 0 or 1), eight equal components."""
    if logical not in (0, 1):
        raise ValueError("logical must be 0 or 1")
    ket = np.zeros(2**7, dtype=complex)
    for bits in _COLOR_CODE_BITS[logical]:
        ket[int(bits, 2)] = 1.0
    return _pure(ket)


def random_filled_state(n: int, filling: float, seed: int | None = None) -> np.ndarray:
    """Random pure state supported on ceil(filling * 2**n) basis indices.

    Support indices are drawn uniformly without replacement and amplitudes
    from a complex Gaussian, so the same seed always gives the same state.
    """
    if n < 1:
        raise ValueError("qubit count must be >= 1")
    if not 0.0 < filling <= 1.0:
        raise ValueError("filling must be in (0, 1]")
    dim = 2**n
    support = int(np.ceil(filling * dim))
    rng = np.random.default_rng(seed)
    idx = rng.choice(dim, size=support, replace=False)
    ket = np.zeros(dim, dtype=complex)
    ket[idx] = rng.normal(size=support) + 1j * rng.normal(size=support)
    return _pure(ket)


def apply_depolarizing(rho: np.ndarray, lam: float) -> np.ndarray:
    """(1 - lam) * rho + lam * I / dim."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("depolarizing strength must be in [0, 1]")
    dim = rho.shape[0]
    return (1.0 - lam) * rho + lam * np.eye(dim) / dim


def _exact_multinomial(p: np.ndarray, shots: int) -> np.ndarray:
    """Deterministic rounding of shots * p that preserves the total.

    Plain rounding can break the sum; the leftover shots go to the largest
    fractional remainders (lowest index on ties).
    """
    raw = p * shots
    base = np.floor(raw).astype(np.int64)
    left = shots - int(base.sum())
    if left > 0:
        remainder = raw - base
        order = np.lexsort((np.arange(p.size), -remainder))
        base[order[:left]] += 1
    return base


def sample_counts(
    rho: np.ndarray,
    plan: MeasurementPlan,
    shots: int,
    noise: NoiseModel = NoiseModel(),
) -> tuple[list[CountRecord], DiagonalRecord]:
    """Simulate the measurements of a plan on a (noise-injected) state.

    The diagonal is sampled once as a multinomial over the computational
    probabilities of the noisy state and reported both as a DiagonalRecord
    and as one CountRecord per diagonal target.  Every off-diagonal target is
    a binomial with its projector expectation as success probability.  Each
    target draws from its own spawned random stream, so results are
    reproducible per seed independent of evaluation order.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    n = n_qubits_of(rho)
    if n != plan.n:
        raise ValueError(f"plan is for {plan.n} qubits, state has {n}")
    noisy = apply_depolarizing(rho, noise.depolarizing)

    p_diag = np.clip(np.real(np.diag(noisy)), 0.0, None)
    p_diag = p_diag / p_diag.sum()
    streams = np.random.SeedSequence(noise.seed).spawn(len(plan.targets) + 1)
    if noise.sampling == "exact":
        diag_counts = _exact_multinomial(p_diag, shots)
    else:
        diag_counts = np.random.default_rng(streams[0]).multinomial(shots, p_diag)

    records = []
    for t, (idx, word) in enumerate(plan.targets):
        if idx.part == "diag":
            records.append(CountRecord(word, int(diag_counts[idx.i]), shots))
            continue
        q = min(max(expectation(noisy, word), 0.0), 1.0)
        if noise.sampling == "exact":
            observed = int(round(q * shots))
        else:
            observed = int(np.random.default_rng(streams[t + 1]).binomial(shots, q))
        records.append(CountRecord(word, observed, shots))
    return records, DiagonalRecord(counts=diag_counts, shots=shots)
