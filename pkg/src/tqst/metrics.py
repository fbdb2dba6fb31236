"""Fidelity measures, trace distance, rank, purity, and the threshold fidelity bound."""

from __future__ import annotations

import math

import numpy as np

from .core import validate_density


def _check_pair(rho: np.ndarray, sigma: np.ndarray, tolerance: float) -> None:
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    for name, m in (("first", rho), ("second", sigma)):
        report = validate_density(m, tolerance)
        if not report.ok:
            raise ValueError(f"{name} argument is not a valid density matrix: {report.as_dict()}")


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh((rho + rho.conj().T) / 2.0)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def root_fidelity(rho: np.ndarray, sigma: np.ndarray, tolerance: float = 1e-6) -> float:
    """Tr sqrt(sqrt(rho) sigma sqrt(rho)), symmetric in its arguments."""
    _check_pair(rho, sigma, tolerance)
    s = _psd_sqrt(rho)
    inner = s @ sigma @ s
    vals = np.linalg.eigvalsh((inner + inner.conj().T) / 2.0)
    return float(np.sqrt(np.clip(vals, 0.0, None)).sum())


def fidelity(rho: np.ndarray, sigma: np.ndarray, tolerance: float = 1e-6) -> float:
    """Squared root-fidelity; equals <psi|rho|psi> when sigma is the pure |psi>."""
    return root_fidelity(rho, sigma, tolerance) ** 2


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Half the sum of absolute eigenvalues of rho - sigma."""
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    delta = rho - sigma
    vals = np.linalg.eigvalsh((delta + delta.conj().T) / 2.0)
    return float(0.5 * np.abs(vals).sum())


def numerical_rank(rho: np.ndarray, eigen_tolerance: float = 1e-8) -> int:
    """Number of eigenvalues above ``eigen_tolerance``."""
    vals = np.linalg.eigvalsh((rho + rho.conj().T) / 2.0)
    return int((vals > eigen_tolerance).sum())


def purity(rho: np.ndarray) -> float:
    """tr(rho^2)."""
    return float(np.real(np.trace(rho @ rho)))


def fidelity_bound(diag: np.ndarray, t: float, rank: int) -> float:
    """Worst-case fidelity of reconstructing with below-threshold elements zeroed.

    With S the sum of diag_i * diag_j over all ordered pairs (i, j), i != j,
    whose geometric mean falls below ``t``, the bound is
    (1 - sqrt(rank * S))^2, clamped to [0, 1] before squaring: a negative
    inner value carries no information.  At t = 0 no pair is zeroed and the
    bound is exactly 1.
    """
    diag = np.asarray(diag, dtype=float)
    if rank < 1:
        raise ValueError("rank must be >= 1")
    if (diag < -1e-9).any():
        raise ValueError("diagonal entries must be non-negative")
    if diag.sum() > 1.0 + 1e-9:
        raise ValueError(f"diagonal sums to {diag.sum()}, above 1")
    p = np.clip(diag, 0.0, None)
    prod = np.outer(p, p)
    geo = np.sqrt(prod)
    below = geo < t
    np.fill_diagonal(below, False)
    s = float(prod[below].sum())  # both orientations of each pair
    inner = min(max(1.0 - math.sqrt(rank * s), 0.0), 1.0)
    return inner * inner


def truncate_below_threshold(rho: np.ndarray, t: float) -> np.ndarray:
    """Zero every off-diagonal pair whose diagonal geometric mean is below ``t``.

    This is the estimator a threshold-limited reconstruction targets; it is
    generally no longer positive semi-definite.
    """
    rho = np.asarray(rho, dtype=complex)
    p = np.clip(np.real(np.diag(rho)), 0.0, None)
    keep = np.sqrt(np.outer(p, p)) >= t
    np.fill_diagonal(keep, True)
    return np.where(keep, rho, 0.0)
