"""Ordered eigensystems, ground states with gap diagnostics, and hit criteria."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np
import scipy.linalg

from .ensembles import HermitianOperator, PureState

Kind = Literal["overlap", "fidelity"]

DEFAULT_REL_GAP_TOL = 1e-10
HERMITICITY_TOL = 1e-12
# slack so that a state always passes against itself despite rounding
_ROUNDOFF = 1e-12


class NonHermitianError(ValueError):
    pass


class DimensionMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def gap(self) -> float:
        if self.eigenvalues.shape[0] < 2:
            return float("inf")
        return float(self.eigenvalues[1] - self.eigenvalues[0])

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


@dataclass(frozen=True)
class HitCriterion:
    kind: Kind
    epsilon: float

    def __post_init__(self):
        if self.kind not in ("overlap", "fidelity"):
            raise ValueError(f"kind must be 'overlap' or 'fidelity', got {self.kind!r}")
        if not 0 <= self.epsilon <= 1:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon!r}")


class GroundState(NamedTuple):
    energy: float
    state: PureState
    degenerate: bool
    gap: float


def _matrix(H) -> np.ndarray:
    return H.entries if isinstance(H, HermitianOperator) else np.asarray(H)


def decompose(H: HermitianOperator | np.ndarray) -> SpectralDecomposition:
    """Ascending eigen-decomposition of a Hermitian matrix.

    Raises :class:`NonHermitianError` when ``max|H - H^dagger|`` exceeds
    ``1e-12 * max|H|``.
    """
    a = _matrix(H)
    scale = max(float(np.max(np.abs(a), initial=0.0)), 1.0)
    defect = float(np.max(np.abs(a - a.conj().T), initial=0.0))
    if defect > HERMITICITY_TOL * scale:
        raise NonHermitianError(f"matrix is not Hermitian (defect {defect:.3e})")
    w, v = np.linalg.eigh(a)
    return SpectralDecomposition(w, v)


def is_degenerate(lam0: float, lam1: float, lam_max: float, rel_gap_tol: float) -> bool:
    return (lam1 - lam0) / max(abs(lam_max), 1.0) < rel_gap_tol


def ground_state(H: HermitianOperator | np.ndarray, rel_gap_tol: float = DEFAULT_REL_GAP_TOL) -> GroundState:
    """Lowest eigenpair plus a degeneracy flag.

    The flag is set when ``(lam_2 - lam_1) / max(|lam_N|, 1) < rel_gap_tol``;
    a degenerate ground state is reported, never raised.
    """
    dec = decompose(H)
    lam = dec.eigenvalues
    if lam.shape[0] == 1:
        return GroundState(float(lam[0]), PureState(dec.eigenvectors[:, 0]), False, float("inf"))
    degenerate = is_degenerate(lam[0], lam[1], lam[-1], rel_gap_tol)
    return GroundState(float(lam[0]), PureState(dec.eigenvectors[:, 0]), degenerate, dec.gap)


def lowest_pair(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two lowest eigenvalues and eigenvectors of a real symmetric or Hermitian matrix.

    Faster than a full ``eigh`` for the larger Ising matrices; no Hermiticity check.
    """
    if a.shape[0] < 3:
        w, v = np.linalg.eigh(a)
        return w[:2], v[:, :2]
    return scipy.linalg.eigh(a, subset_by_index=[0, 1], driver="evr", check_finite=False)


def _amplitudes(s) -> np.ndarray:
    return s.amplitudes if isinstance(s, PureState) else np.asarray(s)


def overlap(candidate, target) -> float:
    """``|<target|candidate>|``."""
    c, t = _amplitudes(candidate), _amplitudes(target)
    if c.shape != t.shape:
        raise DimensionMismatchError(f"dimension mismatch: {c.shape} vs {t.shape}")
    return float(abs(np.vdot(t, c)))


def passes(abs_overlap, epsilon, kind: Kind):
    """Vectorised criterion on ``|<target|candidate>|`` values.

    Broadcasts ``abs_overlap`` against ``epsilon``.
    """
    abs_overlap = np.asarray(abs_overlap)
    threshold = 1.0 - np.asarray(epsilon, dtype=float) - _ROUNDOFF
    if kind == "overlap":
        return abs_overlap >= threshold
    if kind == "fidelity":
        return abs_overlap**2 >= threshold
    raise ValueError(f"kind must be 'overlap' or 'fidelity', got {kind!r}")


def hit(candidate, target, c: HitCriterion) -> bool:
    """Whether ``candidate`` is within tolerance of ``target`` (global phase ignored)."""
    ov = min(overlap(candidate, target), 1.0)
    return bool(passes(ov, c.epsilon, c.kind))
