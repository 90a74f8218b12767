"""Transverse-field Ising chains with bond-dependent couplings.

``H' = sum_i J_i Z_i Z_{i+1} + g X_i`` on a periodic ring of ``n`` spins,
with the signs exactly as written (``J > 0`` is antiferromagnetic). Site 0 is
the most significant bit of the computational-basis index, and ``Z|0> = |0>``.
"""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass
from functools import lru_cache, partial
from pathlib import Path
from typing import Sequence

import numpy as np

from .ensembles import HermitianOperator, PureState
from .montecarlo import (
    DEFAULT_CONFIDENCE,
    CIMethod,
    EmpiricalCurve,
    check_grid,
    run_chunks,
)
from .spectra import DEFAULT_REL_GAP_TOL, Kind, ground_state, is_degenerate, lowest_pair, passes

MIN_SPINS = 2
MAX_SPINS = 12
DEFAULT_ISING_CHUNK = 1000


class DegenerateTargetError(RuntimeError):
    """The reference chain has no unique ground state."""


@dataclass(frozen=True)
class IsingSpec:
    n: int
    g: float = 1.0
    j_range: tuple[float, float] = (0.0, 2.0)
    target_J: float = 1.0
    master_seed: int = 0
    boundary: str = "periodic"

    def __post_init__(self):
        if int(self.n) != self.n or not MIN_SPINS <= self.n <= MAX_SPINS:
            raise ValueError(f"n must be an integer in [{MIN_SPINS}, {MAX_SPINS}], got {self.n!r}")
        lo, hi = self.j_range
        if lo > hi:
            raise ValueError(f"j_range must satisfy J_min <= J_max, got {self.j_range!r}")
        object.__setattr__(self, "j_range", (float(lo), float(hi)))
        if self.boundary != "periodic":
            raise ValueError("only periodic boundary conditions are supported")

    @property
    def dim(self) -> int:
        return 2**self.n

    def to_dict(self) -> dict:
        d = asdict(self)
        d["j_range"] = list(self.j_range)
        d["coupling_distribution"] = "iid uniform on j_range"
        return d


@lru_cache(maxsize=None)
def _bond_signs(n: int) -> np.ndarray:
    """``(n, 2**n)`` array; row ``i`` is the diagonal of ``Z_i Z_{i+1 mod n}``."""
    idx = np.arange(2**n)
    z = 1 - 2 * ((idx[None, :] >> (n - 1 - np.arange(n))[:, None]) & 1)
    return (z * np.roll(z, -1, axis=0)).astype(float)


@lru_cache(maxsize=None)
def _transverse(n: int) -> np.ndarray:
    """Dense ``sum_i X_i``."""
    D = 2**n
    x = np.zeros((D, D))
    idx = np.arange(D)
    for site in range(n):
        x[idx, idx ^ (1 << (n - 1 - site))] = 1.0
    return x


def _matrix(n: int, J: np.ndarray, g: float) -> np.ndarray:
    h = g * _transverse(n)
    h[np.diag_indices_from(h)] = J @ _bond_signs(n)
    return h


def build_hamiltonian(spec: IsingSpec, J: Sequence[float]) -> HermitianOperator:
    """Real symmetric ``2**n x 2**n`` matrix of the chain; bond ``i`` joins sites ``i`` and ``i+1 mod n``."""
    J = np.asarray(J, dtype=float)
    if J.shape != (spec.n,):
        raise ValueError(f"expected {spec.n} couplings, got shape {J.shape}")
    return HermitianOperator(_matrix(spec.n, J, spec.g))


def target_state(spec: IsingSpec, rel_gap_tol: float = DEFAULT_REL_GAP_TOL) -> PureState:
    """Ground state of the uniform chain ``J_i = target_J``."""
    J = np.full(spec.n, spec.target_J)
    gs = ground_state(build_hamiltonian(spec, J), rel_gap_tol)
    if gs.degenerate:
        raise DegenerateTargetError(
            f"uniform chain (n={spec.n}, J={spec.target_J}, g={spec.g}) has a degenerate ground state "
            f"(gap {gs.gap:.3e})"
        )
    return gs.state


def sample_couplings(spec: IsingSpec, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """I.i.d. uniform couplings on ``spec.j_range``; shape ``(n,)`` or ``(size, n)``."""
    lo, hi = spec.j_range
    shape = (spec.n,) if size is None else (size, spec.n)
    return lo + (hi - lo) * rng.random(shape)


def _sweep_chunk(rng, size, *, spec, target, epsilons, kind, rel_gap_tol, audit):
    J = sample_couplings(spec, rng, size)
    hits = np.zeros(epsilons.size, dtype=np.int64)
    degenerate = 0
    rows = [] if audit else None
    # bound on the spectral radius, used as the gap scale
    scale_base = spec.n * abs(spec.g)
    for row in J:
        w, v = lowest_pair(_matrix(spec.n, row, spec.g))
        ov = abs(float(v[:, 0] @ target))
        scale = scale_base + float(np.abs(row).sum())
        if is_degenerate(w[0], w[1], scale, rel_gap_tol):
            degenerate += 1
        else:
            hits += passes(ov, epsilons, kind)
        if audit:
            rows.append([float(x) for x in row] + [ov * ov])
    return hits, degenerate, rows


def ising_sweep(
    spec: IsingSpec,
    grid: Sequence[float],
    trials: int,
    kind: Kind = "fidelity",
    *,
    workers: int = 1,
    chunk: int = DEFAULT_ISING_CHUNK,
    confidence: float = DEFAULT_CONFIDENCE,
    ci_method: CIMethod = "wilson",
    rel_gap_tol: float = DEFAULT_REL_GAP_TOL,
    audit_path: str | Path | None = None,
) -> EmpiricalCurve:
    """Relative volume of random-coupling chains whose ground state is near the uniform chain's.

    Every trial samples couplings, diagonalises the chain and tests its
    ground state against :func:`target_state` on the whole grid. Degenerate
    draws count as misses. ``audit_path`` writes one CSV row per trial
    (index, couplings, fidelity).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    eps = check_grid(grid)
    target = np.real_if_close(target_state(spec, rel_gap_tol).amplitudes)
    fn = partial(
        _sweep_chunk, spec=spec, target=target, epsilons=eps, kind=kind,
        rel_gap_tol=rel_gap_tol, audit=audit_path is not None,
    )
    results = run_chunks(fn, trials, spec.master_seed, chunk, workers)
    hits = np.zeros(eps.size, dtype=np.int64)
    degenerate = 0
    for h, d, _ in results:
        hits += h
        degenerate += d
    if audit_path is not None:
        with open(audit_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["trial"] + [f"J{i + 1}" for i in range(spec.n)] + ["fidelity"])
            t = 0
            for _, _, rows in results:
                for r in rows:
                    w.writerow([t] + [repr(x) for x in r])
                    t += 1
    return EmpiricalCurve(eps, hits, int(trials), kind, confidence, ci_method, degenerate)


#: Uniform 25-point grid through 0.1 and 1.0; the default tolerance grid for Ising sweeps.
ISING_GRID = tuple(float(x) for x in 0.1 + (np.arange(25) - 2) * 0.9 / 22)
