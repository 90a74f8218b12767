"""Monte Carlo relative volumes with confidence intervals, and the exact Haar-overlap oracle."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from statistics import NormalDist
from typing import Callable, Literal, Sequence

import numpy as np
from scipy import stats

from . import analytic
from .betafit import regularized_incomplete_beta
from .ensembles import EnsembleSpec, PureState, sample_haar_states, sample_hamiltonians
from .rng import chunk_sizes, stream
from .spectra import DEFAULT_REL_GAP_TOL, Kind, passes

Mode = Literal["eigvec", "full-h"]
CIMethod = Literal["wilson", "clopper-pearson"]

DEFAULT_CONFIDENCE = 0.99
DEFAULT_CHUNK = 4096


def wilson_interval(hits: int, trials: int, confidence: float = DEFAULT_CONFIDENCE) -> tuple[float, float]:
    """Two-sided Wilson score interval for a binomial proportion, clamped to [0, 1]."""
    if trials < 1 or not 0 <= hits <= trials:
        raise ValueError(f"need 0 <= hits <= trials and trials >= 1, got {hits}/{trials}")
    if not 0 < confidence < 1:
        raise ValueError("confidence must lie in (0, 1)")
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    n = float(trials)
    p = hits / n
    z2 = z * z
    centre = (p + z2 / (2 * n)) / (1 + z2 / n)
    half = z / (1 + z2 / n) * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n))
    low = 0.0 if hits == 0 else max(0.0, centre - half)
    high = 1.0 if hits == trials else min(1.0, centre + half)
    return low, high


def clopper_pearson_interval(hits: int, trials: int, confidence: float = DEFAULT_CONFIDENCE) -> tuple[float, float]:
    """Exact (conservative) binomial interval from Beta quantiles."""
    if trials < 1 or not 0 <= hits <= trials:
        raise ValueError(f"need 0 <= hits <= trials and trials >= 1, got {hits}/{trials}")
    tail = (1 - confidence) / 2
    low = 0.0 if hits == 0 else float(stats.beta.ppf(tail, hits, trials - hits + 1))
    high = 1.0 if hits == trials else float(stats.beta.ppf(1 - tail, hits + 1, trials - hits))
    return low, high


_CI_METHODS: dict[str, Callable[[int, int, float], tuple[float, float]]] = {
    "wilson": wilson_interval,
    "clopper-pearson": clopper_pearson_interval,
}


@dataclass
class EmpiricalCurve:
    """Hit counts on a tolerance grid, all tolerances sharing the same samples."""

    epsilons: np.ndarray
    hits: np.ndarray
    trials: int
    criterion: Kind
    confidence: float = DEFAULT_CONFIDENCE
    ci_method: CIMethod = "wilson"
    degenerate_count: int = 0
    ci_low: np.ndarray = field(init=False)
    ci_high: np.ndarray = field(init=False)

    def __post_init__(self):
        self.epsilons = np.asarray(self.epsilons, dtype=float)
        self.hits = np.asarray(self.hits, dtype=np.int64)
        bounds = [_CI_METHODS[self.ci_method](int(h), self.trials, self.confidence) for h in self.hits]
        self.ci_low = np.array([b[0] for b in bounds])
        self.ci_high = np.array([b[1] for b in bounds])

    @property
    def fractions(self) -> np.ndarray:
        return self.hits / self.trials

    def with_confidence(self, confidence: float, ci_method: CIMethod | None = None) -> EmpiricalCurve:
        return EmpiricalCurve(
            self.epsilons, self.hits, self.trials, self.criterion, confidence,
            ci_method or self.ci_method, self.degenerate_count,
        )

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "trials": int(self.trials),
            "confidence": self.confidence,
            "ci_method": self.ci_method,
            "degenerate_count": int(self.degenerate_count),
            "epsilons": [float(e) for e in self.epsilons],
            "hits": [int(h) for h in self.hits],
            "fraction": [float(f) for f in self.fractions],
            "ci_low": [float(v) for v in self.ci_low],
            "ci_high": [float(v) for v in self.ci_high],
        }

    @classmethod
    def from_dict(cls, d: dict) -> EmpiricalCurve:
        return cls(
            d["epsilons"], d["hits"], int(d["trials"]), d["criterion"],
            d.get("confidence", DEFAULT_CONFIDENCE), d.get("ci_method", "wilson"),
            int(d.get("degenerate_count", 0)),
        )


def check_grid(grid: Sequence[float]) -> np.ndarray:
    eps = np.asarray(grid, dtype=float)
    if eps.ndim != 1 or eps.size == 0:
        raise ValueError("epsilon grid must be a non-empty vector")
    if np.any((eps < 0) | (eps > 1)):
        raise ValueError("epsilon grid values must lie in [0, 1]")
    if np.any(np.diff(eps) <= 0):
        raise ValueError("epsilon grid must be strictly ascending")
    return eps


def exact_haar_tail(N: int, epsilon, field: str = "complex", kind: Kind = "overlap"):
    """Probability that a Haar-random state passes the criterion against a fixed state.

    The squared overlap ``p`` is Beta(1, N-1) (complex) or Beta(1/2, (N-1)/2)
    (real), so the fidelity tail is ``P(p >= 1 - eps)`` and the overlap tail is
    ``P(p >= (1 - eps)**2)``.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    eps = np.asarray(epsilon, dtype=float)
    if np.any((eps < 0) | (eps > 1)):
        raise ValueError("epsilon must lie in [0, 1]")
    if kind == "fidelity":
        q = eps
    elif kind == "overlap":
        q = 2 * eps - eps**2
    else:
        raise ValueError(f"kind must be 'overlap' or 'fidelity', got {kind!r}")
    if field == "complex":
        out = q ** (N - 1)
    elif field == "real":
        # P(p >= 1 - q) = P(1 - p <= q), with 1 - p ~ Beta((N-1)/2, 1/2)
        out = regularized_incomplete_beta(q, (N - 1) / 2, 0.5)
    else:
        raise ValueError(f"field must be 'complex' or 'real', got {field!r}")
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


# -- trial engine -----------------------------------------------------------------


def run_chunks(chunk_fn, trials: int, master_seed: int, chunk: int, workers: int = 1) -> list:
    """Run ``chunk_fn(rng, size)`` over fixed-size chunks; results in chunk order.

    Chunk ``i`` always draws from substream ``i`` of ``master_seed``, so
    anything merged from the results is independent of ``workers``.
    ``chunk_fn`` must be picklable when ``workers > 1``.
    """
    sizes = chunk_sizes(trials, chunk)
    jobs = [(master_seed, i, s) for i, s in enumerate(sizes)]
    task = partial(_run_one, chunk_fn)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(task, jobs))
    else:
        results = [task(j) for j in jobs]
    return results


def _run_one(chunk_fn, job):
    seed, index, size = job
    return chunk_fn(stream(seed, index), size)


def _eigvec_chunk(rng, size, *, N, field, target, epsilons, kind):
    states = sample_haar_states(N, field, rng, size)
    ov = np.abs(states @ np.conj(target))
    return passes(ov[:, None], epsilons[None, :], kind).sum(axis=0), 0


def _full_h_chunk(rng, size, *, spec, target, epsilons, kind, rel_gap_tol):
    h = sample_hamiltonians(spec, rng, size)
    w, v = np.linalg.eigh(h)
    ground = v[:, :, 0]
    ov = np.abs(ground @ np.conj(target))
    ok = passes(ov[:, None], epsilons[None, :], kind)
    if spec.N > 1:
        scale = np.maximum(np.abs(w[:, -1]), 1.0)
        degenerate = (w[:, 1] - w[:, 0]) / scale < rel_gap_tol
    else:
        degenerate = np.zeros(size, dtype=bool)
    ok &= ~degenerate[:, None]
    return ok.sum(axis=0), int(degenerate.sum())


def estimate_unrestricted(
    spec: EnsembleSpec,
    target: PureState | np.ndarray,
    grid: Sequence[float],
    trials: int,
    kind: Kind = "overlap",
    *,
    mode: Mode = "eigvec",
    workers: int = 1,
    chunk: int = DEFAULT_CHUNK,
    confidence: float = DEFAULT_CONFIDENCE,
    ci_method: CIMethod = "wilson",
    rel_gap_tol: float = DEFAULT_REL_GAP_TOL,
) -> EmpiricalCurve:
    """Fraction of sampled Hamiltonians whose ground state passes the criterion.

    ``mode="eigvec"`` draws only the ground direction (a Haar state), which the
    product form of the measure makes exact for unrestricted ensembles;
    ``mode="full-h"`` samples whole Hamiltonians and diagonalises them.
    Degenerate ground states (full-h only) count as misses and are tallied.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    tvec = np.asarray(target.amplitudes if isinstance(target, PureState) else target)
    if tvec.shape != (spec.N,):
        raise ValueError(f"target dimension {tvec.shape} does not match N={spec.N}")
    eps = check_grid(grid)
    if mode == "eigvec":
        fn = partial(_eigvec_chunk, N=spec.N, field=spec.field, target=tvec, epsilons=eps, kind=kind)
    elif mode == "full-h":
        fn = partial(_full_h_chunk, spec=spec, target=tvec, epsilons=eps, kind=kind, rel_gap_tol=rel_gap_tol)
    else:
        raise ValueError(f"mode must be 'eigvec' or 'full-h', got {mode!r}")
    results = run_chunks(fn, trials, spec.master_seed, chunk, workers)
    hits = np.zeros(eps.size, dtype=np.int64)
    degenerate = 0
    for h, d in results:
        hits += h
        degenerate += d
    return EmpiricalCurve(eps, hits, int(trials), kind, confidence, ci_method, degenerate)


@dataclass
class ComparisonReport:
    N: int
    field: str
    criterion: Kind
    curve: EmpiricalCurve
    paper_values: np.ndarray
    oracle_values: np.ndarray
    mode: str = "eigvec"

    def rows(self) -> list[dict]:
        c = self.curve
        return [
            {
                "epsilon": float(c.epsilons[i]),
                "mc_estimate": float(c.fractions[i]),
                "ci_low": float(c.ci_low[i]),
                "ci_high": float(c.ci_high[i]),
                "paper_value": float(self.paper_values[i]),
                "oracle_value": float(self.oracle_values[i]),
            }
            for i in range(c.epsilons.size)
        ]

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "field": self.field,
            "criterion": self.criterion,
            "mode": self.mode,
            "paper_formula": "linear-in-epsilon closed form (overlap criterion)",
            "oracle_formula": "exact Haar overlap tail",
            "rows": self.rows(),
        }


def compare_with_paper(
    N: int,
    grid: Sequence[float],
    trials: int,
    field: str = "complex",
    kind: Kind = "overlap",
    *,
    master_seed: int = 0,
    mode: Mode = "eigvec",
    workers: int = 1,
    chunk: int = DEFAULT_CHUNK,
    confidence: float = DEFAULT_CONFIDENCE,
    ci_method: CIMethod = "wilson",
) -> ComparisonReport:
    """Side-by-side Monte Carlo estimate, closed-form value and exact Haar tail.

    No agreement is asserted: for ``N > 2`` the closed form is linear in
    ``epsilon`` whereas the exact tail scales like ``epsilon**(N-1)``.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    spec = EnsembleSpec(N, 1.0, field, master_seed)
    target = PureState.basis(N)
    curve = estimate_unrestricted(
        spec, target, grid, trials, kind, mode=mode, workers=workers, chunk=chunk,
        confidence=confidence, ci_method=ci_method,
    )
    paper = np.array([analytic.relative_volume_paper(N, float(e), field).to_real() for e in curve.epsilons])
    oracle = np.atleast_1d(exact_haar_tail(N, curve.epsilons, field, kind))
    return ComparisonReport(N, field, kind, curve, paper, oracle, mode)
