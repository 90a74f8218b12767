"""Statistical validators for the samplers, run by ``parentvol verify``."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

from .ensembles import EnsembleSpec, PureState, sample_haar_states, sample_haar_unitaries, sample_hamiltonians
from .montecarlo import estimate_unrestricted, exact_haar_tail
from .rng import stream

SIGNIFICANCE = 0.01
DEFAULT_SEED = 20240607


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    statistic: float
    p_value: float | None
    detail: str

    def to_dict(self) -> dict:
        return asdict(self)


def _batched(fn, total, batch=10_000):
    out = []
    i = 0
    while total > 0:
        n = min(batch, total)
        out.append(fn(i, n))
        total -= n
        i += 1
    return np.concatenate(out)


def check_trace_law(draws: int, seed: int = DEFAULT_SEED, N: int = 2, k: float = 1.0) -> CheckResult:
    """Trace of sampled H against the CDF ``(t/k)**(N**2)`` (KS test)."""
    spec = EnsembleSpec(N, k, "complex", seed)
    traces = _batched(
        lambda i, n: np.real(np.trace(sample_hamiltonians(spec, stream(seed, i), n), axis1=1, axis2=2)), draws
    )
    res = stats.kstest(traces, lambda t: np.clip(t / k, 0, 1) ** (N * N))
    return CheckResult("trace_law", bool(res.pvalue >= SIGNIFICANCE), float(res.statistic), float(res.pvalue),
                       f"N={N}, k={k}, draws={draws}, KS against (t/k)^{N * N}")


def check_ground_overlap_law(draws: int, seed: int = DEFAULT_SEED + 1, N: int = 3, bins: int = 20) -> CheckResult:
    """Squared overlap of the sampled ground state with |0>, chi-square against Beta(1, N-1)."""
    spec = EnsembleSpec(N, 1.0, "complex", seed)

    def overlaps(i, n):
        _, v = np.linalg.eigh(sample_hamiltonians(spec, stream(seed, i), n))
        return np.abs(v[:, 0, 0]) ** 2

    p = _batched(overlaps, draws)
    # equiprobable bins under density (N-1)(1-p)^(N-2)
    edges = 1.0 - (1.0 - np.linspace(0.0, 1.0, bins + 1)) ** (1.0 / (N - 1))
    edges[-1] = 1.0
    observed, _ = np.histogram(p, edges)
    expected = np.full(bins, draws / bins)
    res = stats.chisquare(observed, expected)
    return CheckResult("ground_overlap_law", bool(res.pvalue >= SIGNIFICANCE), float(res.statistic),
                       float(res.pvalue), f"N={N}, draws={draws}, chi2 with {bins} equiprobable bins")


def check_haar_invariance(draws: int, seed: int = DEFAULT_SEED + 2, N: int = 3) -> CheckResult:
    """<0|V H V^dagger|0> vs <0|H|0> on independent draws (two-sample KS)."""
    spec = EnsembleSpec(N, 1.0, "complex", seed)
    V = sample_haar_unitaries(N, stream(seed, 2**40), 1)[0]
    a = _batched(lambda i, n: np.real(sample_hamiltonians(spec, stream(seed, i), n)[:, 0, 0]), draws)

    def rotated(i, n):
        h = sample_hamiltonians(spec, stream(seed, 2**20 + i), n)
        return np.real((V @ h @ V.conj().T)[:, 0, 0])

    b = _batched(rotated, draws)
    res = stats.ks_2samp(a, b)
    return CheckResult("haar_invariance", bool(res.pvalue >= SIGNIFICANCE), float(res.statistic), float(res.pvalue),
                       f"N={N}, draws={draws} per sample, fixed Haar V")


def check_state_law(draws: int, seed: int = DEFAULT_SEED + 3) -> CheckResult:
    """Complex N=2 Haar state: ``|<0|phi>|**2`` is uniform on [0, 1] (KS)."""
    p = _batched(lambda i, n: np.abs(sample_haar_states(2, "complex", stream(seed, i), n)[:, 0]) ** 2, draws)
    res = stats.kstest(p, "uniform")
    return CheckResult("haar_state_law", bool(res.pvalue >= SIGNIFICANCE), float(res.statistic), float(res.pvalue),
                       f"N=2 complex, draws={draws}")


def check_unitarity(draws: int, seed: int = DEFAULT_SEED + 4, N: int = 4, tol: float = 1e-12) -> CheckResult:
    eye = np.eye(N)

    def defects(i, n):
        u = sample_haar_unitaries(N, stream(seed, i), n)
        return np.max(np.abs(np.conj(np.swapaxes(u, 1, 2)) @ u - eye), axis=(1, 2))

    worst = float(_batched(defects, draws).max())
    return CheckResult("unitarity", worst <= tol, worst, None, f"N={N}, draws={draws}, max |U^dag U - 1| <= {tol}")


def check_positivity(draws: int, seed: int = DEFAULT_SEED + 5, max_N: int = 8) -> CheckResult:
    worst = np.inf
    min_rel_gap = np.inf
    for N in range(1, max_N + 1):
        spec = EnsembleSpec(N, 1.0, "complex", seed + N)
        lam = _batched(lambda i, n: np.linalg.eigvalsh(sample_hamiltonians(spec, stream(seed + N, i), n)), draws)
        worst = min(worst, float(lam[:, 0].min()))
        if N > 1:
            min_rel_gap = min(min_rel_gap, float(np.min((lam[:, 1] - lam[:, 0]) / np.maximum(lam[:, -1], 1.0))))
    return CheckResult("positivity", worst > 0 and min_rel_gap > 0, worst, None,
                       f"N<= {max_N}, draws={draws} each; min eigenvalue {worst:.3e}, min relative gap {min_rel_gap:.3e}")


def oracle_agreement_cells(trials: int, seed: int = DEFAULT_SEED + 6, workers: int = 1):
    """(N, eps, in_ci) for N in 2..6, eps in {0.05, 0.1, 0.2, 0.3}, overlap criterion, 99% CIs."""
    grid = [0.05, 0.1, 0.2, 0.3]
    cells = []
    for N in range(2, 7):
        curve = estimate_unrestricted(EnsembleSpec(N, 1.0, "complex", seed + N), PureState.basis(N), grid, trials,
                                      "overlap", workers=workers)
        oracle = exact_haar_tail(N, np.asarray(grid), "complex", "overlap")
        for j, e in enumerate(grid):
            cells.append((N, e, bool(curve.ci_low[j] <= oracle[j] <= curve.ci_high[j])))
    return cells


def check_oracle_agreement(trials: int, seed: int = DEFAULT_SEED + 6, workers: int = 1) -> CheckResult:
    cells = oracle_agreement_cells(trials, seed, workers)
    frac = sum(c[2] for c in cells) / len(cells)
    misses = [(N, e) for N, e, ok in cells if not ok]
    return CheckResult("oracle_agreement", frac >= 0.95, frac, None,
                       f"{len(cells)} cells, trials={trials}, fraction inside 99% CI; misses={misses}")


def check_mode_consistency(trials: int, seed: int = DEFAULT_SEED + 7, N: int = 3, epsilon: float = 0.2,
                           workers: int = 1) -> CheckResult:
    """Full-H and eigenvector-only estimates agree within combined 99% CI half-widths."""
    target = PureState.basis(N)
    spec = EnsembleSpec(N, 1.0, "complex", seed)
    a = estimate_unrestricted(spec, target, [epsilon], trials, "overlap", mode="full-h", workers=workers)
    b = estimate_unrestricted(EnsembleSpec(N, 1.0, "complex", seed + 1), target, [epsilon], trials, "overlap",
                              mode="eigvec", workers=workers)
    diff = abs(float(a.fractions[0] - b.fractions[0]))
    allow = float(a.ci_high[0] - a.ci_low[0] + b.ci_high[0] - b.ci_low[0]) / 2
    return CheckResult("mode_consistency", diff < allow, diff, None,
                       f"N={N}, eps={epsilon}, trials={trials}: full-h {a.fractions[0]:.5f} vs eigvec "
                       f"{b.fractions[0]:.5f}, allowed {allow:.5f}")


def run_all(quick: bool = False, workers: int = 1) -> list[CheckResult]:
    draws = 10_000 if quick else 100_000
    return [
        check_trace_law(draws),
        check_ground_overlap_law(draws),
        check_haar_invariance(draws),
        check_state_law(draws),
        check_unitarity(draws),
        check_positivity(min(draws, 10_000)),
        check_oracle_agreement(draws, workers=workers),
        check_mode_consistency(draws, workers=workers),
    ]
