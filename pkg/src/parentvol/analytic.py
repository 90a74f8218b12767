"""Closed-form volumes, relative volumes and locality bounds, all in log-space.

Everything here returns a :class:`~parentvol.logvalue.LogValue` because the
volumes grow like ``k**(N**2)`` times products of factorials and overflow
double precision already for ``N`` around 8.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal

from .logvalue import LogValue

Field = Literal["complex", "real"]

LOG_2PI = math.log(2.0 * math.pi)
#: Above this tolerance the linear-in-epsilon approximation is flagged.
EPSILON_WARN_THRESHOLD = 0.1
#: Largest eigen-dimension accepted by the TI bound evaluators.
MAX_LOCAL_DIM = 64


class EpsilonValidityWarning(UserWarning):
    """The small-epsilon approximation is being evaluated outside its regime."""


@dataclass(frozen=True)
class ManifoldSpec:
    """Positive Hamiltonians of dimension ``N`` with ``Tr H <= k``."""

    N: int
    k: float = 1.0
    field: Field = "complex"

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be an integer >= 1, got {self.N!r}")
        if not self.k > 0:
            raise ValueError(f"k must be positive, got {self.k!r}")
        if self.field not in ("complex", "real"):
            raise ValueError(f"field must be 'complex' or 'real', got {self.field!r}")


@dataclass(frozen=True)
class TIBoundSpec:
    """Parameters of the translationally-invariant volume bounds.

    ``d`` local dimension, ``t`` locality, ``n`` parties, ``M`` local terms,
    ``k`` trace bound; ``delta``, ``k_prime`` and ``epsilon`` are used only by
    :func:`delta_ti_relative_bound`.
    """

    d: int
    t: int
    n: int
    M: int
    k: float = 1.0
    delta: float = 0.0
    k_prime: float | None = None
    epsilon: float = 0.0

    def __post_init__(self):
        for name, low in (("d", 2), ("t", 1), ("n", 1), ("M", 1)):
            v = getattr(self, name)
            if int(v) != v or v < low:
                raise ValueError(f"{name} must be an integer >= {low}, got {v!r}")
        if self.t > self.n:
            raise ValueError(f"t must not exceed n (t={self.t}, n={self.n})")
        if not self.k > 0:
            raise ValueError(f"k must be positive, got {self.k!r}")
        if self.delta < 0:
            raise ValueError(f"delta must be >= 0, got {self.delta!r}")
        if self.k_prime is None:
            object.__setattr__(self, "k_prime", self.k)
        if not 0 < self.k_prime <= self.k:
            raise ValueError(f"k_prime must satisfy 0 < k_prime <= k, got {self.k_prime!r}")
        if not 0 <= self.epsilon <= 1:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon!r}")

    @property
    def nu(self) -> int:
        return self.M * self.d ** (self.n - self.t)

    @property
    def kappa(self) -> int:
        return self.d ** (2 * self.t) - 1

    @property
    def kappa_prime(self) -> int:
        return self.d**self.n - 1

    @property
    def local_dim(self) -> int:
        return self.d**self.t

    @property
    def global_dim(self) -> int:
        return self.d**self.n


def _check_dim(N, name="N", low=1):
    if int(N) != N or N < low:
        raise ValueError(f"{name} must be an integer >= {low}, got {N!r}")
    return int(N)


def _log_xi(n: int) -> float:
    return math.fsum(math.lgamma(j + 1) for j in range(1, n + 1))


def log_xi(n: int) -> LogValue:
    """Superfactorial ``1! 2! ... n!`` (empty product for ``n = 0``)."""
    n = _check_dim(n, "n", low=0)
    return LogValue(1, _log_xi(n))


def _log_i1(N: int, k: float) -> float:
    return (
        0.5 * math.log(N)
        - math.lgamma(N * N + 1)
        - math.lgamma(N + 1)
        + _log_xi(N)
        + _log_xi(N - 1)
        + N * N * math.log(k)
    )


def i1(spec: ManifoldSpec) -> LogValue:
    """Eigenvalue-simplex factor ``sqrt(N) / ((N^2)! N!) * xi_N xi_{N-1} k^(N^2)``."""
    if spec.field != "complex":
        raise ValueError("the eigenvalue integral is only available for complex Hamiltonians")
    return LogValue(1, _log_i1(spec.N, spec.k))


def _log_i2_complex(N: int) -> float:
    if N == 0:
        return 0.0
    return N * (N - 1) / 2 * LOG_2PI - _log_xi(N - 1)


def i2_complex(N: int) -> LogValue:
    """Haar volume of the complex flag manifold ``U(N)/U(1)^N``.

    ``N = 0`` is accepted and returns 1 so that fixing every eigenvector
    leaves just the eigenvalue factor.
    """
    N = _check_dim(N, low=0)
    return LogValue(1, _log_i2_complex(N))


def _log_i2_real(N: int) -> float:
    return (
        N * (N - 1) / 4 * LOG_2PI
        + N / 2 * math.log(math.pi)
        - math.fsum(math.lgamma(j / 2) for j in range(1, N + 1))
    )


def i2_real(N: int) -> LogValue:
    """Volume of the real flag manifold ``O(N)/O(1)^N``."""
    N = _check_dim(N, low=0)
    return LogValue(1, _log_i2_real(N))


def total_volume(spec: ManifoldSpec) -> LogValue:
    return i1(spec) * i2_complex(spec.N)


def hypersurface(spec: ManifoldSpec, L: int = 1) -> LogValue:
    """Volume of Hamiltonians with ``L`` prescribed eigenvectors, ``I1(N,k) I2(N-L)``."""
    if int(L) != L or not 1 <= L <= spec.N:
        raise ValueError(f"L must be an integer in [1, {spec.N}], got {L!r}")
    return i1(spec) * i2_complex(spec.N - int(L))


def _check_epsilon(epsilon):
    if not 0 <= epsilon <= 1:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon!r}")


def _epsilon_meta(epsilon: float) -> dict:
    if epsilon > EPSILON_WARN_THRESHOLD:
        msg = (
            f"epsilon={epsilon} exceeds {EPSILON_WARN_THRESHOLD}; "
            "the linear small-epsilon approximation may be inaccurate"
        )
        warnings.warn(msg, EpsilonValidityWarning, stacklevel=3)
        return {"warning": msg}
    return {}


def epsilon_volume(spec: ManifoldSpec, epsilon: float) -> LogValue:
    """Small-tolerance volume ``epsilon * I1(N,k) * I2(N-1)``.

    Tolerances above :data:`EPSILON_WARN_THRESHOLD` emit an
    :class:`EpsilonValidityWarning` and record it in ``result.meta``.
    """
    _check_epsilon(epsilon)
    meta = _epsilon_meta(epsilon)
    if epsilon == 0:
        return LogValue.zero(**meta)
    out = LogValue.from_real(epsilon) * i1(spec) * i2_complex(spec.N - 1)
    return out.with_meta(**meta)


def _log_rel_complex(N: int) -> float:
    return (1 - N) * LOG_2PI + math.lgamma(N)


def _log_rel_real(N: int) -> float:
    return (1 - N) / 2 * math.log(2.0) - N / 2 * math.log(math.pi) + math.lgamma(N / 2)


def relative_volume_paper(N: int, epsilon: float, field: Field = "complex") -> LogValue:
    """Relative volume of epsilon-parent Hamiltonians, linear in ``epsilon``.

    complex: ``eps (2 pi)^(1-N) (N-1)!``;
    real: ``eps 2^((1-N)/2) pi^(-N/2) Gamma(N/2)``.
    Independent of the trace bound ``k``.
    """
    N = _check_dim(N, low=2)
    _check_epsilon(epsilon)
    if epsilon == 0:
        return LogValue.zero()
    if field == "complex":
        log_rel = _log_rel_complex(N)
    elif field == "real":
        log_rel = _log_rel_real(N)
    else:
        raise ValueError(f"field must be 'complex' or 'real', got {field!r}")
    return LogValue(1, math.log(epsilon) + log_rel)


def relative_volume_stirling(N: int, epsilon: float) -> tuple[LogValue, LogValue]:
    """Large-N form ``eps (2 pi / e)^(-N) N^N`` and the largest admissible epsilon.

    Returns ``(value, epsilon_max)`` with ``epsilon_max = (2 pi / e)^N N^(-N)``.
    ``value.meta["within_epsilon_max"]`` tells whether ``epsilon <= epsilon_max``.
    """
    N = _check_dim(N, low=2)
    _check_epsilon(epsilon)
    log_base = LOG_2PI - 1.0
    log_eps_max = N * log_base - N * math.log(N)
    within = epsilon == 0 or math.log(epsilon) <= log_eps_max
    eps_max = LogValue(1, log_eps_max)
    if epsilon == 0:
        return LogValue.zero(within_epsilon_max=True), eps_max
    value = LogValue(1, math.log(epsilon) - N * log_base + N * math.log(N), {"within_epsilon_max": within})
    return value, eps_max


def ti_bound(spec: TIBoundSpec) -> LogValue:
    """Upper bound ``nu^(kappa/2) I1(d^t, k/nu) I2(d^t)`` on the TI manifold volume."""
    D = spec.local_dim
    if D > MAX_LOCAL_DIM:
        raise ValueError(f"d**t = {D} exceeds the supported maximum {MAX_LOCAL_DIM}")
    nu = spec.nu
    log_val = spec.kappa / 2 * math.log(nu) + _log_i1(D, spec.k / nu) + _log_i2_complex(D)
    return LogValue(1, log_val)


def delta_ti_relative_bound(spec: TIBoundSpec) -> LogValue:
    """Relative-volume bound for TI Hamiltonians with a ``delta`` nonlocal admixture.

    ``delta^kappa' nu^(kappa/2) I1(d^t,k) I2(d^t) I1(d^n, eps k') / I1(d^n, k + delta k')``.
    A zero ``delta`` or ``epsilon * k'`` gives a zero result rather than an error.
    """
    D = spec.local_dim
    if D > MAX_LOCAL_DIM:
        raise ValueError(f"d**t = {D} exceeds the supported maximum {MAX_LOCAL_DIM}")
    if spec.delta == 0:
        return LogValue.zero(reason="delta = 0: bound degenerates to zero")
    if spec.epsilon * spec.k_prime == 0:
        return LogValue.zero(reason="epsilon * k_prime = 0: bound degenerates to zero")
    Dn = spec.global_dim
    log_val = (
        spec.kappa_prime * math.log(spec.delta)
        + spec.kappa / 2 * math.log(spec.nu)
        + _log_i1(D, spec.k)
        + _log_i2_complex(D)
        + _log_i1(Dn, spec.epsilon * spec.k_prime)
        - _log_i1(Dn, spec.k + spec.delta * spec.k_prime)
    )
    return LogValue(1, log_val)
