"""Samplers for the unitarily invariant Hilbert-Schmidt ensemble of bounded-trace Hamiltonians.

The volume element factorises into an eigenvalue part (squared Vandermonde
on the simplex, total trace with density ``~ t**(N**2 - 1)`` on ``[0, k]``)
times the Haar measure on the flag manifold. ``W = G G^dagger`` with ``G`` a
square complex Ginibre matrix realises exactly that eigenvalue law on the
unit-trace slice and is unitarily invariant, so we draw ``W / Tr W`` and
rescale by ``t = k * u**(1 / N**2)``.
"""

from __future__ import annotations

import contextlib
import hashlib
import json
import struct
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Iterator, Literal

import numpy as np

Field = Literal["complex", "real"]

_gaussian_bias = 0.0


@contextlib.contextmanager
def biased_gaussians(bias: float) -> Iterator[None]:
    """Test-only hook: shift every Gaussian draw by ``bias`` (negative control for ``verify``)."""
    global _gaussian_bias
    old, _gaussian_bias = _gaussian_bias, float(bias)
    try:
        yield
    finally:
        _gaussian_bias = old


def _normal(rng: np.random.Generator, shape) -> np.ndarray:
    x = rng.standard_normal(shape)
    if _gaussian_bias:
        x = x + _gaussian_bias
    return x


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    re = _normal(rng, shape)
    im = _normal(rng, shape)
    return (re + 1j * im) / np.sqrt(2.0)


@dataclass(frozen=True)
class EnsembleSpec:
    N: int
    k: float = 1.0
    field: Field = "complex"
    master_seed: int = 0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be an integer >= 1, got {self.N!r}")
        if not self.k > 0:
            raise ValueError(f"k must be positive, got {self.k!r}")
        if self.field not in ("complex", "real"):
            raise ValueError(f"field must be 'complex' or 'real', got {self.field!r}")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    def digest(self) -> bytes:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).digest()


@dataclass(frozen=True)
class HermitianOperator:
    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def hermiticity_defect(self) -> float:
        a = self.entries
        return float(np.max(np.abs(a - a.conj().T), initial=0.0))


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes)
        if a.ndim != 1:
            raise ValueError("state amplitudes must be a vector")
        object.__setattr__(self, "amplitudes", a)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @classmethod
    def basis(cls, N: int, index: int = 0) -> PureState:
        v = np.zeros(N, dtype=complex)
        v[index] = 1.0
        return cls(v)


def sample_haar_unitaries(N: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` Haar-random unitaries of shape ``(size, N, N)``.

    QR of a complex Ginibre matrix with the phases of ``diag(R)`` moved into
    ``Q`` (otherwise the QR convention biases the distribution).
    """
    z = _complex_normal(rng, (size, N, N))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    ph = d / np.abs(d)
    return q * ph[:, None, :]


def sample_haar_unitary(N: int, rng: np.random.Generator) -> np.ndarray:
    if N < 1:
        raise ValueError("N must be >= 1")
    return sample_haar_unitaries(N, rng, 1)[0]


def _trace_scale(spec: EnsembleSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    # density ~ t**(N^2 - 1) on [0, k]  =>  t = k u**(1/N^2)
    u = 1.0 - rng.random(size)  # (0, 1]
    return spec.k * u ** (1.0 / spec.N**2)


def sample_hamiltonians(spec: EnsembleSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    """Stack of ``size`` Hamiltonians drawn from the bounded-trace HS ensemble."""
    if spec.field != "complex":
        raise ValueError("real-field Hamiltonian sampling is not provided; use sample_haar_states")
    N = spec.N
    g = _complex_normal(rng, (size, N, N))
    w = g @ np.conj(np.swapaxes(g, -1, -2))
    w = 0.5 * (w + np.conj(np.swapaxes(w, -1, -2)))
    tr = np.real(np.trace(w, axis1=-2, axis2=-1))
    t = _trace_scale(spec, rng, size)
    return w * (t / tr)[:, None, None]


def sample_hamiltonian(spec: EnsembleSpec, rng: np.random.Generator) -> HermitianOperator:
    return HermitianOperator(sample_hamiltonians(spec, rng, 1)[0])


def sample_eigenvalues(spec: EnsembleSpec, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Ascending eigenvalue vectors of HS-ensemble Hamiltonians.

    Returns shape ``(N,)`` when ``size`` is None, otherwise ``(size, N)``.
    """
    n = 1 if size is None else size
    lam = np.linalg.eigvalsh(sample_hamiltonians(spec, rng, n))
    return lam[0] if size is None else lam


def sample_haar_states(N: int, field: Field, rng: np.random.Generator, size: int) -> np.ndarray:
    """``(size, N)`` array of uniformly random unit vectors over the given field."""
    if field == "complex":
        v = _complex_normal(rng, (size, N))
    elif field == "real":
        v = _normal(rng, (size, N))
    else:
        raise ValueError(f"field must be 'complex' or 'real', got {field!r}")
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def sample_haar_state(N: int, field: Field, rng: np.random.Generator) -> PureState:
    if N < 1:
        raise ValueError("N must be >= 1")
    return PureState(sample_haar_states(N, field, rng, 1)[0])


# -- audit dump ---------------------------------------------------------------
#
# File = MAGIC, then records. Record (little-endian):
#   32s  sha256 of the EnsembleSpec
#   Q    stream index
#   I    N
#   N*d  eigenvalues (float64, ascending)

DUMP_MAGIC = b"PVENS\x00\x01\x00"
_RECORD_HEAD = struct.Struct("<32sQI")


def write_dump(path: str | Path, spec: EnsembleSpec, records: Iterable[tuple[int, np.ndarray]]) -> int:
    """Write ``(stream_index, eigenvalues)`` records; returns the number written."""
    digest = spec.digest()
    count = 0
    with open(path, "wb") as fh:
        fh.write(DUMP_MAGIC)
        for index, lam in records:
            lam = np.ascontiguousarray(lam, dtype="<f8")
            fh.write(_RECORD_HEAD.pack(digest, int(index), lam.shape[0]))
            fh.write(lam.tobytes())
            count += 1
    return count


def read_dump(path: str | Path) -> list[tuple[bytes, int, np.ndarray]]:
    data = Path(path).read_bytes()
    if not data.startswith(DUMP_MAGIC):
        raise ValueError(f"{path}: not an ensemble dump")
    out = []
    pos = len(DUMP_MAGIC)
    while pos < len(data):
        digest, index, N = _RECORD_HEAD.unpack_from(data, pos)
        pos += _RECORD_HEAD.size
        lam = np.frombuffer(data, dtype="<f8", count=N, offset=pos).copy()
        pos += 8 * N
        out.append((digest, index, lam))
    return out
