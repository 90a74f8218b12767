import numpy as np
import pytest
from scipy import stats

from parentvol import ensembles as ens
from parentvol.ensembles import EnsembleSpec
from parentvol.rng import chunk_sizes, stream


def test_stream_determinism_and_independence():
    a = stream(7, 3).random(5)
    assert np.array_equal(a, stream(7, 3).random(5))
    assert not np.array_equal(a, stream(7, 4).random(5))
    assert not np.array_equal(a, stream(8, 3).random(5))


def test_stream_rejects_out_of_range():
    with pytest.raises(ValueError):
        stream(-1, 0)
    with pytest.raises(ValueError):
        stream(0, 2**64)


def test_chunk_sizes():
    assert chunk_sizes(10, 4) == [4, 4, 2]
    assert chunk_sizes(8, 4) == [4, 4]
    assert chunk_sizes(0, 4) == []


def test_haar_unitary_n1_is_phase():
    u = ens.sample_haar_unitary(1, stream(0, 0))
    assert abs(abs(u[0, 0]) - 1) < 1e-15


def test_haar_unitary_defect():
    u = ens.sample_haar_unitaries(4, stream(1, 0), 500)
    defect = np.abs(np.conj(np.swapaxes(u, 1, 2)) @ u - np.eye(4)).max()
    assert defect <= 1e-12


def test_haar_column_mean():
    # |U_00|^2 of a Haar unitary has mean 1/N and variance (N-1)/(N^2 (N+1))
    N, n = 3, 100_000
    u = ens.sample_haar_unitaries(N, stream(2, 0), n)
    p = np.abs(u[:, 0, 0]) ** 2
    se = np.sqrt((N - 1) / (N**2 * (N + 1)) / n)
    assert abs(p.mean() - 1 / N) < 3 * se


def test_haar_left_invariance():
    N, n = 3, 50_000
    V = ens.sample_haar_unitary(N, stream(3, 99))
    a = ens.sample_haar_unitaries(N, stream(3, 0), n)
    b = V @ ens.sample_haar_unitaries(N, stream(3, 1), n)
    assert stats.ks_2samp(np.abs(a[:, 1, 0]), np.abs(b[:, 1, 0])).pvalue > 0.01


def test_eigenvalues_n1_uniform():
    spec = EnsembleSpec(1, 2.0, "complex", 0)
    lam = ens.sample_eigenvalues(spec, stream(0, 0), 20_000)[:, 0]
    assert stats.kstest(lam / 2.0, "uniform").pvalue > 0.01


def test_eigenvalues_ordered_positive_bounded():
    spec = EnsembleSpec(4, 3.0, "complex", 0)
    lam = ens.sample_eigenvalues(spec, stream(0, 0), 5000)
    assert np.all(np.diff(lam, axis=1) > 0)
    assert np.all(lam > 0)
    assert np.all(lam.sum(axis=1) <= 3.0 + 1e-9)
    single = ens.sample_eigenvalues(spec, stream(0, 1))
    assert single.shape == (4,)


def test_trace_law_n2():
    spec = EnsembleSpec(2, 1.0, "complex", 0)
    lam = np.concatenate([ens.sample_eigenvalues(spec, stream(5, i), 10_000) for i in range(10)])
    res = stats.kstest(lam.sum(axis=1), lambda t: np.clip(t, 0, 1) ** 4)
    assert res.pvalue > 0.01


def test_unit_trace_slice_has_squared_vandermonde_law():
    # For N=2 on the unit-trace slice, x = lambda_1 has density ~ (1 - 2x)^2 on [0, 1/2]:
    # CDF F(x) = 1 - (1 - 2x)^3.
    spec = EnsembleSpec(2, 1.0, "complex", 0)
    lam = ens.sample_eigenvalues(spec, stream(6, 0), 50_000)
    x = lam[:, 0] / lam.sum(axis=1)
    assert stats.kstest(x, lambda v: 1 - (1 - 2 * np.clip(v, 0, 0.5)) ** 3).pvalue > 0.01


def test_hamiltonian_properties():
    spec = EnsembleSpec(5, 2.0, "complex", 0)
    h = ens.sample_hamiltonians(spec, stream(0, 0), 2000)
    assert np.abs(h - np.conj(np.swapaxes(h, 1, 2))).max() <= 1e-12 * np.abs(h).max()
    lam = np.linalg.eigvalsh(h)
    assert lam.min() > 0
    assert np.real(np.trace(h, axis1=1, axis2=2)).max() <= 2.0 + 1e-9
    op = ens.sample_hamiltonian(spec, stream(0, 1))
    assert op.dim == 5 and op.hermiticity_defect() == 0.0


def test_hamiltonian_n1_uniform():
    spec = EnsembleSpec(1, 1.0, "complex", 0)
    h = ens.sample_hamiltonians(spec, stream(0, 0), 20_000)[:, 0, 0].real
    assert stats.kstest(h, "uniform").pvalue > 0.01


def test_hamiltonian_unitary_invariance():
    spec = EnsembleSpec(3, 1.0, "complex", 0)
    V = ens.sample_haar_unitary(3, stream(9, 1000))
    a = np.concatenate([ens.sample_hamiltonians(spec, stream(9, i), 10_000)[:, 0, 0].real for i in range(5)])
    hb = np.concatenate([ens.sample_hamiltonians(spec, stream(9, 100 + i), 10_000) for i in range(5)])
    b = (V @ hb @ V.conj().T)[:, 0, 0].real
    assert stats.ks_2samp(a, b).pvalue > 0.01


def test_real_field_hamiltonian_not_provided():
    with pytest.raises(ValueError):
        ens.sample_hamiltonians(EnsembleSpec(3, 1.0, "real"), stream(0, 0), 1)


@pytest.mark.parametrize("field", ["complex", "real"])
def test_haar_states_are_normalised(field):
    v = ens.sample_haar_states(5, field, stream(0, 0), 1000)
    assert np.abs(np.linalg.norm(v, axis=1) - 1).max() <= 1e-12
    if field == "real":
        assert np.isrealobj(v)
    s = ens.sample_haar_state(1, "complex", stream(0, 1))
    assert abs(abs(s.amplitudes[0]) - 1) < 1e-15


def test_haar_state_overlap_uniform_n2():
    v = ens.sample_haar_states(2, "complex", stream(4, 0), 100_000)
    assert stats.kstest(np.abs(v[:, 0]) ** 2, "uniform").pvalue > 0.01


def test_haar_state_real_overlap_law():
    # real: |<0|phi>|^2 ~ Beta(1/2, (N-1)/2)
    N = 4
    v = ens.sample_haar_states(N, "real", stream(4, 1), 50_000)
    assert stats.kstest(v[:, 0] ** 2, stats.beta(0.5, (N - 1) / 2).cdf).pvalue > 0.01


def test_determinism():
    spec = EnsembleSpec(3, 1.0, "complex", 42)
    a = ens.sample_hamiltonians(spec, stream(spec.master_seed, 5), 10)
    b = ens.sample_hamiltonians(spec, stream(spec.master_seed, 5), 10)
    assert np.array_equal(a, b)


def test_positivity_and_nondegeneracy_small_n():
    for N in range(1, 9):
        spec = EnsembleSpec(N, 1.0, "complex", N)
        lam = np.linalg.eigvalsh(ens.sample_hamiltonians(spec, stream(N, 0), 10_000))
        assert lam[:, 0].min() > 0
        if N > 1:
            assert np.min(np.diff(lam, axis=1)) > 0


def test_biased_gaussians_hook_restores():
    with ens.biased_gaussians(1.0):
        x = ens._normal(stream(0, 0), 1000)
    assert x.mean() > 0.8
    assert ens._gaussian_bias == 0.0


def test_spec_validation():
    with pytest.raises(ValueError):
        EnsembleSpec(0)
    with pytest.raises(ValueError):
        EnsembleSpec(2, k=-1)
    with pytest.raises(ValueError):
        EnsembleSpec(2, field="quaternion")


def test_dump_round_trip(tmp_path):
    spec = EnsembleSpec(3, 1.0, "complex", 11)
    records = [(i, ens.sample_eigenvalues(spec, stream(11, i))) for i in range(4)]
    path = tmp_path / "ens.bin"
    assert ens.write_dump(path, spec, records) == 4
    back = ens.read_dump(path)
    assert [r[1] for r in back] == [0, 1, 2, 3]
    assert all(r[0] == spec.digest() for r in back)
    for (_, lam), (_, _, got) in zip(records, back):
        assert np.array_equal(lam, got)
    raw = path.read_bytes()
    assert raw.startswith(ens.DUMP_MAGIC)
    assert len(raw) == len(ens.DUMP_MAGIC) + 4 * (32 + 8 + 4 + 3 * 8)


def test_dump_rejects_foreign_file(tmp_path):
    p = tmp_path / "x.bin"
    p.write_bytes(b"not a dump")
    with pytest.raises(ValueError):
        ens.read_dump(p)
