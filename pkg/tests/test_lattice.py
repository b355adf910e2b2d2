import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nhlattice import (
    Family,
    HamiltonianMatrix,
    ModelSpec,
    apply_hamiltonian,
    build_model,
    eigendecompose,
    pt_image,
    pt_residual,
)


def spec_for(family, N, param, J=1.0):
    key = "theta" if Family(family).uses_theta else "kappa"
    return ModelSpec(family=Family(family), N=N, J=J, **{key: param})


class TestBuildModel:
    def test_cp_theta_zero_is_real_chain_with_unit_potential(self):
        h = build_model(spec_for("cp", 4, 0.0)).matrix
        expected = np.array([
            [1, -1, 0, 0],
            [-1, 0, -1, 0],
            [0, -1, 0, -1],
            [0, 0, -1, 0],
        ], dtype=complex)
        assert np.array_equal(h, expected)

    def test_h1_end_potentials(self):
        theta = 0.4 - 0.4j
        h = build_model(spec_for("h1", 20, theta)).matrix
        assert h[0, 0] == np.exp(1j * theta)
        assert h[19, 19] == np.exp(-1j * np.conj(theta))
        diag = np.diag(h).copy()
        diag[0] = diag[19] = 0
        assert np.all(diag == 0)

    def test_h2_kappa_one_is_gauge_equivalent_to_uniform_chain(self):
        # the right bond is +1 by the sign convention of the model as
        # written; flipping the last basis sign maps it to the uniform
        # chain, so it is Hermitian with the open-chain spectrum
        h = build_model(spec_for("h2", 6, 1.0)).matrix
        assert np.all(np.diag(h) == 0)
        assert np.all(np.diag(h, 1)[:-1] == -1) and h[4, 5] == +1
        assert np.array_equal(h, h.conj().T)
        uniform = -2 * np.cos(np.arange(1, 7) * np.pi / 7)
        assert np.allclose(np.sort(np.linalg.eigvalsh(h)), np.sort(uniform), atol=1e-12)

    def test_cc_end_bond_same_kappa_both_directions(self):
        kappa = 0.7 + 0.3j
        h = build_model(spec_for("cc", 8, kappa)).matrix
        assert h[0, 1] == -kappa and h[1, 0] == -kappa
        assert np.all(np.diag(h, 1)[1:] == -1)

    def test_h2_right_bond_is_plus_kappa_conj(self):
        kappa = 1 + 1j
        h = build_model(spec_for("h2", 10, kappa)).matrix
        assert h[8, 9] == +np.conj(kappa) and h[9, 8] == +np.conj(kappa)

    @pytest.mark.parametrize("family,param", [
        ("cp", 0.3 - 0.1j), ("cc", 1 + 1j), ("h1", 0.5 + 0.2j), ("h2", 0.4 - 0.7j),
    ])
    def test_tridiagonal(self, family, param):
        h = build_model(spec_for(family, 12, param)).matrix
        off = np.triu(h, 2)
        assert np.all(off == 0) and np.all(np.tril(h, -2) == 0)

    def test_rejects_small_n(self):
        with pytest.raises(ValueError):
            spec_for("cp", 3, 0.1)

    def test_rejects_bad_hopping(self):
        with pytest.raises(ValueError):
            spec_for("cp", 10, 0.1, J=0.0)
        with pytest.raises(ValueError):
            spec_for("cp", 10, 0.1, J=float("nan"))

    def test_rejects_nonfinite_param(self):
        with pytest.raises(ValueError):
            spec_for("h1", 10, complex(float("inf"), 0))

    def test_rejects_wrong_parameter_slot(self):
        with pytest.raises(ValueError):
            ModelSpec(family=Family.CP, N=10, kappa=1.0)
        with pytest.raises(ValueError):
            ModelSpec(family=Family.H2, N=10, theta=1.0)
        with pytest.raises(ValueError):
            ModelSpec(family=Family.CP, N=10, theta=1.0, kappa=1.0)


class TestHermiticity:
    def test_h1_real_theta_defect_is_the_two_end_potentials(self):
        theta = 0.7
        h = build_model(spec_for("h1", 12, theta)).matrix
        defect = h.conj().T - h
        expected = np.zeros_like(h)
        expected[0, 0] = np.conj(h[0, 0]) - h[0, 0]
        expected[11, 11] = np.conj(h[11, 11]) - h[11, 11]
        assert np.array_equal(defect, expected)
        assert defect[0, 0] == -2j * np.sin(theta)

    def test_real_kappa_families_are_hermitian(self):
        for family in ("cc", "h2"):
            h = build_model(spec_for(family, 9, 1.3)).matrix
            assert np.array_equal(h, h.conj().T)

    def test_cp_imaginary_theta_is_hermitian(self):
        # e^{i(ib)} = e^{-b} is real, so the end potential is real
        h = build_model(spec_for("cp", 9, 0.5j)).matrix
        assert np.array_equal(h, h.conj().T)


class TestParityConjugation:
    @pytest.mark.parametrize("family,param", [
        ("h1", 0.4 - 0.4j), ("h1", 1.2 + 0.3j), ("h2", 1 + 1j), ("h2", 0.3 + 0.3j),
    ])
    def test_symmetry_holds_to_machine_precision(self, family, param):
        h = build_model(spec_for(family, 15, param))
        assert pt_residual(h) == 0.0

    def test_one_ended_families_rejected(self):
        with pytest.raises(ValueError):
            pt_image(build_model(spec_for("cp", 8, 0.2)))


class TestApplyHamiltonian:
    def test_plane_wave_interior_eigenrelation(self):
        # uniform chain acts as -2J cos k on interior plane-wave sites
        N, k = 40, 0.9
        h = build_model(spec_for("cc", N, 1.0))  # kappa=1: uniform chain
        psi = np.exp(1j * k * np.arange(1, N + 1))
        out = apply_hamiltonian(h, psi)
        interior = slice(1, N - 1)
        assert np.allclose(out[interior], -2 * np.cos(k) * psi[interior], atol=1e-12)

    def test_zero_maps_to_zero(self):
        h = build_model(spec_for("cp", 10, 0.3 - 0.2j))
        assert np.all(apply_hamiltonian(h, np.zeros(10)) == 0)

    def test_matches_triple_loop_oracle(self):
        rng = np.random.default_rng(7)
        h = build_model(spec_for("h2", 12, 0.8 + 0.5j))
        psi = rng.normal(size=12) + 1j * rng.normal(size=12)
        out = apply_hamiltonian(h, psi)
        oracle = np.zeros(12, dtype=complex)
        for i in range(12):
            for j in range(12):
                oracle[i] += h.matrix[i, j] * psi[j]
        assert np.max(np.abs(out - oracle)) <= 1e-13

    def test_dimension_mismatch(self):
        h = build_model(spec_for("cp", 10, 0.1))
        with pytest.raises(ValueError):
            apply_hamiltonian(h, np.zeros(9))

    def test_agrees_with_eigensystem_reconstruction(self):
        h = build_model(spec_for("h1", 16, 0.3 + 0.4j))
        es = eigendecompose(h)
        rng = np.random.default_rng(3)
        psi = rng.normal(size=16) + 1j * rng.normal(size=16)
        direct = apply_hamiltonian(h, psi)
        recon = es.vectors @ (es.values * np.linalg.solve(es.vectors, psi))
        assert np.max(np.abs(direct - recon)) <= 1e-8


class TestSerialization:
    def test_round_trip(self):
        spec = spec_for("h1", 20, 0.4 - 0.4j)
        d = spec.to_json_dict()
        assert d == {"family": "h1", "theta": {"re": 0.4, "im": -0.4}, "J": 1.0, "N": 20}
        assert ModelSpec.from_json_dict(d) == spec

    def test_kappa_key(self):
        spec = spec_for("cc", 8, 1 + 1j, J=2.0)
        d = spec.to_json_dict()
        assert "kappa" in d and "theta" not in d
        assert ModelSpec.from_json_dict(d) == spec


@settings(max_examples=60, deadline=None)
@given(
    family=st.sampled_from(["cp", "cc", "h1", "h2"]),
    N=st.integers(min_value=4, max_value=40),
    re=st.floats(-3, 3, allow_nan=False),
    im=st.floats(-2, 2, allow_nan=False),
    J=st.floats(0.1, 5, allow_nan=False),
)
def test_structure_properties(family, N, re, im, J):
    spec = spec_for(family, N, complex(re, im), J=J)
    h = build_model(spec).matrix
    assert h.shape == (N, N)
    assert np.all(np.triu(h, 2) == 0) and np.all(np.tril(h, -2) == 0)
    # every bond not touched by the family's end element is -J
    sup = np.diag(h, 1)
    if family in ("cp", "h1"):
        assert np.all(sup == -J)
    else:
        assert np.all(sup[1:-1] == -J)
    if family in ("h1", "h2"):
        assert pt_residual(HamiltonianMatrix(matrix=h, spec=spec)) == 0.0
