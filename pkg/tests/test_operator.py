import numpy as np
import pytest

from diracnn.analytic import hydrogen_energy, hydrogen_series, hydrogen_wavefunction
from diracnn.mesh import build_uniform_mesh, inner_product
from diracnn.operator import (DiracSeaError, RadialSpinor, SingularShiftError,
                              assemble, factorize_shifted, reconstruct_G)
from diracnn.oracle import shift_invert_eigs
from diracnn.potentials import Potentials, UnitSystem, eval_potentials, CoulombSpec

from conftest import log_box_mesh


def test_block_layout_corner(hydrogen_small):
    op = hydrogen_small.operator
    assert op.H[0, 0] == hydrogen_small.potentials.U[0]
    n = hydrogen_small.mesh.n_interior
    # lower-right corner carries the rest-mass shift
    assert op.H[n, n] == hydrogen_small.potentials.W[0] - 2.0 * hydrogen_small.units.mc2


def test_kappa_zero_rejected(hydrogen_small):
    with pytest.raises(ValueError):
        assemble(hydrogen_small.potentials, hydrogen_small.mesh, 0,
                 hydrogen_small.units)


def test_uniform_mesh_symmetry():
    units = UnitSystem.nuclear()
    mesh = build_uniform_mesh(20.0, 60)
    zero = Potentials(U=np.zeros(mesh.n_interior), W=np.zeros(mesh.n_interior))
    op = assemble(zero, mesh, -1, units)
    assert np.max(np.abs(op.H - op.H.T)) == 0.0


def test_free_spectrum_has_mass_gap():
    units = UnitSystem.nuclear()
    mesh = build_uniform_mesh(20.0, 100)
    zero = Potentials(U=np.zeros(mesh.n_interior), W=np.zeros(mesh.n_interior))
    op = assemble(zero, mesh, -1, units)
    vals = np.sort(np.linalg.eigvalsh(op.H))
    gap = 2.0 * units.mc2
    # no eigenvalue strictly inside the gap between the sea and the continuum
    inside = vals[(vals > -gap + 1.0) & (vals < -1.0)]
    assert inside.size == 0
    # branches sit just outside the gap edges
    assert np.min(vals[vals > -units.mc2]) > 0.0
    assert np.max(vals[vals < -units.mc2]) < -gap


def test_production_mesh_ground_eigenvalue(hydrogen_paper_mesh):
    pair = shift_invert_eigs(hydrogen_paper_mesh.operator, -0.51, k=1)[0]
    assert pair.eps == pytest.approx(-0.500007, abs=5e-6)
    exact = hydrogen_energy(1, -1)
    assert abs(pair.eps - exact) / abs(exact) < 1e-5


class TestShiftedInverse:
    def test_roundtrip(self, hydrogen_small):
        op = hydrogen_small.operator
        fac = factorize_shifted(op, -0.51)
        rng = np.random.default_rng(5)
        v = rng.standard_normal(op.size)
        shifted_v = -0.51 * v - op.H @ v
        back = fac.apply(shifted_v)
        assert np.max(np.abs(back - v)) / np.max(np.abs(v)) < 1e-10

    def test_spectral_mapping(self, hydrogen_small, hydrogen_small_dense):
        vals, vecs = hydrogen_small_dense
        op = hydrogen_small.operator
        fac = factorize_shifted(op, -0.51)
        bound = np.where((vals > -0.9) & (vals < -0.05))[0]
        for idx in bound[:3]:
            eps, v = vals[idx], vecs[:, idx]
            mapped = fac.apply(v)
            expected = v / (-0.51 - eps)
            rel = np.linalg.norm(mapped - expected) / np.linalg.norm(expected)
            assert rel < 1e-8

    def test_quotient_at_exact_eigenvector(self, hydrogen_paper_mesh):
        # converged quotient equals 1/(eps' - eps); with the production mesh
        # the ground level gives about -100.07 inverse Hartree
        stack = hydrogen_paper_mesh
        pair = shift_invert_eigs(stack.operator, -0.51, k=1)[0]
        fac = stack.shifted(-0.51)
        w2 = stack.operator.weighted2()
        v = pair.vector
        quot = float(np.dot(w2, v * fac.apply(v)) / np.dot(w2, v * v))
        assert quot == pytest.approx(1.0 / (-0.51 - pair.eps), rel=1e-8)
        assert quot == pytest.approx(-100.0666, abs=0.2)

    def test_singular_shift_detected(self):
        spec = CoulombSpec()
        mesh = log_box_mesh(20.0, 24)
        pots = eval_potentials(spec, mesh)
        op = assemble(pots, mesh, -1, spec.units())
        vals = np.linalg.eigvals(op.H).real
        target = vals[np.argmin(np.abs(vals + 0.5))]
        with pytest.raises(SingularShiftError):
            factorize_shifted(op, float(target))


class TestReconstructG:
    def test_zero_in_zero_out(self, hydrogen_small):
        st = hydrogen_small
        F = np.zeros(st.mesh.n_interior)
        G = reconstruct_G(F, -0.5, st.potentials, st.mesh, -1, st.units)
        assert np.array_equal(G, np.zeros_like(G))

    def test_denominator_scale_at_large_r(self, hydrogen_small):
        st = hydrogen_small
        from diracnn.operator import g_denominator
        denom = g_denominator(hydrogen_energy(1, -1), st.potentials, st.units)
        assert denom[-1] == pytest.approx(2.0 * 137.035999 ** 2, rel=1e-2)
        assert denom[-1] == pytest.approx(3.756e4, rel=1e-3)

    def test_matches_analytic_small_component(self, hydrogen_paper_mesh):
        st = hydrogen_paper_mesh
        exact = hydrogen_wavefunction(1, -1, 1.0, 137.035999, st.mesh)
        eps = hydrogen_energy(1, -1)
        G = reconstruct_G(exact.F, eps, st.potentials, st.mesh, -1, st.units)
        assert np.max(np.abs(G - exact.G)) < 1e-4

    def test_dirac_sea_energy_rejected(self, hydrogen_small):
        st = hydrogen_small
        F = np.ones(st.mesh.n_interior)
        bad = -3.0 * st.units.mc2
        with pytest.raises(DiracSeaError):
            reconstruct_G(F, bad, st.potentials, st.mesh, -1, st.units)


def test_spinor_contract():
    with pytest.raises(ValueError):
        RadialSpinor(F=np.ones(4), G=np.ones(5))
    with pytest.raises(ValueError):
        RadialSpinor(F=np.array([1.0, np.inf]), G=np.ones(2))
    sp = RadialSpinor(F=np.array([1.0, 2.0]), G=np.array([3.0, 4.0]))
    assert np.array_equal(sp.stacked(), [1.0, 2.0, 3.0, 4.0])
    back = RadialSpinor.from_stacked(sp.stacked())
    assert np.array_equal(back.F, sp.F) and np.array_equal(back.G, sp.G)


def test_normalization_flag(hydrogen_small):
    mesh = hydrogen_small.mesh
    rng = np.random.default_rng(0)
    sp = RadialSpinor(F=rng.standard_normal(mesh.n_interior),
                      G=rng.standard_normal(mesh.n_interior))
    normed = sp.normalized(mesh)
    assert inner_product(normed, normed, mesh) == pytest.approx(1.0, abs=1e-10)
