import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from atomenv.errors import StateCorrupted
from atomenv.linalg import herm_eigvals, kron
from atomenv.measures import concurrence, correlation_record
from atomenv.model import (
    SWAP,
    GeometryConfig,
    InitialState,
    Liouvillian,
    build_liouvillian,
    collective_damping,
    coupling_coefficients,
    dipole_shift,
    initial_state,
    propagate,
    rk4_propagate,
    wavelengths_to_k0r,
)

from conftest import ket, random_density

PERP = math.pi / 2
BELL_PHI = InitialState.from_amp2("Phi", 0.5)


def operator_rhs(g: GeometryConfig):
    """Master-equation right-hand side written directly on 4x4 matrices."""
    sm = np.array([[0, 1], [0, 0]], dtype=complex)
    s = [np.kron(sm, np.eye(2)), np.kron(np.eye(2), sm)]
    sz = np.diag([1.0, -1.0]).astype(complex)
    hz = g.omega0 * (np.kron(sz, np.eye(2)) + np.kron(np.eye(2), sz))
    g12, o12 = collective_damping(g), dipole_shift(g)
    rates = [[1.0, g12], [g12, 1.0]]

    def rhs(_, y):
        rho = y.reshape(4, 4)
        out = -1j * (hz @ rho - rho @ hz)
        for i in range(2):
            for j in range(2):
                sp_i = s[i].conj().T
                if i != j:
                    h = o12 * sp_i @ s[j]
                    out += -1j * (h @ rho - rho @ h)
                a = sp_i @ s[j]
                out += -0.5 * rates[i][j] * (a @ rho + rho @ a - 2 * s[j] @ rho @ sp_i)
        return out.ravel()

    return rhs


def single_excitation_solution(amp: float, g: GeometryConfig, t: float) -> np.ndarray:
    """Closed form for a|01> + b|10>: symmetric and antisymmetric parts decay independently."""
    g12, o12 = collective_damping(g), dipole_shift(g)
    b = math.sqrt(1 - amp**2)
    cs = (amp + b) / math.sqrt(2) * np.exp(-(1 + g12) * t / 2 - 1j * o12 * t)
    ca = (amp - b) / math.sqrt(2) * np.exp(-(1 - g12) * t / 2 + 1j * o12 * t)
    c01 = (cs + ca) / math.sqrt(2)
    c10 = (cs - ca) / math.sqrt(2)
    v = np.array([0, c01, c10, 0])
    rho = np.outer(v, v.conj())
    rho[0, 0] = 1 - abs(c01) ** 2 - abs(c10) ** 2
    return rho


class TestGeometry:
    def test_rejects_zero_distance(self):
        with pytest.raises(ValueError):
            GeometryConfig(0.0)

    def test_rejects_angle_out_of_range(self):
        with pytest.raises(ValueError):
            GeometryConfig(1.0, dipole_angle=2.0)

    def test_wavelength_conversion(self):
        assert wavelengths_to_k0r(1.0) == pytest.approx(2 * math.pi)


class TestCoefficients:
    def test_damping_at_pi(self):
        assert collective_damping(GeometryConfig(math.pi, PERP)) == pytest.approx(-3 / (2 * math.pi**2), abs=1e-12)

    def test_damping_small_distance(self):
        assert abs(collective_damping(GeometryConfig(1e-4, PERP)) - 1.0) < 1e-6

    @pytest.mark.parametrize("angle", np.linspace(0, PERP, 7))
    def test_damping_limit_any_orientation(self, angle):
        assert abs(collective_damping(GeometryConfig(1e-3, angle)) - 1.0) < 1e-5

    def test_damping_far(self):
        assert abs(collective_damping(GeometryConfig(100.0, PERP))) < 0.02

    def test_shift_at_half_pi(self):
        assert dipole_shift(GeometryConfig(math.pi / 2, PERP)) == pytest.approx(3 / math.pi**2, abs=1e-12)

    def test_shift_near_field(self):
        x = 0.01
        assert dipole_shift(GeometryConfig(x, PERP)) == pytest.approx(0.75 / x**3, rel=0.01)

    def test_shift_far(self):
        assert abs(dipole_shift(GeometryConfig(1000.0, PERP))) < 1e-3

    @pytest.mark.parametrize("angle", [0.0, 0.6, PERP])
    def test_both_vanish_far(self, angle):
        c = coupling_coefficients(GeometryConfig(1e5, angle))
        assert abs(c.gamma12) < 1e-4 and abs(c.omega12) < 1e-4

    def test_damping_bounded(self):
        for angle in np.linspace(0, PERP, 9):
            for x in np.geomspace(1e-3, 1e3, 400):
                assert abs(collective_damping(GeometryConfig(x, angle))) <= 1 + 1e-9

    def test_literal_distance_damping_is_monotone(self):
        # on k0r in (0.5, 2) the collective damping has no turning point for
        # any orientation, so the two-atom decay there cannot be non-monotone
        xs = np.linspace(0.5, 2.0, 200)
        for angle in np.linspace(0, PERP, 9):
            vals = [collective_damping(GeometryConfig(x, angle)) for x in xs]
            assert np.all(np.diff(vals) < 0)


class TestLiouvillian:
    def test_trace_row_vanishes(self, rng):
        for _ in range(50):
            g = GeometryConfig(rng.uniform(0.05, 60), rng.uniform(0, PERP), 1.0, rng.uniform(0, 5))
            trace_row = np.eye(4).reshape(-1, order="F") @ build_liouvillian(g).matrix
            assert np.max(np.abs(trace_row)) < 1e-12

    def test_trace_preserved_on_random_states(self, rng):
        worst = 0.0
        for _ in range(1000):
            g = GeometryConfig(rng.uniform(0.1, 30), rng.uniform(0, PERP), 1.0, rng.uniform(0, 5))
            drho = build_liouvillian(g).apply(random_density(rng))
            worst = max(worst, abs(np.trace(drho)))
        assert worst < 1e-12

    def test_hermiticity_preserved(self, rng):
        for _ in range(100):
            g = GeometryConfig(rng.uniform(0.1, 30), rng.uniform(0, PERP), 1.0, rng.uniform(0, 5))
            drho = build_liouvillian(g).apply(random_density(rng))
            assert np.max(np.abs(drho - drho.conj().T)) < 1e-12

    def test_maximally_mixed_trace(self):
        drho = build_liouvillian(GeometryConfig(0.7)).apply(np.eye(4) / 4)
        assert abs(np.trace(drho)) < 1e-14

    @pytest.mark.parametrize("k0r", [0.2, 1.0, 4.4, 50.0])
    def test_vacuum_stationary(self, k0r):
        drho = build_liouvillian(GeometryConfig(k0r)).apply(ket(1, 0, 0, 0))
        assert np.max(np.abs(drho)) == 0.0

    @pytest.mark.parametrize("k0r", [0.3, 2.0, 7.0])
    def test_exchange_symmetry(self, k0r):
        swap_super = kron(SWAP, SWAP)
        m = build_liouvillian(GeometryConfig(k0r, 0.4, 1.0, 1.5)).matrix
        np.testing.assert_allclose(swap_super @ m @ swap_super, m, atol=1e-14)

    def test_matches_operator_form(self, rng):
        for _ in range(10):
            g = GeometryConfig(rng.uniform(0.3, 10), rng.uniform(0, PERP), 1.0, rng.uniform(0, 2))
            rho = random_density(rng)
            vec = build_liouvillian(g).apply(rho)
            np.testing.assert_allclose(vec, operator_rhs(g)(0, rho.ravel()).reshape(4, 4), atol=1e-13)

    def test_independent_atoms_amplitude_damping(self):
        # far apart the excited atom decays as exp(-gamma t)
        L = build_liouvillian(GeometryConfig(1e7))
        for t in (0.5, 1.0, 3.0):
            rho = propagate(ket(0, 0, 1, 0), L, t)
            assert rho[2, 2].real == pytest.approx(math.exp(-t), abs=1e-6)


class TestInitialState:
    def test_phi_bell(self):
        np.testing.assert_allclose(initial_state(BELL_PHI), ket(0, 1, 1, 0) / 2, atol=1e-15)

    def test_psi_endpoint(self):
        np.testing.assert_allclose(initial_state(InitialState("Psi", 1.0)), ket(1, 0, 0, 0))

    def test_phi_endpoint(self):
        np.testing.assert_allclose(initial_state(InitialState("Phi", 0.0)), ket(0, 0, 1, 0))

    @pytest.mark.parametrize("fam", ["Phi", "Psi"])
    @pytest.mark.parametrize("a2", [0.0, 0.3, 0.5, 1.0])
    def test_pure_unit_trace(self, fam, a2):
        rho = initial_state(InitialState.from_amp2(fam, a2))
        assert np.trace(rho).real == pytest.approx(1.0)
        assert np.allclose(rho @ rho, rho)

    def test_bad_family(self):
        with pytest.raises(ValueError):
            InitialState("Chi", 0.5)


class TestPropagation:
    def test_zero_time(self):
        rho0 = initial_state(BELL_PHI)
        L = build_liouvillian(GeometryConfig(1.0))
        assert np.array_equal(propagate(rho0, L, 0.0), rho0)
        assert np.array_equal(rk4_propagate(rho0, L, 0.0, 10), rho0)

    @pytest.mark.parametrize("t", [0.3, 2.0, 7.0])
    def test_vacuum_stays(self, t):
        rho = propagate(ket(1, 0, 0, 0), build_liouvillian(GeometryConfig(0.9)), t)
        np.testing.assert_allclose(rho, ket(1, 0, 0, 0), atol=1e-14)

    @pytest.mark.parametrize("k0r", [0.5, 1.885, 4.4, 50.0])
    @pytest.mark.parametrize("amp2", [0.2, 0.5, 0.9])
    def test_single_excitation_closed_form(self, k0r, amp2):
        g = GeometryConfig(k0r)
        L = build_liouvillian(g)
        rho0 = initial_state(InitialState.from_amp2("Phi", amp2))
        for t in (0.5, 1.0, 2.0):
            expected = single_excitation_solution(math.sqrt(amp2), g, t)
            np.testing.assert_allclose(propagate(rho0, L, t), expected, atol=1e-12)

    def test_symmetric_bell_concurrence_law(self):
        # symmetric Bell state: C(t) = exp(-(1 + gamma12) t) at any distance
        g = GeometryConfig(50.0)
        g12 = collective_damping(g)
        L = build_liouvillian(g)
        for t in (0.5, 1.0, 2.0):
            c = concurrence(propagate(initial_state(BELL_PHI), L, t))
            assert c == pytest.approx(math.exp(-(1 + g12) * t), abs=1e-12)

    def test_far_apart_concurrence(self):
        L = build_liouvillian(GeometryConfig(1e7))
        c = concurrence(propagate(initial_state(BELL_PHI), L, 1.0))
        assert c == pytest.approx(math.exp(-1), abs=1e-6)

    @pytest.mark.parametrize("fam", ["Phi", "Psi"])
    def test_against_ode_oracle(self, fam):
        g = GeometryConfig(2.3, 0.8, 1.0, 0.7)
        rho0 = initial_state(InitialState.from_amp2(fam, 0.35))
        sol = solve_ivp(
            operator_rhs(g), (0, 1.7), rho0.ravel(), method="DOP853", rtol=1e-12, atol=1e-13
        )
        ref = sol.y[:, -1].reshape(4, 4)
        np.testing.assert_allclose(propagate(rho0, build_liouvillian(g), 1.7), ref, atol=1e-10)

    def test_positivity_along_trajectories(self):
        for fam in ("Phi", "Psi"):
            for k0r in (1.0, 1.885, 4.4, 10.0):
                L = build_liouvillian(GeometryConfig(k0r))
                rho0 = initial_state(InitialState.from_amp2(fam, 0.5))
                for t in np.linspace(0, 5, 21):
                    rho = propagate(rho0, L, t)
                    assert herm_eigvals(rho)[-1] >= -1e-10
                    assert abs(np.trace(rho) - 1) < 1e-9

    def test_far_apart_product_stays_product(self):
        L = build_liouvillian(GeometryConfig(1e7))
        rho0 = initial_state(InitialState("Phi", 1.0))
        for t in np.linspace(0.25, 3, 5):
            rec = correlation_record(propagate(rho0, L, t), t, 1e7)
            assert max(rec.E_AB, rec.delta_AB, rec.I_AB, rec.C_AB) < 1e-6

    def test_corrupted_generator_detected(self):
        bad = Liouvillian(np.eye(16, dtype=complex), GeometryConfig(1.0))
        with pytest.raises(StateCorrupted):
            propagate(initial_state(BELL_PHI), bad, 1.0)
        with pytest.raises(StateCorrupted):
            rk4_propagate(initial_state(BELL_PHI), bad, 1.0, 20)


class TestRK4:
    def test_agrees_with_exponential(self):
        rho0 = initial_state(BELL_PHI)
        for u in (0.3, 0.7, 1.8, 3.0):
            L = build_liouvillian(GeometryConfig(float(wavelengths_to_k0r(u))))
            diff = rk4_propagate(rho0, L, 2.0, 4000) - propagate(rho0, L, 2.0)
            assert np.max(np.abs(diff)) < 1e-8

    def test_fourth_order(self):
        rho0 = initial_state(InitialState.from_amp2("Psi", 0.4))
        L = build_liouvillian(GeometryConfig(1.3, 0.5))
        exact = propagate(rho0, L, 2.0)
        errs = [np.max(np.abs(rk4_propagate(rho0, L, 2.0, n) - exact)) for n in (40, 80)]
        assert 14 < errs[0] / errs[1] < 18

    def test_needs_a_step(self):
        with pytest.raises(ValueError):
            rk4_propagate(np.eye(4) / 4, build_liouvillian(GeometryConfig(1.0)), 1.0, 0)


class TestDistanceAxis:
    """Entanglement at gamma t = 1 for the symmetric Bell state, perpendicular dipoles."""

    def _eof(self, k0r):
        from atomenv.measures import eof

        L = build_liouvillian(GeometryConfig(k0r))
        return eof(propagate(initial_state(BELL_PHI), L, 1.0))

    def test_literal_k0r_is_monotone(self):
        vals = [self._eof(x) for x in (0.7, 1.0, 1.8)]
        np.testing.assert_allclose(vals, [0.049746, 0.058270, 0.104952], atol=1e-5)

    def test_wavelength_axis_is_non_monotone(self):
        vals = [self._eof(float(wavelengths_to_k0r(u))) for u in (0.7, 1.0, 1.8)]
        np.testing.assert_allclose(vals, [0.368370, 0.206329, 0.265578], atol=1e-5)
        assert vals[1] < vals[0] and vals[1] < vals[2]
