import numpy as np
import pytest

from diracqca import _steppy, engine
from diracqca.engine import (
    LatticeState,
    SpectralAmplitude,
    TrigInterpolant,
    amplitude_norm,
    boost_state,
    brillouin_grid,
    eigensystem,
    embed_positive_branch,
    evolve_amplitude,
    evolve_direct,
    evolve_spectral,
    localized_state,
    mode_unitary_matrix,
    normalized,
    position_density,
    project_positive_branch,
    read_spectral_csv,
    read_state_csv,
    step_direct,
    write_spectral_csv,
    write_state_csv,
)
from diracqca.errors import FixedPointSupportWarning, ValidationError
from diracqca.kinematics import Boost, MassParam, dispersion, velocity_composition


def random_state(n_cells, seed=0):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=(2, n_cells)) + 1j * rng.normal(size=(2, n_cells))
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2))
    return LatticeState(psi[0], psi[1])


def gaussian_amp(n_cells, mass, k0=0.0, sigma=0.02, x0=None):
    grid = brillouin_grid(n_cells)
    x0 = n_cells / 2 if x0 is None else x0
    values = np.exp(-((grid - k0) ** 2) / (4 * sigma**2)) * np.exp(-1j * grid * x0)
    return normalized(SpectralAmplitude(grid, values), mass)


class TestStepDirect:
    def test_massless_pure_translation(self):
        state = random_state(64, 1)
        out = step_direct(state, MassParam(0.0))
        assert np.array_equal(out.psi_r, np.roll(state.psi_r, -1))
        assert np.array_equal(out.psi_l, np.roll(state.psi_l, 1))

    def test_flat_band_pure_swap(self):
        state = random_state(64, 2)
        out = step_direct(state, MassParam(1.0))
        assert np.allclose(out.psi_r, -1j * state.psi_l, atol=1e-15)
        assert np.allclose(out.psi_l, -1j * state.psi_r, atol=1e-15)

    def test_norm_preserved_per_step(self):
        state = random_state(128, 3)
        for _ in range(10):
            state = step_direct(state, MassParam(0.4))
        assert abs(state.norm() - 1.0) < 1e-13

    def test_matches_mode_unitary(self):
        # one real-space step == multiplication by U(k) in momentum space
        state = random_state(128, 4)
        mass = MassParam(0.3)
        stepped = engine._to_momentum(step_direct(state, mass))
        modes = engine._to_momentum(state)
        matrices = mode_unitary_matrix(brillouin_grid(128), mass)
        expected = np.einsum("kij,jk->ik", matrices, modes)
        assert np.max(np.abs(stepped - expected)) < 1e-14

    def test_translation_covariance(self):
        state = random_state(64, 5)
        mass = MassParam(0.6)
        rolled = LatticeState(np.roll(state.psi_r, 7), np.roll(state.psi_l, 7))
        a = step_direct(rolled, mass)
        b = step_direct(state, mass)
        assert np.max(np.abs(a.psi_r - np.roll(b.psi_r, 7))) < 1e-14
        assert np.max(np.abs(a.psi_l - np.roll(b.psi_l, 7))) < 1e-14

    def test_kernels_agree(self):
        state = random_state(96, 6)
        mass = MassParam(0.25)
        r_py, l_py = _steppy.evolve_direct(state.psi_r, state.psi_l, mass.n, mass.m, 37)
        out = evolve_direct(state, mass, 37)
        assert np.max(np.abs(out.psi_r - r_py)) < 1e-13
        assert np.max(np.abs(out.psi_l - l_py)) < 1e-13


class TestEvolveSpectral:
    def test_zero_steps_identity(self):
        state = random_state(64, 7)
        out = evolve_spectral(state, MassParam(0.3), 0)
        assert np.max(np.abs(out.psi_r - state.psi_r)) < 1e-14

    def test_matches_direct_stepping(self):
        state = random_state(256, 8)
        mass = MassParam(0.3)
        direct = evolve_direct(state, mass, 100)
        spectral = evolve_spectral(state, mass, 100)
        assert np.max(np.abs(direct.psi_r - spectral.psi_r)) < 1e-10
        assert np.max(np.abs(direct.psi_l - spectral.psi_l)) < 1e-10

    def test_single_mode_phases(self):
        n_cells = 128
        mass = MassParam(0.45)
        j = 37
        k = brillouin_grid(n_cells)[j]
        mode = eigensystem(k, mass)
        for vec, sign in ((mode.vec_plus, +1), (mode.vec_minus, -1)):
            psi_hat = np.zeros((2, n_cells), dtype=complex)
            psi_hat[:, j] = vec
            state = engine._from_momentum(psi_hat)
            out = engine._to_momentum(evolve_spectral(state, mass, 11))
            expected = np.exp(sign * 1j * mode.omega * 11) * vec
            assert np.max(np.abs(out[:, j] - expected)) < 1e-13

    def test_long_time_unitarity(self):
        state = random_state(256, 9)
        mass = MassParam(0.2)
        out = evolve_spectral(state, mass, 10_000)
        assert abs(out.norm() - 1.0) < 1e-12
        out = evolve_direct(state, mass, 10_000)
        assert abs(out.norm() - 1.0) < 1e-12

    def test_negative_steps_rejected(self):
        with pytest.raises(ValidationError):
            evolve_spectral(random_state(16), MassParam(0.1), -1)


class TestEigensystem:
    def test_flat_band_matrix(self):
        mode = eigensystem(0.0, MassParam(1.0))
        assert np.allclose(mode.matrix, np.array([[0, -1j], [-1j, 0]]), atol=1e-15)
        assert mode.eigenphases == (pytest.approx(np.pi / 2), pytest.approx(-np.pi / 2))

    def test_unitarity_sweep(self):
        rng = np.random.default_rng(10)
        for _ in range(1000):
            mode = eigensystem(rng.uniform(-np.pi, np.pi), MassParam(rng.uniform(0, 1)))
            resid = np.max(np.abs(mode.matrix @ mode.matrix.conj().T - np.eye(2)))
            assert resid < 1e-14

    def test_eigenphase_matches_dispersion(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            k = rng.uniform(-np.pi, np.pi)
            mass = MassParam(rng.uniform(0, 1))
            assert eigensystem(k, mass).omega == pytest.approx(
                dispersion(k, mass).omega, abs=1e-12
            )

    def test_eigenvector_residuals(self):
        rng = np.random.default_rng(12)
        for _ in range(300):
            k = rng.uniform(-np.pi, np.pi)
            mode = eigensystem(k, MassParam(rng.uniform(0, 1)))
            for vec, phase in ((mode.vec_plus, mode.omega), (mode.vec_minus, -mode.omega)):
                resid = np.max(np.abs(mode.matrix @ vec - np.exp(1j * phase) * vec))
                assert resid < 1e-13

    def test_degenerate_massless_origin(self):
        mode = eigensystem(0.0, MassParam(0.0))
        assert np.array_equal(mode.vec_plus, [1, 0])
        assert np.array_equal(mode.vec_minus, [0, 1])


class TestLocalizedState:
    def test_delta_peak(self):
        state = localized_state(5, (1, 0), 32)
        density = position_density(state)
        assert density[5] == pytest.approx(1.0)
        assert np.count_nonzero(density) == 1
        assert state.norm() == pytest.approx(1.0)

    def test_phase_invariance_of_density(self):
        state = localized_state(5, (1, 0), 32)
        rotated = LatticeState(state.psi_r * np.exp(0.7j), state.psi_l * np.exp(0.7j))
        assert np.allclose(position_density(state), position_density(rotated))

    def test_validation(self):
        with pytest.raises(ValidationError):
            localized_state(40, (1, 0), 32)
        with pytest.raises(ValidationError):
            localized_state(0, (1, 1), 32)


class TestProjection:
    def test_pure_positive_state_keeps_everything(self):
        n_cells = 64
        mass = MassParam(0.3)
        grid = brillouin_grid(n_cells)
        rng = np.random.default_rng(13)
        coeff = rng.normal(size=n_cells) + 1j * rng.normal(size=n_cells)
        coeff /= np.linalg.norm(coeff)
        _, vm = engine._branch_vectors(grid, mass)
        state = engine._from_momentum(coeff * vm)
        proj = project_positive_branch(state, mass)
        assert proj.negative_weight == pytest.approx(0.0, abs=1e-13)
        assert proj.positive_weight == pytest.approx(1.0, abs=1e-13)

    def test_localized_completeness(self):
        proj = project_positive_branch(localized_state(0, (1, 0), 128), MassParam(0.1))
        total = proj.positive_weight + proj.negative_weight
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_embed_project_roundtrip(self):
        mass = MassParam(0.35)
        state = random_state(128, 14)
        proj = project_positive_branch(state, mass)
        again = project_positive_branch(embed_positive_branch(proj.amplitude, mass), mass)
        assert np.max(np.abs(again.amplitude.values - proj.amplitude.values)) < 1e-12
        assert again.negative_weight == pytest.approx(0.0, abs=1e-13)

    def test_quadrature_norm_equals_branch_weight(self):
        mass = MassParam(0.2)
        state = random_state(256, 15)
        proj = project_positive_branch(state, mass)
        assert amplitude_norm(proj.amplitude, mass) ** 2 == pytest.approx(
            proj.positive_weight - proj.excluded_weight, abs=1e-12
        )


class TestInterpolant:
    def test_exact_at_nodes(self):
        rng = np.random.default_rng(16)
        values = rng.normal(size=64) + 1j * rng.normal(size=64)
        interp = TrigInterpolant(values)
        grid = brillouin_grid(64)
        assert np.max(np.abs(interp(grid) - values)) < 1e-13

    def test_matches_direct_polynomial(self):
        rng = np.random.default_rng(17)
        values = rng.normal(size=128) + 1j * rng.normal(size=128)
        interp = TrigInterpolant(values)
        queries = rng.uniform(-np.pi, np.pi, 100)
        assert np.max(np.abs(interp(queries) - interp.exact(queries))) < 1e-11

    def test_periodicity(self):
        rng = np.random.default_rng(18)
        values = rng.normal(size=64) + 1j * rng.normal(size=64)
        interp = TrigInterpolant(values)
        queries = rng.uniform(-1, 1, 20)
        assert np.max(np.abs(interp(queries) - interp(queries + 2 * np.pi))) < 1e-12

    def test_reproduces_band_limited_function(self):
        n_cells = 256
        grid = brillouin_grid(n_cells)
        x0 = 130.0
        func = lambda k: np.exp(-((k - 0.4) ** 2) / (4 * 0.05**2)) * np.exp(-1j * k * x0)
        interp = TrigInterpolant(func(grid))
        rng = np.random.default_rng(19)
        queries = rng.uniform(-1.0, 1.5, 200)
        assert np.max(np.abs(interp(queries) - func(queries))) < 1e-10


class TestBoostState:
    def test_identity(self):
        mass = MassParam(0.1)
        amp = gaussian_amp(512, mass, k0=0.3)
        out = boost_state(amp, Boost(0.0), mass)
        assert np.max(np.abs(out.values - amp.values)) < 1e-12

    def test_norm_preserved_extreme_boost(self):
        mass = MassParam(0.1)
        amp = gaussian_amp(4096, mass, k0=0.0)
        out = boost_state(amp, Boost(-0.99), mass)
        assert abs(amplitude_norm(out, mass) - 1.0) < 1e-8

    def test_composition_on_states(self):
        mass = MassParam(0.15)
        amp = gaussian_amp(2048, mass, k0=0.2)
        b1, b2 = Boost(0.4), Boost(-0.3)
        two = boost_state(boost_state(amp, b1, mass), b2, mass)
        one = boost_state(amp, velocity_composition(b1, b2), mass)
        dk = 2 * np.pi / 2048
        mu = engine._measure_on_grid(amp.grid, mass)
        ok = np.isfinite(mu)
        l2 = np.sqrt(np.sum(dk * mu[ok] * np.abs(two.values - one.values)[ok] ** 2))
        assert l2 < 1e-6

    def test_localized_support_warning(self):
        mass = MassParam(0.1)
        proj = project_positive_branch(localized_state(64, (1, 0), 128), mass)
        amp = normalized(proj.amplitude, mass)
        with pytest.warns(FixedPointSupportWarning):
            boost_state(amp, Boost(-0.9), mass)

    def test_boosted_localized_is_delocalized(self):
        # a point-localized state spreads into an asymmetric profile
        mass = MassParam(0.1)
        n_cells = 1024
        proj = project_positive_branch(localized_state(n_cells // 2, (1, 0), n_cells), mass)
        amp = normalized(proj.amplitude, mass)
        lab = position_density(embed_positive_branch(amp, mass))
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", FixedPointSupportWarning)
            out = boost_state(amp, Boost(-0.99), mass)
        boosted = position_density(embed_positive_branch(normalized(out, mass), mass))
        assert boosted.max() < 0.1 * lab.max()
        left = boosted[: n_cells // 2].sum()
        right = boosted[n_cells // 2 :].sum()
        assert abs(left - right) > 0.2  # asymmetric spread

    def test_positive_branch_moves_forward(self):
        # the projected branch transports at +dw/dk: peak displacement > 0
        mass = MassParam(0.1)
        amp = gaussian_amp(1024, mass, k0=0.4, x0=400.0)
        now = position_density(embed_positive_branch(amp, mass))
        later = position_density(
            embed_positive_branch(evolve_amplitude(amp, mass, 200), mass)
        )
        assert np.argmax(later) > np.argmax(now) + 100


class TestSerialization:
    def test_state_roundtrip(self, tmp_path):
        state = random_state(32, 20)
        path = tmp_path / "state.csv"
        write_state_csv(state, path)
        back = read_state_csv(path)
        assert np.array_equal(back.psi_r, state.psi_r)
        assert np.array_equal(back.psi_l, state.psi_l)
        header = path.read_text().splitlines()[0]
        assert header == "x,re_psi_r,im_psi_r,re_psi_l,im_psi_l"

    def test_spectral_roundtrip(self, tmp_path):
        mass = MassParam(0.3)
        amp = gaussian_amp(64, mass, k0=0.5, x0=20.0)
        path = tmp_path / "amp.csv"
        write_spectral_csv(amp, mass, path)
        back = read_spectral_csv(path)
        assert np.array_equal(back.grid, amp.grid)
        assert np.array_equal(back.values, amp.values)
        assert path.read_text().splitlines()[0] == "k,re_g,im_g,mu"

    def test_header_validation(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValidationError):
            read_state_csv(path)
