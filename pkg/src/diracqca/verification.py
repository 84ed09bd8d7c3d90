"""Randomized invariant sweeps: the property checks behind `diracqca verify`.

Each check draws its own samples from a seeded generator, reports the worst
residual against its tolerance, and never depends on the code path it is
checking (finite differences, direct compositions, and the two independent
evolution routes serve as oracles).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import engine
from .engine import LatticeState
from .kinematics import (
    Boost,
    MassParam,
    deformed_boost,
    delinearize,
    dispersion,
    invariant_measure,
    linearize,
    linearize_jacobian,
    region_of,
    standard_boost,
    velocity_composition,
)
from .wavepackets import GaussianPacket, make_packet


@dataclass(frozen=True)
class CheckResult:
    name: str
    max_residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_residual < self.tolerance


def _scaled(count: int, scale: float) -> int:
    return max(16, int(count * scale))


def check_dispersion_invariance(rng, scale=1.0, tolerance=1e-12) -> CheckResult:
    """Boosted points satisfy cos^2 w' = (1 - m^2) cos^2 k' (acceptance 1)."""
    n = _scaled(100_000, scale)
    k = rng.uniform(-np.pi, np.pi, n)
    m = rng.uniform(0.0, 1.0, n)
    beta = rng.uniform(-0.999, 0.999, n)
    mass = MassParam(m)
    boosted = deformed_boost(dispersion(k, mass), Boost(beta), mass)
    resid = np.abs(np.cos(boosted.omega) ** 2 - (1.0 - m**2) * np.cos(boosted.k) ** 2)
    return CheckResult("dispersion_invariance", float(resid.max()), tolerance)


def check_boost_oracle_equivalence(rng, scale=1.0, tolerance=1e-12) -> CheckResult:
    """Closed-form boost equals the linearize/boost/delinearize composition
    (acceptance 2; sampled away from the singular points, where the
    composition's arcsin step is conditioned well enough to compare at
    1e-12)."""
    n = _scaled(110_000, scale)
    k = rng.uniform(-np.pi / 2 + 0.1, np.pi / 2 - 0.1, n)
    m = rng.uniform(0.05, 0.95, n)
    beta = rng.uniform(-0.9, 0.9, n)
    mass = MassParam(m)
    pts = dispersion(k, mass)
    closed = deformed_boost(pts, Boost(beta), mass)
    ep = linearize(pts)
    omega2, k2 = delinearize(standard_boost((ep.E, ep.p), Boost(beta)), pts.region)
    keep = np.abs(np.abs(closed.k) - np.pi / 2) > 0.05
    resid = np.maximum(
        np.abs(closed.k - k2)[keep], np.abs(closed.omega - omega2)[keep]
    )
    return CheckResult("boost_oracle_equivalence", float(resid.max()), tolerance)


def check_fixed_points(rng, scale=1.0, tolerance=1e-15) -> CheckResult:
    """k = +-pi/2 invariant under every boost; invariant energy pi/2
    (acceptance 3)."""
    n = _scaled(1000, scale)
    m = rng.uniform(0.0, 1.0, n)
    beta = rng.uniform(-0.999, 0.999, n)
    worst = 0.0
    for sign in (1.0, -1.0):
        k = np.full(n, sign * np.pi / 2)
        mass = MassParam(m)
        pt = dispersion(k, mass)
        out = deformed_boost(pt, Boost(beta), mass)
        worst = max(
            worst,
            float(np.max(np.abs(out.k - k))),
            float(np.max(np.abs(out.omega - pt.omega))),
            float(np.max(np.abs(pt.omega - np.pi / 2))),
        )
    return CheckResult("fixed_points", worst, tolerance)


def check_lorentz_limit(rng, scale=1.0, tolerance=1e-6) -> CheckResult:
    """Deformed and standard boosts agree for small k and m (acceptance 4)."""
    n = _scaled(2000, scale)
    k = rng.uniform(-1e-3, 1e-3, n)
    m = rng.uniform(0.0, 1e-3, n)
    beta = rng.uniform(-0.9, 0.9, n)
    mass = MassParam(m)
    pts = dispersion(k, mass)
    deformed = deformed_boost(pts, Boost(beta), mass)
    omega_s, k_s = standard_boost((pts.omega, pts.k), Boost(beta))
    worst = max(
        float(np.max(np.abs(deformed.omega - omega_s))),
        float(np.max(np.abs(deformed.k - k_s))),
        float(np.max(np.abs(linearize_jacobian(0.0, 0.0) - np.eye(2)))) * 1e4,
    )
    return CheckResult("lorentz_limit", worst, tolerance)


def check_group_law(rng, scale=1.0, tolerance=1e-10) -> CheckResult:
    """Two boosts compose into the velocity-added boost (acceptance 5)."""
    n = _scaled(10_000, scale)
    k = rng.uniform(-np.pi, np.pi, n)
    keep = np.abs(np.abs(k) - np.pi / 2) > 1e-6
    k = k[keep]
    m = rng.uniform(0.0, 1.0, k.size)
    b1 = rng.uniform(-0.95, 0.95, k.size)
    b2 = rng.uniform(-0.95, 0.95, k.size)
    mass = MassParam(m)
    pts = dispersion(k, mass)
    two = deformed_boost(deformed_boost(pts, Boost(b1), mass), Boost(b2), mass)
    one = deformed_boost(pts, velocity_composition(Boost(b1), Boost(b2)), mass)
    resid = np.maximum(np.abs(two.k - one.k), np.abs(two.omega - one.omega))
    return CheckResult("group_law", float(resid.max()), tolerance)


def check_boost_inverse(rng, scale=1.0, tolerance=1e-10) -> CheckResult:
    """Boosting by beta then -beta is the identity."""
    n = _scaled(10_000, scale)
    k = rng.uniform(-np.pi, np.pi, n)
    keep = np.abs(np.abs(k) - np.pi / 2) > 1e-6
    k = k[keep]
    m = rng.uniform(0.0, 1.0, k.size)
    beta = rng.uniform(-0.95, 0.95, k.size)
    mass = MassParam(m)
    pts = dispersion(k, mass)
    back = deformed_boost(deformed_boost(pts, Boost(beta), mass), Boost(-beta), mass)
    resid = np.maximum(np.abs(back.k - pts.k), np.abs(back.omega - pts.omega))
    return CheckResult("boost_inverse", float(resid.max()), tolerance)


def check_measure_invariance(rng, scale=1.0, tolerance=1e-8) -> CheckResult:
    """mu(k)/mu(k') equals the boost Jacobian |dk'/dk| (acceptance 6)."""
    n = _scaled(10_000, scale)
    k = rng.uniform(-np.pi / 2 + 0.05, np.pi / 2 - 0.05, n)
    m = rng.uniform(0.05, 0.95, n)
    beta = rng.uniform(-0.9, 0.9, n)
    mass = MassParam(m)
    step = 1e-6
    k_img = deformed_boost(dispersion(k, mass), Boost(beta), mass).k
    k_plus = deformed_boost(dispersion(k + step, mass), Boost(beta), mass).k
    k_minus = deformed_boost(dispersion(k - step, mass), Boost(beta), mass).k
    jacobian = np.abs((k_plus - k_minus) / (2.0 * step))
    ratio = invariant_measure(k, mass) / invariant_measure(k_img, mass)
    return CheckResult("measure_invariance", float(np.max(np.abs(ratio - jacobian))), tolerance)


def _random_state(rng, n_cells) -> LatticeState:
    psi = rng.normal(size=(2, n_cells)) + 1j * rng.normal(size=(2, n_cells))
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2))
    return LatticeState(psi[0], psi[1])


def check_evolution_equivalence(rng, scale=1.0, tolerance=1e-10) -> CheckResult:
    """Direct stepping equals spectral evolution; norms drift < 1e-12/step
    (acceptance 7)."""
    steps = 100
    worst = 0.0
    for _ in range(max(2, int(10 * scale))):
        mass = MassParam(rng.uniform(0.05, 0.95))
        state = _random_state(rng, 256)
        direct = engine.evolve_direct(state, mass, steps)
        spectral = engine.evolve_spectral(state, mass, steps)
        worst = max(
            worst,
            float(np.max(np.abs(direct.psi_r - spectral.psi_r))),
            float(np.max(np.abs(direct.psi_l - spectral.psi_l))),
            abs(direct.norm() - 1.0) / steps * 1e2,
            abs(spectral.norm() - 1.0) / steps * 1e2,
        )
    return CheckResult("evolution_equivalence", worst, tolerance)


def check_eigensystem(rng, scale=1.0, tolerance=1e-12) -> CheckResult:
    """Mode matrices are unitary and their eigenphases match the dispersion."""
    worst = 0.0
    for _ in range(max(16, int(1000 * scale))):
        k = rng.uniform(-np.pi, np.pi)
        mass = MassParam(rng.uniform(0.0, 1.0))
        es = engine.eigensystem(k, mass)
        unitarity = np.max(np.abs(es.matrix @ es.matrix.conj().T - np.eye(2)))
        phase = abs(es.omega - dispersion(k, mass).omega)
        res_plus = np.max(np.abs(es.matrix @ es.vec_plus - np.exp(1j * es.omega) * es.vec_plus))
        res_minus = np.max(np.abs(es.matrix @ es.vec_minus - np.exp(-1j * es.omega) * es.vec_minus))
        worst = max(worst, float(unitarity) * 1e2, float(phase), float(res_plus), float(res_minus))
    return CheckResult("eigensystem", worst, tolerance)


def check_projection_completeness(rng, scale=1.0, tolerance=1e-12) -> CheckResult:
    """Positive + negative branch weights exhaust the norm; embed/project
    round-trips on the positive subspace."""
    worst = 0.0
    for _ in range(max(4, int(20 * scale))):
        mass = MassParam(rng.uniform(0.05, 0.95))
        state = _random_state(rng, 128)
        proj = engine.project_positive_branch(state, mass)
        worst = max(worst, abs(proj.positive_weight + proj.negative_weight - 1.0))
        back = engine.project_positive_branch(
            engine.embed_positive_branch(proj.amplitude, mass), mass
        )
        worst = max(worst, float(np.max(np.abs(back.amplitude.values - proj.amplitude.values))))
    return CheckResult("projection_completeness", worst, tolerance)


def check_boost_unitarity(rng, scale=1.0, tolerance=1e-8) -> CheckResult:
    """State boosts preserve the invariant-measure norm (acceptance 9)."""
    mass = MassParam(0.1)
    worst = 0.0
    for _ in range(max(2, int(6 * scale))):
        k0 = rng.uniform(-0.4, 0.4)
        x0 = rng.uniform(1500, 2500)
        amp = make_packet(GaussianPacket(k0=k0, sigma_k=0.02, x0=x0, mass=mass), 4096)
        boosted = engine.boost_state(amp, Boost(-0.99), mass)
        worst = max(worst, abs(engine.amplitude_norm(boosted, mass) - 1.0))
    return CheckResult("boost_unitarity", worst, tolerance)


ALL_CHECKS = (
    check_dispersion_invariance,
    check_boost_oracle_equivalence,
    check_fixed_points,
    check_lorentz_limit,
    check_group_law,
    check_boost_inverse,
    check_measure_invariance,
    check_evolution_equivalence,
    check_eigensystem,
    check_projection_completeness,
    check_boost_unitarity,
)


def run_property_suite(seed: int, scale: float = 1.0, tolerances: dict | None = None):
    """Run every sweep with a fixed seed; returns the list of CheckResults."""
    tolerances = tolerances or {}
    results = []
    for check in ALL_CHECKS:
        rng = np.random.default_rng(seed)
        name = check.__name__.removeprefix("check_")
        if name in tolerances:
            results.append(check(rng, scale=scale, tolerance=tolerances[name]))
        else:
            results.append(check(rng, scale=scale))
    return results
