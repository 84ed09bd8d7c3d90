"""Closed-form kinematics of the one-dimensional Dirac automaton.

Dispersion relation, group velocity, the nonlinear change of variables that
makes boosts act linearly, the deformed boosts themselves, Brillouin-zone
region bookkeeping, and the boost-invariant spectral measure.

All functions are pure and accept scalars or numpy arrays (broadcasting);
scalar inputs give scalar outputs. Wave-vectors live on the Brillouin zone
B = [-pi, pi] with the two boost-invariant regions

    B1 = [-pi/2, pi/2],    B2 = [-pi, -pi/2) u (pi/2, pi],

separated by the invariant points k = +-pi/2.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import OutOfRangeError, SingularPointError, DivergentMeasureError

HALF_PI = np.pi / 2.0

# Inputs closer than this to |k| = pi/2 are treated as the invariant point:
# the gamma/arctan amplification makes the closed form meaningless nearer in.
FIXED_POINT_WINDOW = 1e-9

# Tolerance for declaring the change of variables singular (cos k = 0).
_SINGULAR_TOL = 1e-12

# Slack allowed on |E cos k| before delinearization refuses to invert.
_RANGE_SLACK = 1e-12


class Region(enum.IntEnum):
    """Boost-invariant halves of the Brillouin zone."""

    B1 = 1
    B2 = 2


def _scalar(x):
    return x.item() if np.ndim(x) == 0 else x


def region_of(k):
    """Region tag for wave-vector(s) k; the boundary points +-pi/2 are B1."""
    k = np.asarray(k, dtype=float)
    if k.ndim == 0:
        return Region.B1 if abs(k.item()) <= HALF_PI else Region.B2
    return np.where(np.abs(k) <= HALF_PI, int(Region.B1), int(Region.B2))


@dataclass(frozen=True)
class MassParam:
    """Automaton mass in Planck units, 0 <= m <= 1.

    The companion coupling n = sqrt(1 - m^2) fixes all kinematics: m = 0 is
    the massless automaton (omega = |k|), m = 1 the flat band (omega = pi/2).
    """

    m: float

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        if np.any(m < 0.0) or np.any(m > 1.0):
            raise ValueError(f"mass must lie in [0, 1], got {self.m!r}")

    @property
    def n(self):
        return _scalar(np.sqrt(1.0 - np.square(np.asarray(self.m, dtype=float))))


@dataclass(frozen=True)
class Boost:
    """A boost velocity beta in (-1, 1); gamma is derived, never stored."""

    beta: float

    def __post_init__(self):
        b = np.asarray(self.beta, dtype=float)
        if np.any(np.abs(b) >= 1.0):
            raise ValueError(f"boost velocity must satisfy |beta| < 1, got {self.beta!r}")

    @property
    def gamma(self):
        return _scalar(1.0 / np.sqrt(1.0 - np.square(np.asarray(self.beta, dtype=float))))

    def inverse(self) -> "Boost":
        return Boost(_scalar(-np.asarray(self.beta, dtype=float)))


@dataclass(frozen=True)
class OnShellPoint:
    """A frequency/wave-vector pair on the mass shell, with its region tag."""

    omega: float
    k: float
    region: Region


@dataclass(frozen=True)
class PseudoEnergyMomentum:
    """Image of an on-shell point under the linearizing change of variables.

    For on-shell points E^2 - p^2 = m^2: the automaton shell is carried onto
    the ordinary relativistic hyperbola, which is why boosts act linearly
    on (E, p).
    """

    E: float
    p: float


def dispersion(k, mass: MassParam) -> OnShellPoint:
    """On-shell frequency for wave-vector k.

    Returns omega = arccos(n cos k) on the principal branch [0, pi], which is
    continuous across both regions and satisfies cos^2(omega) = n^2 cos^2(k).
    """
    karr = np.asarray(k, dtype=float)
    omega = np.arccos(mass.n * np.cos(karr))
    return OnShellPoint(_scalar(omega), _scalar(karr), region_of(k))


def group_velocity(k, mass: MassParam):
    """d(omega)/dk of the dispersion branch.

    v = n sin k / sin omega. For m = 0 the removable singularities at
    k in {0, +-pi} are filled by the convention v = sign(k) (0 at k = 0).
    """
    karr = np.asarray(k, dtype=float)
    marr = np.asarray(mass.m, dtype=float)
    n = np.asarray(mass.n, dtype=float)
    sin_om = np.sqrt(1.0 - np.square(n * np.cos(karr)))
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(sin_om > 0.0, n * np.sin(karr) / np.where(sin_om > 0.0, sin_om, 1.0), 0.0)
    v = np.where(marr == 0.0, np.sign(karr), v)
    return _scalar(v)


def _point_coords(point, k=None):
    if isinstance(point, OnShellPoint):
        return np.asarray(point.omega, dtype=float), np.asarray(point.k, dtype=float)
    if k is None:
        omega, k = point
    else:
        omega = point
    return np.asarray(omega, dtype=float), np.asarray(k, dtype=float)


def linearize(point, k=None) -> PseudoEnergyMomentum:
    """Map (omega, k) to the pseudo energy-momentum pair (sin omega / cos k, tan k).

    Accepts an OnShellPoint or a raw pair; total except at the invariant
    points k = +-pi/2 where cos k = 0 (the singularity that produces the
    invariant energy scale).
    """
    omega, karr = _point_coords(point, k)
    if np.any(np.abs(np.abs(karr) - HALF_PI) < _SINGULAR_TOL):
        raise SingularPointError("the change of variables is singular at k = +-pi/2")
    cos_k = np.cos(karr)
    return PseudoEnergyMomentum(_scalar(np.sin(omega) / cos_k), _scalar(np.tan(karr)))


def linearize_jacobian(point, k=None):
    """Jacobian of the linearizing map, rows (dE/., dp/.), cols (d./domega, d./dk).

    Shape (2, 2) for scalar input, (..., 2, 2) for arrays. Identity at the
    origin, which is what ties the deformed boosts to the standard ones for
    small energies and momenta.
    """
    omega, karr = _point_coords(point, k)
    if np.any(np.abs(np.abs(karr) - HALF_PI) < _SINGULAR_TOL):
        raise SingularPointError("the change of variables is singular at k = +-pi/2")
    cos_k = np.cos(karr)
    sec2 = 1.0 / np.square(cos_k)
    row_e = np.stack([np.cos(omega) / cos_k, np.sin(omega) * np.sin(karr) * sec2], axis=-1)
    row_p = np.stack([np.zeros_like(cos_k * omega), sec2 + np.zeros_like(omega)], axis=-1)
    return np.stack([row_e, row_p], axis=-2)


def delinearize(ep, region) -> tuple:
    """Invert the linearizing map back to (omega, k) on the requested region.

    k = arctan(p) lands in B1; for region B2 it is shifted by pi onto the
    branch of tan that lives there (p = 0 maps to k = +pi by convention).
    omega = arcsin(E cos k), folded onto [pi/2, pi] for B2. Consistent with
    the positive-frequency branch, for which sign(E) is + on B1 and - on B2.
    """
    if isinstance(ep, PseudoEnergyMomentum):
        E, p = np.asarray(ep.E, dtype=float), np.asarray(ep.p, dtype=float)
    else:
        E, p = (np.asarray(x, dtype=float) for x in ep)
    k_raw = np.arctan(p)
    in_b2 = np.asarray(region) == int(Region.B2)
    shift = np.where(k_raw > 0.0, np.pi, -np.pi)
    karr = np.where(in_b2, k_raw - shift, k_raw)
    x = E * np.cos(karr)
    if np.any(np.abs(x) > 1.0 + _RANGE_SLACK):
        raise OutOfRangeError(
            f"|E cos k| = {float(np.max(np.abs(x)))} exceeds 1: no on-shell preimage"
        )
    om0 = np.arcsin(np.clip(x, -1.0, 1.0))
    omega = np.where(in_b2, np.pi - om0, om0)
    return _scalar(omega), _scalar(karr)


def standard_boost(pair, boost: Boost) -> tuple:
    """Linear (special-relativity) boost of a raw pair: gamma*(w - b k, k - b w)."""
    omega, karr = _point_coords(pair)
    g = np.asarray(boost.gamma, dtype=float)
    b = np.asarray(boost.beta, dtype=float)
    return _scalar(g * (omega - b * karr)), _scalar(g * (karr - b * omega))


def velocity_composition(b1: Boost, b2: Boost) -> Boost:
    """Relativistic velocity addition: the composition law the boosts inherit."""
    beta1 = np.asarray(b1.beta, dtype=float)
    beta2 = np.asarray(b2.beta, dtype=float)
    return Boost(_scalar((beta1 + beta2) / (1.0 + beta1 * beta2)))


def deformed_boost(point: OnShellPoint, boost: Boost, mass: MassParam | None = None) -> OnShellPoint:
    """Boost an on-shell point with the dispersion-preserving nonlinear action.

    Closed form on B1 (principal arctan branch):

        k'     = arctan[gamma (tan k - beta sin(omega)/cos(k))]
        omega' = on-shell frequency at k', equal to
                 arcsin[gamma (sin(omega)/cos(k) - beta tan k) cos k']

    omega' is re-derived from the returned k' through the dispersion relation
    rather than through the arcsin form, which is ill-conditioned near the
    fixed points; this keeps (omega', k') on-shell to machine rounding for
    every admissible input. Passing the mass uses the exact (m, n) pair;
    without it both are recovered from the input point.

    B2 points are conjugated through the reflection (omega, k) ->
    (pi - omega, sign(k) pi - k), which maps B2 onto B1 while preserving the
    dispersion relation, so the two regions never mix. Points within the
    fixed-point window of |k| = pi/2 pass through unchanged.
    """
    om = np.asarray(point.omega, dtype=float)
    karr = np.asarray(point.k, dtype=float)
    fixed = np.abs(np.abs(karr) - HALF_PI) <= FIXED_POINT_WINDOW
    in_b2 = np.asarray(point.region) == int(Region.B2)

    om1 = np.where(in_b2, np.pi - om, om)
    k1 = np.where(in_b2, np.sign(karr) * np.pi - karr, karr)

    # guard only affects the lanes that are replaced afterwards
    cos_k = np.cos(k1)
    safe = np.where(np.abs(cos_k) > 0.0, cos_k, 1.0)
    E = np.sin(om1) / safe
    p = np.tan(k1)
    g = np.asarray(boost.gamma, dtype=float)
    b = np.asarray(boost.beta, dtype=float)
    Ep = g * (E - b * p)
    pp = g * (p - b * E)
    kp = np.arctan(pp)
    if mass is None:
        n_b = np.cos(om1) / safe
        m_b = np.sqrt(np.clip(np.square(np.sin(om1)) - np.square(np.sin(k1)), 0.0, None)) / np.abs(safe)
    else:
        n_b = np.asarray(mass.n, dtype=float)
        m_b = np.asarray(mass.m, dtype=float)
    # sin(omega') = hypot(m cos k', sin k') is cancellation-free on the shell
    omp = np.arctan2(np.hypot(m_b * np.cos(kp), np.sin(kp)), n_b * np.cos(kp))

    back = np.where(kp >= 0.0, np.pi, -np.pi)
    om_out = np.where(in_b2, np.pi - omp, omp)
    k_out = np.where(in_b2, back - kp, kp)

    om_out = np.where(fixed, om, om_out)
    k_out = np.where(fixed, karr, k_out)
    return OnShellPoint(_scalar(om_out), _scalar(k_out), point.region)


def invariant_measure(k, mass: MassParam):
    """Density of the boost-invariant measure on the Brillouin zone.

    mu(k) = [2 |cos k| sin omega(k)]^(-1), the pullback through the
    linearizing map of the standard mass-shell measure dp / 2E, so that
    mu(k) dk = mu(k') dk' holds exactly under every deformed boost. For
    small k and m it reduces to the familiar 1/(2 omega). Diverges at the
    invariant points k = +-pi/2 and wherever sin omega = 0 (m = 0 at
    k in {0, +-pi}); a DivergentMeasureError is raised there.
    """
    karr = np.asarray(k, dtype=float)
    n = np.asarray(mass.n, dtype=float)
    cos_k = np.abs(np.cos(karr))
    sin_om = np.sqrt(1.0 - np.square(n * np.cos(karr)))
    denom = 2.0 * cos_k * sin_om
    if np.any(denom == 0.0) or np.any(cos_k < FIXED_POINT_WINDOW):
        raise DivergentMeasureError(
            "invariant measure diverges at k = +-pi/2 and where sin omega(k) = 0"
        )
    return _scalar(1.0 / denom)
