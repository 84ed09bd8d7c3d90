"""Lattice states of the automaton and their exact unitary evolution.

A one-particle state lives on a periodic lattice of N cells with two complex
amplitudes per cell. Evolution is available in two independent forms: the
real-space stepper (compiled kernel when built, numpy fallback otherwise)
and the spectral form that diagonalizes the one-step unitary mode by mode.
The two are cross-checks of each other.

Momentum-space conventions: the Brillouin grid is k_j = -pi + 2 pi j / N and
spinor amplitudes transform with the unitary DFT psihat(k) = sum_x psi(x)
exp(-i k x) / sqrt(N), in which the one-step unitary is

    U(k) = [[n e^{ik}, -i m], [-i m, n e^{-ik}]].

The branch with U-eigenvalue exp(-i omega(k)) carries energy +omega(k) under
U = exp(-iH) and transports wave-packets at +d(omega)/dk; state boosts are
defined on that branch's scalar amplitude.
"""

from __future__ import annotations

import csv
import os
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import FixedPointSupportWarning, ValidationError
from .kinematics import (
    FIXED_POINT_WINDOW,
    Boost,
    MassParam,
    OnShellPoint,
    deformed_boost,
    dispersion,
    region_of,
)

if os.environ.get("DIRACQCA_PURE_PYTHON"):
    _stepcore = None
else:
    try:
        from . import _stepcore
    except ImportError:
        _stepcore = None

from . import _steppy

#: weight threshold above which a boost warns about fixed-point support
FIXED_POINT_WEIGHT_TOL = 1e-8

_FLOAT_FMT = "%.17g"


def step_backend() -> str:
    """Which kernel the direct stepper dispatches to ('cython' or 'numpy')."""
    return "numpy" if _stepcore is None else "cython"


def _frozen(arr):
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class LatticeState:
    """Two complex amplitudes per cell on a periodic lattice (immutable)."""

    psi_r: np.ndarray
    psi_l: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.psi_r, dtype=np.complex128)
        l = np.asarray(self.psi_l, dtype=np.complex128)
        if r.ndim != 1 or r.shape != l.shape:
            raise ValidationError("state components must be equal-length 1-d arrays")
        object.__setattr__(self, "psi_r", _frozen(r))
        object.__setattr__(self, "psi_l", _frozen(l))

    @property
    def n_cells(self) -> int:
        return self.psi_r.shape[0]

    def norm(self) -> float:
        return float(
            np.sqrt(np.sum(np.abs(self.psi_r) ** 2 + np.abs(self.psi_l) ** 2))
        )


@dataclass(frozen=True)
class SpectralAmplitude:
    """Positive-energy-branch amplitude g(k_j) on the Brillouin grid.

    grid holds k_j = -pi + 2 pi j / N; values are continuum-density samples,
    normalized so that sum_j dk mu(k_j) |g_j|^2 = 1 for unit-norm states.
    """

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=np.complex128)
        if g.ndim != 1 or g.shape != v.shape:
            raise ValidationError("grid and values must be equal-length 1-d arrays")
        object.__setattr__(self, "grid", _frozen(g))
        object.__setattr__(self, "values", _frozen(v))

    @property
    def n_cells(self) -> int:
        return self.grid.shape[0]

    @cached_property
    def interpolant(self) -> "TrigInterpolant":
        """Band-limited evaluator for off-grid wave-vectors."""
        return TrigInterpolant(self.values)


class TrigInterpolant:
    """Trigonometric interpolation of periodic samples on the Brillouin grid.

    The trig polynomial through the N samples is evaluated on a 16x
    zero-padded FFT grid once, then off-grid points use 16-point barycentric
    Lagrange interpolation on that fine grid, which reproduces the polynomial
    to machine precision.

    The polynomial's frequency window is chosen as g(k) = sum_{x=0}^{N-1}
    w_x e^{-ikx}, matching amplitudes that come from lattice states supported
    on cells 0..N-1 (a packet phase e^{-ik x0} with 0 <= x0 < N is
    represented without aliasing; the seam sits at the lattice wrap).
    """

    OVERSAMPLE = 16
    ORDER = 16

    def __init__(self, values):
        values = np.asarray(values, dtype=np.complex128)
        n = values.shape[0]
        coeff = np.fft.ifft(values)
        fine_n = self.OVERSAMPLE * n
        padded = np.zeros(fine_n, dtype=np.complex128)
        padded[:n] = coeff
        self._fine = np.fft.fft(padded)
        self._fine_n = fine_n
        self._n = n
        # uniform-grid barycentric weights (-1)^i C(order-1, i)
        order = self.ORDER
        comb = np.ones(order)
        for i in range(1, order):
            comb[i] = comb[i - 1] * (order - i) / i
        self._weights = comb * (-1.0) ** np.arange(order)

    def __call__(self, k):
        k = np.asarray(k, dtype=float)
        scalar = k.ndim == 0
        k = np.atleast_1d(k)
        step = 2.0 * np.pi / self._fine_n
        t = (k + np.pi) / step
        order = self.ORDER
        base = np.floor(t).astype(np.int64) - (order // 2 - 1)
        offsets = np.arange(order)
        idx = (base[:, None] + offsets[None, :]) % self._fine_n
        nodes = base[:, None] + offsets[None, :]
        diff = t[:, None] - nodes
        exact = np.isclose(diff, 0.0, atol=1e-12)
        diff = np.where(exact, 1.0, diff)
        w = self._weights[None, :] / diff
        vals = self._fine[idx]
        out = np.sum(w * vals, axis=1) / np.sum(w, axis=1)
        hit = exact.any(axis=1)
        if np.any(hit):
            out[hit] = np.sum(np.where(exact, vals, 0.0), axis=1)[hit]
        return out[0] if scalar else out

    def exact(self, k):
        """Direct O(N) evaluation of the trig polynomial (test oracle)."""
        k = np.atleast_1d(np.asarray(k, dtype=float))
        n = self._n
        coeff = np.fft.ifft(self._fine[:: self.OVERSAMPLE])
        x = np.arange(n)
        # the grid starts at -pi, so the node phases are e^{-i(k+pi)x}
        phases = np.exp(-1j * (k[:, None] + np.pi) * x[None, :])
        return phases @ coeff


def brillouin_grid(n_cells: int) -> np.ndarray:
    """Sorted zone samples k_j = -pi + 2 pi j / N."""
    return np.fft.fftshift(2.0 * np.pi * np.fft.fftfreq(n_cells))


def mode_unitary_matrix(k, mass: MassParam) -> np.ndarray:
    """The one-step unitary at wave-vector k (2x2, or (..., 2, 2) for arrays)."""
    karr = np.asarray(k, dtype=float)
    n = mass.n
    m = mass.m
    top = np.stack([n * np.exp(1j * karr), np.full_like(karr, -1j * m, dtype=complex)], axis=-1)
    bot = np.stack([np.full_like(karr, -1j * m, dtype=complex), n * np.exp(-1j * karr)], axis=-1)
    return np.stack([top, bot], axis=-2)


def _branch_vectors(k, mass: MassParam):
    """Orthonormal eigenvectors of U(k): columns (plus, minus) with
    eigenvalues exp(+i omega), exp(-i omega).

    Gauge: first nonzero component real positive. Up to a global factor the
    vectors are (m, n sin k -+ sin omega); at the degeneracies (m = 0 with
    sin k = 0) the canonical basis is returned, and for m = 0 elsewhere the
    plus branch is e_r for k > 0 and e_l for k < 0.
    """
    karr = np.asarray(k, dtype=float)
    n = mass.n
    m = mass.m
    sin_om = np.sqrt(1.0 - np.square(n * np.cos(karr)))
    a = np.broadcast_to(np.asarray(m, dtype=float), karr.shape).astype(float)
    sk = n * np.sin(karr)
    # n sin k -+ sin omega suffers cancellation on one side; there the
    # equivalent -+ m^2 / (sin omega +- n sin k) is exact and stable
    sum_ps = sin_om + sk
    sum_ms = sin_om - sk
    b_plus = np.where(
        sk >= 0.0,
        -np.square(a) / np.where(sum_ps > 0.0, sum_ps, 1.0) * (sum_ps > 0.0),
        sk - sin_om,
    )
    b_minus = np.where(
        sk <= 0.0,
        np.square(a) / np.where(sum_ms > 0.0, sum_ms, 1.0) * (sum_ms > 0.0),
        sk + sin_om,
    )
    norm_p = np.hypot(a, b_plus)
    norm_m = np.hypot(a, b_minus)
    degenerate = (norm_p == 0.0) | (norm_m == 0.0)

    safe_p = np.where(degenerate, 1.0, norm_p)
    safe_m = np.where(degenerate, 1.0, norm_m)
    vp = np.stack([a / safe_p, b_plus / safe_p])
    vm = np.stack([a / safe_m, b_minus / safe_m])

    if np.any(degenerate):
        # m = 0: plus branch is the component whose eigenvalue is e^{+i|k|}
        kk = np.broadcast_to(karr, degenerate.shape)
        pos = kk > 0.0
        e_r = np.stack([np.ones_like(kk), np.zeros_like(kk)])
        e_l = np.stack([np.zeros_like(kk), np.ones_like(kk)])
        vp_m0 = np.where(pos, e_r, e_l)
        vm_m0 = np.where(pos, e_l, e_r)
        exact_deg = np.abs(np.sin(kk)) == 0.0
        vp_m0 = np.where(exact_deg, e_r, vp_m0)
        vm_m0 = np.where(exact_deg, e_l, vm_m0)
        vp = np.where(degenerate, vp_m0, vp)
        vm = np.where(degenerate, vm_m0, vm)
    return vp.astype(np.complex128), vm.astype(np.complex128)


@dataclass(frozen=True)
class UnitaryAtK:
    """One mode of the automaton: matrix, eigenphases +-omega, eigenvectors."""

    k: float
    matrix: np.ndarray
    omega: float
    vec_plus: np.ndarray
    vec_minus: np.ndarray

    @property
    def eigenphases(self) -> tuple:
        return (self.omega, -self.omega)


def eigensystem(k, mass: MassParam) -> UnitaryAtK:
    """Diagonalize the one-step unitary at a single wave-vector.

    vec_plus has eigenvalue exp(+i omega), vec_minus exp(-i omega); the
    latter is the positive-energy branch under U = exp(-iH).
    """
    k = float(k)
    vp, vm = _branch_vectors(np.asarray([k]), mass)
    return UnitaryAtK(
        k=k,
        matrix=mode_unitary_matrix(k, mass),
        omega=float(dispersion(k, mass).omega),
        vec_plus=vp[:, 0],
        vec_minus=vm[:, 0],
    )


def localized_state(x0: int, internal, n_cells: int) -> LatticeState:
    """A state concentrated on one cell with the given internal 2-vector."""
    internal = np.asarray(internal, dtype=np.complex128)
    if internal.shape != (2,):
        raise ValidationError("internal state must be a 2-vector")
    if abs(np.linalg.norm(internal) - 1.0) > 1e-12:
        raise ValidationError("internal state must be normalized")
    if not (isinstance(x0, (int, np.integer)) and 0 <= x0 < n_cells):
        raise ValidationError(f"cell index x0 = {x0!r} outside 0..{n_cells - 1}")
    psi_r = np.zeros(n_cells, dtype=np.complex128)
    psi_l = np.zeros(n_cells, dtype=np.complex128)
    psi_r[x0], psi_l[x0] = internal
    return LatticeState(psi_r, psi_l)


def position_density(state: LatticeState) -> np.ndarray:
    """p(x) = |psi_r(x)|^2 + |psi_l(x)|^2; sums to the squared norm."""
    return np.abs(state.psi_r) ** 2 + np.abs(state.psi_l) ** 2


def step_direct(state: LatticeState, mass: MassParam) -> LatticeState:
    """One exact step of the automaton in real space."""
    return evolve_direct(state, mass, 1)


def evolve_direct(state: LatticeState, mass: MassParam, steps: int) -> LatticeState:
    """`steps` real-space steps through the compiled kernel (or numpy fallback)."""
    if steps < 0:
        raise ValidationError("step count must be >= 0")
    kernel = _steppy if _stepcore is None else _stepcore
    r, l = kernel.evolve_direct(state.psi_r, state.psi_l, mass.n, mass.m, int(steps))
    return LatticeState(r, l)


def _to_momentum(state: LatticeState) -> np.ndarray:
    n = state.n_cells
    psi = np.stack([state.psi_r, state.psi_l])
    return np.fft.fftshift(np.fft.fft(psi, axis=1), axes=1) / np.sqrt(n)


def _from_momentum(psi_hat: np.ndarray) -> LatticeState:
    n = psi_hat.shape[1]
    psi = np.fft.ifft(np.fft.ifftshift(psi_hat, axes=1), axis=1) * np.sqrt(n)
    return LatticeState(psi[0], psi[1])


def evolve_spectral(state: LatticeState, mass: MassParam, steps: int) -> LatticeState:
    """T steps via the mode-by-mode eigendecomposition: phases e^{+-i omega T}."""
    if steps < 0:
        raise ValidationError("step count must be >= 0")
    k = brillouin_grid(state.n_cells)
    psi_hat = _to_momentum(state)
    vp, vm = _branch_vectors(k, mass)
    omega = np.arccos(mass.n * np.cos(k))
    a_plus = np.conj(vp[0]) * psi_hat[0] + np.conj(vp[1]) * psi_hat[1]
    a_minus = np.conj(vm[0]) * psi_hat[0] + np.conj(vm[1]) * psi_hat[1]
    phase_p = np.exp(1j * omega * steps)
    phase_m = np.exp(-1j * omega * steps)
    out = phase_p * a_plus * vp + phase_m * a_minus * vm
    return _from_momentum(out)


def _measure_on_grid(k, mass: MassParam):
    """Invariant-measure samples, inf on nodes where the density diverges.

    Grid nodes inside the kinematic fixed-point window of +-pi/2 (where the
    float measure would be ~1e16 and a vanishing amplitude tail could carry
    macroscopic weight) are reported as divergent and thereby excluded from
    quadrature, embedding, and projection.
    """
    n = mass.n
    cos_k = np.abs(np.cos(k))
    sin_om = np.sqrt(1.0 - np.square(n * np.cos(k)))
    denom = 2.0 * cos_k * sin_om
    denom = np.where(cos_k < FIXED_POINT_WINDOW, 0.0, denom)
    with np.errstate(divide="ignore"):
        return np.where(denom > 0.0, 1.0 / np.where(denom > 0.0, denom, 1.0), np.inf)


@dataclass(frozen=True)
class PositiveBranchProjection:
    """Result of projecting a lattice state onto the positive-energy branch.

    positive/negative weights sum to the squared state norm; excluded_weight
    is the (normally negligible) part of the positive weight sitting on grid
    nodes where the invariant measure diverges and g cannot represent it.
    """

    amplitude: SpectralAmplitude
    positive_weight: float
    negative_weight: float
    excluded_weight: float


def project_positive_branch(state: LatticeState, mass: MassParam) -> PositiveBranchProjection:
    """Extract the positive-energy scalar amplitude g(k_j) from a state.

    g(k_j) = <e+(k_j)|psihat(k_j)> / sqrt(mu(k_j) dk), the normalization in
    which boosts act by pure substitution and the invariant-measure
    quadrature norm equals the branch weight.
    """
    k = brillouin_grid(state.n_cells)
    dk = 2.0 * np.pi / state.n_cells
    psi_hat = _to_momentum(state)
    _, vm = _branch_vectors(k, mass)
    a_pos = np.conj(vm[0]) * psi_hat[0] + np.conj(vm[1]) * psi_hat[1]
    a_all = np.abs(psi_hat[0]) ** 2 + np.abs(psi_hat[1]) ** 2
    mu = _measure_on_grid(k, mass)
    ok = np.isfinite(mu)
    values = np.where(ok, a_pos / np.sqrt(np.where(ok, mu, 1.0) * dk), 0.0)
    pos = float(np.sum(np.abs(a_pos) ** 2))
    return PositiveBranchProjection(
        amplitude=SpectralAmplitude(k, values),
        positive_weight=pos,
        negative_weight=float(np.sum(a_all)) - pos,
        excluded_weight=float(np.sum(np.abs(a_pos[~ok]) ** 2)),
    )


def embed_positive_branch(amp: SpectralAmplitude, mass: MassParam) -> LatticeState:
    """Rebuild the lattice state carried by a positive-branch amplitude."""
    k = amp.grid
    dk = 2.0 * np.pi / amp.n_cells
    _, vm = _branch_vectors(k, mass)
    mu = _measure_on_grid(k, mass)
    ok = np.isfinite(mu)
    a_pos = np.where(ok, amp.values * np.sqrt(np.where(ok, mu, 1.0) * dk), 0.0)
    return _from_momentum(a_pos * vm)


def amplitude_norm(amp: SpectralAmplitude, mass: MassParam) -> float:
    """Invariant-measure norm: sqrt(sum_j dk mu(k_j) |g_j|^2).

    Midpoint quadrature on the uniform grid; nodes where mu diverges are
    excluded (g vanishes there by construction for projected states).
    """
    dk = 2.0 * np.pi / amp.n_cells
    mu = _measure_on_grid(amp.grid, mass)
    ok = np.isfinite(mu)
    return float(np.sqrt(np.sum(dk * mu[ok] * np.abs(amp.values[ok]) ** 2)))


def normalized(amp: SpectralAmplitude, mass: MassParam) -> SpectralAmplitude:
    """Rescale an amplitude to unit invariant-measure norm."""
    norm = amplitude_norm(amp, mass)
    if norm == 0.0:
        raise ValidationError("cannot normalize a zero amplitude")
    return SpectralAmplitude(amp.grid, amp.values / norm)


def evolve_amplitude(amp: SpectralAmplitude, mass: MassParam, steps: int) -> SpectralAmplitude:
    """Free evolution restricted to the positive branch: g -> e^{-i omega T} g."""
    omega = np.arccos(mass.n * np.cos(amp.grid))
    return SpectralAmplitude(amp.grid, np.exp(-1j * omega * steps) * amp.values)


def boost_state(amp: SpectralAmplitude, boost: Boost, mass: MassParam) -> SpectralAmplitude:
    """Unitary boost of a positive-branch amplitude: g'(k') = g(k(k')).

    Each output node k'_j is pulled back through the inverse deformed boost
    and g is evaluated there with the band-limited interpolant. Unitarity in
    the invariant measure holds to quadrature accuracy because mu(k) dk is
    boost-invariant.
    """
    k_out = amp.grid
    dk = 2.0 * np.pi / amp.n_cells
    mu = _measure_on_grid(k_out, mass)
    ok = np.isfinite(mu)
    # the amplitude has a sqrt-type cusp at the invariant points, so the
    # interpolant is unreliable within a couple of grid cells of them
    window = max(1e-6, 2.0 * dk)
    near = np.abs(np.abs(k_out) - np.pi / 2.0) < window
    weight_near = float(np.sum(dk * mu[near & ok] * np.abs(amp.values[near & ok]) ** 2))
    if weight_near > FIXED_POINT_WEIGHT_TOL:
        warnings.warn(
            f"amplitude weight {weight_near:.3e} within {window:.2e} of the "
            "invariant points: interpolation accuracy degrades there",
            FixedPointSupportWarning,
            stacklevel=2,
        )
    points = OnShellPoint(
        omega=np.arccos(mass.n * np.cos(k_out)), k=k_out, region=region_of(k_out)
    )
    k_src = deformed_boost(points, boost.inverse(), mass).k
    return SpectralAmplitude(k_out, amp.interpolant(k_src))


# -- flat-file schemas ---------------------------------------------------

_STATE_HEADER = ["x", "re_psi_r", "im_psi_r", "re_psi_l", "im_psi_l"]
_SPECTRAL_HEADER = ["k", "re_g", "im_g", "mu"]


def _atomic_writer(path):
    tmp = f"{path}.tmp"
    return tmp


def write_state_csv(state: LatticeState, path) -> None:
    """Serialize a state to CSV (columns x, re/im of both components)."""
    tmp = _atomic_writer(path)
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_STATE_HEADER)
        for x in range(state.n_cells):
            writer.writerow(
                [x]
                + [
                    _FLOAT_FMT % v
                    for v in (
                        state.psi_r[x].real,
                        state.psi_r[x].imag,
                        state.psi_l[x].real,
                        state.psi_l[x].imag,
                    )
                ]
            )
    os.replace(tmp, path)


def read_state_csv(path) -> LatticeState:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != _STATE_HEADER:
            raise ValidationError(f"{path}: expected header {_STATE_HEADER}, got {header}")
        rows = [row for row in reader]
    psi_r = np.array([float(r[1]) + 1j * float(r[2]) for r in rows])
    psi_l = np.array([float(r[3]) + 1j * float(r[4]) for r in rows])
    return LatticeState(psi_r, psi_l)


def write_spectral_csv(amp: SpectralAmplitude, mass: MassParam, path) -> None:
    """Serialize a spectral amplitude (plus the measure samples) to CSV."""
    mu = _measure_on_grid(amp.grid, mass)
    tmp = _atomic_writer(path)
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_SPECTRAL_HEADER)
        for j in range(amp.n_cells):
            writer.writerow(
                [
                    _FLOAT_FMT % amp.grid[j],
                    _FLOAT_FMT % amp.values[j].real,
                    _FLOAT_FMT % amp.values[j].imag,
                    _FLOAT_FMT % mu[j],
                ]
            )
    os.replace(tmp, path)


def read_spectral_csv(path) -> SpectralAmplitude:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != _SPECTRAL_HEADER:
            raise ValidationError(f"{path}: expected header {_SPECTRAL_HEADER}, got {header}")
        rows = [row for row in reader]
    grid = np.array([float(r[0]) for r in rows])
    values = np.array([float(r[1]) + 1j * float(r[2]) for r in rows])
    return SpectralAmplitude(grid, values)
