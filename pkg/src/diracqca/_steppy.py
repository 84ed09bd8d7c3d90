"""Pure-numpy fallback for the compiled step kernel (same signature)."""

import numpy as np


def evolve_direct(psi_r, psi_l, coupling, mass, steps):
    """Apply the two-component shift/mix update `steps` times, periodic in x."""
    a_r = np.array(psi_r, dtype=np.complex128, copy=True)
    a_l = np.array(psi_l, dtype=np.complex128, copy=True)
    im = -1j * mass
    for _ in range(steps):
        a_r, a_l = (
            coupling * np.roll(a_r, -1) + im * a_l,
            im * a_r + coupling * np.roll(a_l, 1),
        )
    return a_r, a_l
