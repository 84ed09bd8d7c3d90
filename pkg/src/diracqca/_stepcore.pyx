# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernel: T applications of the one-step lattice update."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def evolve_direct(psi_r, psi_l, double coupling, double mass, Py_ssize_t steps):
    """Apply the two-component shift/mix update `steps` times, periodic in x.

    psi_r'(x) = n psi_r(x+1) - i m psi_l(x)
    psi_l'(x) = -i m psi_r(x) + n psi_l(x-1)

    The arrays are processed as interleaved re/im doubles so the loop stays
    in plain real arithmetic.
    """
    a_r = np.array(psi_r, dtype=np.complex128, copy=True)
    a_l = np.array(psi_l, dtype=np.complex128, copy=True)
    cdef Py_ssize_t size = a_r.shape[0]
    b_r = np.empty(size, dtype=np.complex128)
    b_l = np.empty(size, dtype=np.complex128)

    cdef double[::1] ar = a_r.view(np.float64)
    cdef double[::1] al = a_l.view(np.float64)
    cdef double[::1] br = b_r.view(np.float64)
    cdef double[::1] bl = b_l.view(np.float64)
    cdef double[::1] tmp
    cdef double n = coupling, m = mass
    cdef Py_ssize_t t, i, last = 2 * (size - 1)

    with nogil:
        for t in range(steps):
            # -i m (a + b i) = m b - i m a
            for i in range(0, last, 2):
                br[i] = n * ar[i + 2] + m * al[i + 1]
                br[i + 1] = n * ar[i + 3] - m * al[i]
            br[last] = n * ar[0] + m * al[last + 1]
            br[last + 1] = n * ar[1] - m * al[last]
            bl[0] = m * ar[1] + n * al[last]
            bl[1] = -m * ar[0] + n * al[last + 1]
            for i in range(2, 2 * size, 2):
                bl[i] = m * ar[i + 1] + n * al[i - 2]
                bl[i + 1] = -m * ar[i] + n * al[i - 1]
            tmp = ar; ar = br; br = tmp
            tmp = al; al = bl; bl = tmp

    if steps % 2 == 0:
        return a_r, a_l
    return b_r, b_l
