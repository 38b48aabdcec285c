"""Slice-propagation kernels.

Both kernels advance a batch of phase-space column vectors through ``N``
light slices crossing one or more atomic cells.  Light ``p`` quadratures are
conserved, so each slice only kicks ``x_L``, ``x_M`` and the atoms.  Atoms
are carried in their rotating frame; the lab-frame value at slice ``k`` is
the rotation by ``theta_k = OmegaT (k + 1/2) / N`` with sense ``sigma``.

Set ``QMREADOUT_NUMBA=0`` to force the numpy path.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kw):
        if len(args) == 1 and callable(args[0]) and not kw:
            return args[0]
        return lambda f: f


def numba_enabled() -> bool:
    flag = os.environ.get("QMREADOUT_NUMBA", "1").strip().lower()
    return HAVE_NUMBA and flag not in ("0", "false", "no", "off")


@njit(cache=True)
def propagate_loop(xL, pL, xM, pM, xa, pa, ks, theta, sigma):
    """In-place slice loop; ``xL`` etc. have shape ``(N, ncol)``, atoms ``(ncell, ncol)``."""
    N, ncol = xL.shape
    ncell = xa.shape[0]
    h = 0.5 * ks
    for k in range(N):
        c = np.cos(theta[k])
        s = np.sin(theta[k])
        for a in range(ncell):
            sg = sigma[a]
            for j in range(ncol):
                X = xa[a, j]
                P = pa[a, j]
                pl = pL[k, j]
                pm = pM[k, j]
                # Strang: half L, full M, half L
                xlab = X * c + sg * P * s
                plab = P * c - sg * X * s
                xL[k, j] += ks * (plab - h * pm)
                xM[k, j] += ks * (xlab + h * pl)
                xa[a, j] = X + ks * (pl * c + sg * pm * s)
                pa[a, j] = P + ks * (-pm * c + sg * pl * s)


def propagate_numpy(xL, pL, xM, pM, xa, pa, ks, theta, sigma):
    """Vectorised equivalent of :func:`propagate_loop` via exclusive cumulative sums."""
    c = np.cos(theta)[:, None]
    s = np.sin(theta)[:, None]
    h = 0.5 * ks
    for a, sg in enumerate(sigma):
        dX = ks * (pL * c + sg * pM * s)
        dP = ks * (-pM * c + sg * pL * s)
        X = xa[a] + np.cumsum(dX, axis=0) - dX
        P = pa[a] + np.cumsum(dP, axis=0) - dP
        xL += ks * (P * c - sg * X * s - h * pM)
        xM += ks * (X * c + sg * P * s + h * pL)
        xa[a] += dX.sum(axis=0)
        pa[a] += dP.sum(axis=0)


def propagate(xL, pL, xM, pM, xa, pa, ks, theta, sigma, use_numba: bool | None = None):
    if use_numba is None:
        use_numba = numba_enabled()
    if use_numba and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    fn = propagate_loop if use_numba else propagate_numpy
    fn(xL, pL, xM, pM, xa, pa, float(ks), np.ascontiguousarray(theta, dtype=float),
       np.ascontiguousarray(sigma, dtype=float))
