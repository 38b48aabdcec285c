"""Closed-form optimal readout parameters and a numeric cross-check.

The numeric side maximises the fidelity returned by the channel pipelines in
:mod:`qmreadout.protocols`, so it shares no formulas with the closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable

import numpy as np

from .protocols import SingleCellSpec, selective_squeezing, single_cell_readout, uniform_squeezing

A_TH = 0.5 * (3.0 - math.sqrt(7.0 / 3.0))
A_SINGLE_AMP = 2.0 / 3.0
A_MAX = 0.999

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class BracketError(RuntimeError):
    """No usable maximum found on the scanned grid."""

    def __init__(self, msg: str, grid: np.ndarray, values: np.ndarray):
        super().__init__(msg)
        self.grid = grid
        self.values = values


@dataclass(frozen=True)
class Optimum:
    kappa_sq: float
    amp_gain: float
    nbar: float
    fidelity: float
    branch: str
    squeeze_V: float | None = None
    squeeze_r: float | None = None
    kappa2_sq: float | None = None

    def __post_init__(self):
        if self.branch not in ("no-amp", "amp"):
            raise ValueError(f"unknown branch {self.branch!r}")


def _check_loss(A: float) -> None:
    if not 0.0 <= A < 1.0:
        raise ValueError(f"loss coefficient must lie in [0, 1), got {A}")


def _optimum(kappa_sq, G, nbar, branch, **kw) -> Optimum:
    return Optimum(kappa_sq, G, nbar, 1.0 / (1.0 + nbar), branch, **kw)


def _single_no_amp(A: float) -> Optimum:
    c = 1.0 - A
    return _optimum(2.0 / c, 1.0, 1.0 / (3.0 * c), "no-amp")


def _single_amp(A: float) -> Optimum:
    c = 1.0 - A
    k2 = 2.0 * math.sqrt(3.0 / c)
    return _optimum(k2, 2.0 / (k2 * c), 2.0 / math.sqrt(3.0 * c) - 1.0, "amp")


def single_cell_lossy(A: float) -> Optimum:
    """Best vacuum-input single-cell readout at wall loss ``A``."""
    _check_loss(A)
    return _single_no_amp(A) if A <= A_SINGLE_AMP else _single_amp(A)


def single_cell_fidelity(A: float) -> float:
    c = 1.0 - A
    return 3.0 * c / (4.0 - 3.0 * A) if A <= A_SINGLE_AMP else 0.5 * math.sqrt(3.0 * c)


def two_cell_lossy(A: float) -> Optimum:
    """Unit-gain two-cell readout; both couplings are fixed by the gain constraints."""
    _check_loss(A)
    c = 1.0 - A
    nbar = (c + 0.5 * A * A) / (3.0 * c**3)
    return _optimum(2.0 / c**3, 1.0, nbar, "no-amp", kappa2_sq=2.0 / c)


def two_cell_fidelity(A: float) -> float:
    return 3.0 * (1.0 - A) ** 3 / (4.0 - 10.0 * A + 9.5 * A * A - 3.0 * A**3)


def uniform_squeeze(r: float) -> float:
    """Lossless fidelity with every light x quadrature squeezed by ``r``."""
    return 12.0 / (12.0 + 3.0 * math.exp(-2.0 * r) + math.exp(2.0 * r))


def uniform_squeeze_optimum() -> Optimum:
    r = 0.25 * math.log(3.0)
    F = 6.0 / (6.0 + math.sqrt(3.0))
    return Optimum(2.0, 1.0, 1.0 / F - 1.0, F, "no-amp", squeeze_r=r)


def _selective_no_amp(A: float) -> Optimum:
    c = 1.0 - A
    return _optimum(2.0 / c, 1.0, A * c + A / (3.0 * c), "no-amp", squeeze_V=A / (2.0 * c))


def _selective_amp(A: float) -> Optimum:
    c = 1.0 - A
    k2 = 2.0 * math.sqrt(3.0 * (2.0 - A) / c)
    nbar = 2.0 * A * math.sqrt((2.0 - A) / (3.0 * c)) - A
    return _optimum(k2, 2.0 / (k2 * c), nbar, "amp", squeeze_V=0.25 * abs(k2 - 2.0))


def selective_squeeze_lossy(A: float) -> Optimum:
    """Single cell with x_L, x_M squeezed to ``V`` and p~_L, p~_M infinitely squeezed."""
    _check_loss(A)
    return _selective_no_amp(A) if A <= A_TH else _selective_amp(A)


BRANCH_POINTS = {"single": A_SINGLE_AMP, "selective": A_TH}
_BRANCHES = {"single": (_single_no_amp, _single_amp), "selective": (_selective_no_amp, _selective_amp)}


def branch_values(scheme: str, A: float) -> tuple[Optimum, Optimum]:
    """Both branch formulas evaluated at ``A`` regardless of which one is optimal."""
    if scheme not in _BRANCHES:
        raise ValueError(f"scheme {scheme!r} has no branches")
    _check_loss(A)
    lo, hi = _BRANCHES[scheme]
    return lo(A), hi(A)


def selective_fidelity(A: float) -> float:
    return selective_squeeze_lossy(A).fidelity


def classical_benchmark() -> float:
    """Best coherent-state fidelity of measure-and-prepare strategies."""
    return 0.5


def classical_crossing(fidelity: Callable[[float], float]) -> float:
    """Loss at which ``fidelity(A)`` drops to the classical benchmark."""
    from scipy.optimize import brentq

    return float(brentq(lambda a: fidelity(a) - classical_benchmark(), 0.0, A_MAX, xtol=1e-15))


# ---------------------------------------------------------------------------
# numeric search


def scan_bracket(f: Callable[[float], float], lo: float, hi: float, n: int = 21):
    grid = np.linspace(lo, hi, n)
    vals = np.array([f(x) for x in grid])
    if not np.any(np.isfinite(vals)):
        raise BracketError(f"objective not finite on [{lo}, {hi}]", grid, vals)
    i = int(np.nanargmax(np.where(np.isfinite(vals), vals, -np.inf)))
    return grid[max(i - 1, 0)], grid[min(i + 1, n - 1)], grid, vals


def golden_section_max(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10):
    """Maximise a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    # endpoints matter when the optimum sits on the box boundary
    cands = [(f(a), a), (fc, c), (fd, d), (f(b), b)]
    fx, x = max(cands)
    return x, fx


def _search(f, lo, hi, tol):
    a, b, grid, vals = scan_bracket(f, lo, hi)
    x, fx = golden_section_max(f, a, b, tol)
    i = int(np.argmax(vals))
    if vals[i] > fx:
        x, fx = grid[i], vals[i]
    return x, fx


SCHEME_FREES = {
    "single": {"kappa_sq"},
    "uniform": {"kappa_sq", "r"},
    "selective": {"kappa_sq", "V"},
}


def _readout(scheme, A, kappa_sq, V=None, r=None):
    c = 1.0 - A
    G = 2.0 / (kappa_sq * c)
    squeeze = None
    if scheme == "uniform":
        squeeze = uniform_squeezing(r)
    elif scheme == "selective":
        squeeze = selective_squeezing(V)
    spec = SingleCellSpec(math.sqrt(kappa_sq), A, squeeze, G if G > 1.0 else None)
    return single_cell_readout(spec), G


def numeric_optimize(scheme: str, A: float = 0.0, frees: Iterable[str] | None = None,
                     tol: float = 1e-10, **fixed) -> Optimum:
    """Maximise the pipeline fidelity over the ``frees`` parameters.

    ``kappa_sq`` is searched on ``(0, 2/(1-A)]`` with the amplifier gain set
    to restore unit gain, ``V`` on a logarithmic grid and ``r`` on ``[0, 3]``.
    Parameters not in ``frees`` take their value from ``fixed`` or the
    unit-gain default (``kappa_sq = 2/(1-A)``, ``V = 1/2``, ``r = 0``).
    """
    if scheme == "double":
        raise ValueError("two-cell couplings are fixed by the gain constraints; nothing to optimise")
    if scheme not in SCHEME_FREES:
        raise ValueError(f"unknown scheme {scheme!r}")
    _check_loss(A)
    frees = set(SCHEME_FREES[scheme] if frees is None else frees)
    bad = frees - SCHEME_FREES[scheme]
    if bad:
        raise ValueError(f"scheme {scheme!r} cannot free {sorted(bad)}")
    k2_max = 2.0 / (1.0 - A)
    params = {"kappa_sq": k2_max, "V": 0.5, "r": 0.0}
    params.update(fixed)

    def inner_best(k2):
        p = dict(params, kappa_sq=k2)
        if scheme == "selective" and "V" in frees:
            lv, fx = _search(
                lambda lv: _readout(scheme, A, k2, V=math.exp(lv))[0].fidelity, math.log(1e-12), math.log(1e2), tol
            )
            p["V"] = math.exp(lv)
            return fx, p
        if scheme == "uniform" and "r" in frees:
            r, fx = _search(lambda r: _readout(scheme, A, k2, r=r)[0].fidelity, 0.0, 3.0, tol)
            p["r"] = r
            return fx, p
        return _readout(scheme, A, k2, V=p["V"], r=p["r"])[0].fidelity, p

    if "kappa_sq" in frees:
        best = {}

        def outer(k2):
            fx, p = inner_best(k2)
            best[k2] = p
            return fx

        k2, _ = _search(outer, 1e-3 * k2_max, k2_max, tol)
        p = best[k2] if k2 in best else inner_best(k2)[1]
    else:
        _, p = inner_best(params["kappa_sq"])

    res, G = _readout(scheme, A, p["kappa_sq"], V=p["V"], r=p["r"])
    return Optimum(
        kappa_sq=p["kappa_sq"],
        amp_gain=max(G, 1.0),
        nbar=res.nbar,
        fidelity=res.fidelity,
        branch="amp" if G > 1.0 + 1e-6 else "no-amp",
        squeeze_V=p["V"] if scheme == "selective" else None,
        squeeze_r=p["r"] if scheme == "uniform" else None,
    )


def closed_form(scheme: str, A: float = 0.0) -> Optimum:
    """Closed-form counterpart of :func:`numeric_optimize`."""
    if scheme == "single":
        return single_cell_lossy(A)
    if scheme == "double":
        return two_cell_lossy(A)
    if scheme == "uniform":
        if A != 0.0:
            raise ValueError("closed form for uniform squeezing is lossless only")
        return uniform_squeeze_optimum()
    if scheme == "selective":
        return selective_squeeze_lossy(A)
    raise ValueError(f"unknown scheme {scheme!r}")


def discrepancy(a: Optimum, b: Optimum) -> float:
    """Largest absolute difference over the fields both optima define."""
    diffs = []
    for name in ("kappa_sq", "amp_gain", "nbar", "fidelity", "squeeze_V", "squeeze_r"):
        x, y = getattr(a, name), getattr(b, name)
        if x is not None and y is not None:
            diffs.append(abs(x - y))
    return max(diffs)
