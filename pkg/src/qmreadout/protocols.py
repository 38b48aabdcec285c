"""Readout pipelines for the single-cell and two-cell memory schemes.

Mode labels
-----------
Single cell: ``L``, ``M`` (flat temporal mode of each beam), ``L~``, ``M~``
(the orthogonal ``sqrt3 (1 - 2t/T)`` mode) and the atomic mode ``A``.

Two cells: sideband modes ``LC``, ``LS``, ``MC``, ``MS`` (cosine/sine at the
Larmor frequency), their tilde partners ``L~C`` ... and the atomic sum and
difference modes ``A+``, ``A-`` (``A1``, ``A2`` for the individual cells).
After recombination the readout arm is relabelled ``out`` (``outC``/``outS``)
and the second beam-splitter port ``aux``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

import numpy as np

from .gaussian import (
    GaussianChannel,
    GaussianState,
    SymplecticTransform,
    added_noise,
    amplifier_channel,
    apply_channel,
    beam_splitter,
    fidelity_coherent,
    loss_channel,
    squeezer,
    wave_plate,
)

SINGLE_MODES = ("L", "L~", "M", "M~", "A")
SINGLE_LIGHT = ("L", "L~", "M", "M~")
SIDEBAND_LIGHT = ("LC", "LS", "MC", "MS", "L~C", "L~S", "M~C", "M~S")
TWO_CELL_MODES = SIDEBAND_LIGHT + ("A+", "A-")

# ideal unit-gain maps from atomic means to readout means
READOUT_MAP = np.array([[0.0, 1.0], [-1.0, 0.0]])
SINE_READOUT_MAP = -np.eye(2)

R3 = math.sqrt(3.0)


@dataclass(frozen=True)
class PhysicalParams:
    a: float
    N_L: float
    T: float
    Jx: float
    Omega: float = 0.0

    def __post_init__(self):
        for name in ("N_L", "T", "Jx"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.a < 0 or self.Omega < 0:
            raise ValueError("coupling and Larmor frequency must be non-negative")

    @property
    def OmegaT(self) -> float:
        return self.Omega * self.T

    @property
    def S1(self) -> float:
        """Classical Stokes component ``N_L / (2T)`` of each pump."""
        return self.N_L / (2.0 * self.T)


def kappa_from_physical(p: PhysicalParams) -> float:
    """Effective coupling ``a sqrt(N_L <Jx> / 2)``."""
    return p.a * math.sqrt(p.N_L * p.Jx / 2.0)


@dataclass(frozen=True)
class Squeeze:
    """Squeezing of one light mode; ``r = inf`` is the zero-variance limit."""

    r: float
    axis: str = "x"

    def __post_init__(self):
        if self.axis not in ("x", "p"):
            raise ValueError("axis must be 'x' or 'p'")
        if math.isnan(self.r) or self.r < 0:
            raise ValueError("squeezing parameter must be >= 0 (flip the axis instead)")


def uniform_squeezing(r: float) -> dict[str, Squeeze]:
    """Squeeze the x quadrature of every light mode by ``r``."""
    return {lab: Squeeze(r, "x") for lab in SINGLE_LIGHT}


def selective_squeezing(V: float, tilde_e2r: float = math.inf) -> dict[str, Squeeze]:
    """x_L, x_M with physical variance ``V``; p~_L, p~_M squeezed by ``exp(2r) = tilde_e2r``."""
    if not V >= 0:
        raise ValueError("variance V must be non-negative")
    r = -0.5 * math.log(2.0 * V) if V > 0 else math.inf
    sq = Squeeze(abs(r), "x" if r >= 0 else "p")
    rt = 0.5 * math.log(tilde_e2r) if math.isfinite(tilde_e2r) else math.inf
    return {"L": sq, "M": sq, "L~": Squeeze(rt, "p"), "M~": Squeeze(rt, "p")}


@dataclass(frozen=True)
class SingleCellSpec:
    kappa: float
    loss_A: float = 0.0
    squeeze: Mapping[str, Squeeze] | None = None
    amp_gain: float | None = None

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if not 0.0 <= self.loss_A < 1.0:
            raise ValueError(f"loss coefficient must lie in [0, 1), got {self.loss_A}")
        if self.amp_gain is not None and not self.amp_gain >= 1.0:
            raise ValueError("amplifier gain must be >= 1")
        if self.squeeze:
            bad = set(self.squeeze) - set(SINGLE_LIGHT)
            if bad:
                raise ValueError(f"cannot squeeze modes {sorted(bad)}")

    @classmethod
    def unit_gain(cls, A: float = 0.0, **kw) -> "SingleCellSpec":
        """No amplifier, ``kappa^2 = 2/(1-A)``."""
        return cls(math.sqrt(2.0 / (1.0 - A)), A, **kw)


@dataclass(frozen=True)
class TwoCellSpec:
    kappa1: float
    kappa2: float
    loss_A: float = 0.0

    def __post_init__(self):
        if not (self.kappa1 > 0 and self.kappa2 > 0):
            raise ValueError("couplings must be positive")
        if not 0.0 <= self.loss_A < 1.0:
            raise ValueError(f"loss coefficient must lie in [0, 1), got {self.loss_A}")

    @classmethod
    def unit_gain(cls, A: float = 0.0) -> "TwoCellSpec":
        """``kappa1 = sqrt(2/(1-A)^3)``, ``kappa2 = sqrt(2/(1-A))``."""
        return cls(math.sqrt(2.0 / (1.0 - A) ** 3), math.sqrt(2.0 / (1.0 - A)), A)

    @property
    def ratio_ok(self) -> bool:
        return abs(self.kappa2 / self.kappa1 - (1.0 - self.loss_A)) <= 1e-12


@dataclass(frozen=True)
class ReadoutResult:
    output: GaussianState
    aux: GaussianState
    memory: GaussianState
    nbar: float
    fidelity: float
    gain: np.ndarray
    joint: GaussianState = field(repr=False)
    transfer: GaussianChannel = field(repr=False)
    memory_gain: np.ndarray = field(repr=False, default=None)


# ---------------------------------------------------------------------------
# single cell


def single_cell_pass(kappa: float) -> SymplecticTransform:
    """Light-atom map of one simultaneous passage of beams L and M.

    The ``x~`` rows come from projecting the Heisenberg solution on the
    ``sqrt3 (1 - 2t/T)`` mode; the remaining coupling to the quadratic
    temporal mode only involves ``p`` inputs of unprojected modes and drops
    out of the symplectic form.
    """
    if kappa < 0:
        raise ValueError("kappa must be non-negative")
    k, q, t = kappa, kappa**2 / 2.0, kappa**2 / (2.0 * R3)
    S = SymplecticTransform(np.eye(10), SINGLE_MODES, check=False)
    M = np.eye(10)

    def put(row, col, val):
        M[S._qindex(row), S._qindex(col)] = val

    put("x_L", "p_A", k)
    put("x_L", "p_M", -q)
    put("x_L", "p_M~", -t)
    put("x_L~", "p_M", t)
    put("x_M", "x_A", k)
    put("x_M", "p_L", q)
    put("x_M", "p_L~", t)
    put("x_M~", "p_L", -t)
    put("x_A", "p_L", k)
    put("p_A", "p_M", -k)
    return SymplecticTransform(M, SINGLE_MODES)


@lru_cache(maxsize=None)
def _recombination(pairs: tuple[tuple[str, str], ...]) -> GaussianChannel:
    labels = tuple(lab for pair in pairs for lab in pair)
    ch = GaussianChannel(np.eye(2 * len(labels)), np.zeros((2 * len(labels),) * 2), labels, check=False)
    for first, second in pairs:
        ch = ch.then(wave_plate(second).as_channel()).then(beam_splitter(first, second).as_channel())
    return ch


def recombination(pairs) -> GaussianChannel:
    """Wave plate on the second beam of each pair, then a balanced beam splitter."""
    return _recombination(tuple(tuple(p) for p in pairs))


def recombine(state: GaussianState) -> GaussianState:
    """Interfere beams L and M (and their tilde modes); L becomes ``out``, M ``aux``."""
    missing = {"L", "M"} - set(state.labels)
    if missing:
        raise KeyError(f"state lacks modes {sorted(missing)}")
    pairs = [("L", "M")]
    if "L~" in state.labels and "M~" in state.labels:
        pairs.append(("L~", "M~"))
    out = apply_channel(state, recombination(pairs))
    return out.relabel({"L": "out", "M": "aux", "L~": "out~", "M~": "aux~"})


def _input_state(labels, atomic: dict[str, tuple], squeeze: Mapping[str, Squeeze] | None):
    """Vacuum light modes (optionally squeezed) and the given atomic modes."""
    n = len(labels)
    mean = np.zeros(2 * n)
    cov = np.eye(2 * n)
    pos = {lab: i for i, lab in enumerate(labels)}
    for lab, (m, c) in atomic.items():
        i = 2 * pos[lab]
        mean[i : i + 2] = m
        cov[i : i + 2, i : i + 2] = c
    for lab, sq in (squeeze or {}).items():
        i = 2 * pos[lab]
        if math.isinf(sq.r):
            # zero-variance limit; conjugate quadrature left at vacuum as a placeholder
            cov[i + (0 if sq.axis == "x" else 1), i + (0 if sq.axis == "x" else 1)] = 0.0
        else:
            d = squeezer(lab, sq.r, sq.axis).matrix
            cov[i : i + 2, i : i + 2] = d @ cov[i : i + 2, i : i + 2] @ d.T
    return GaussianState(labels, mean, cov)


def _atomic(mean, cov):
    m = np.zeros(2) if mean is None else np.asarray(mean, dtype=float)
    c = np.eye(2) if cov is None else np.asarray(cov, dtype=float)
    return m, c


def single_cell_channel(spec: SingleCellSpec) -> GaussianChannel:
    """Complete single-cell map on ``SINGLE_MODES`` before relabelling.

    Order: entry-wall loss -> passage -> exit-wall loss -> wave plate + beam
    splitter -> optional amplifier on the readout arm.  Entry loss leaves
    vacuum inputs unchanged but degrades squeezed ones.
    """
    return _single_cell_channel(spec.kappa, spec.loss_A, spec.amp_gain)


@lru_cache(maxsize=512)
def _single_cell_channel(kappa: float, A: float, amp_gain: float | None) -> GaussianChannel:
    ch = GaussianChannel(np.eye(10), np.zeros((10, 10)), SINGLE_MODES, check=False)
    if A > 0:
        ch = ch.then(loss_channel(A, SINGLE_LIGHT))
    ch = ch.then(single_cell_pass(kappa).as_channel())
    if A > 0:
        ch = ch.then(loss_channel(A, SINGLE_LIGHT))
    ch = ch.then(recombination([("L", "M"), ("L~", "M~")]))
    if amp_gain is not None and amp_gain != 1.0:
        ch = ch.then(amplifier_channel(amp_gain, "L"))
    return ch


_SINGLE_RENAME = {"L": "out", "M": "aux", "L~": "out~", "M~": "aux~"}


def single_cell_readout(
    spec: SingleCellSpec, atomic_mean=None, atomic_cov=None
) -> ReadoutResult:
    """Run the single-cell readout of an atomic state (coherent by default)."""
    state = _input_state(SINGLE_MODES, {"A": _atomic(atomic_mean, atomic_cov)}, spec.squeeze)
    ch = single_cell_channel(spec)
    joint = apply_channel(state, ch).relabel(_SINGLE_RENAME)
    X = ch.X
    gain = X[0:2, 8:10].copy()
    mem_gain = X[8:10, 8:10].copy()
    mu_a = state.mean[8:10]
    return ReadoutResult(
        output=joint.reduced(["out"]),
        aux=joint.reduced(["aux"]),
        memory=joint.reduced(["A"]),
        nbar=added_noise(joint, "out"),
        fidelity=fidelity_coherent(joint, "out", READOUT_MAP @ mu_a),
        gain=gain,
        joint=joint,
        transfer=ch,
        memory_gain=mem_gain,
    )


def cloning_readout(kappa: float = math.sqrt(2.0)) -> ReadoutResult:
    """Lossless readout with p~_L, p~_M in the zero-variance limit."""
    sq = {"L~": Squeeze(math.inf, "p"), "M~": Squeeze(math.inf, "p")}
    return single_cell_readout(SingleCellSpec(kappa, squeeze=sq))


def _referred_noise(cov2: np.ndarray, gain2: np.ndarray) -> float:
    """Added physical variance per quadrature referred back to the input."""
    g2 = np.sum(gain2**2, axis=1)
    return float(np.mean(0.5 * np.diag(cov2) / g2 - 0.5))


def cloning_check(result: ReadoutResult) -> tuple[float, float, float]:
    """Input-referred added noise of the light clone and the memory clone and their product."""
    V1 = _referred_noise(result.output.cov, result.gain)
    V2 = _referred_noise(result.memory.cov, result.memory_gain)
    return V1, V2, V1 * V2


def symmetric_cloning_kappa() -> float:
    """Coupling at which the light and memory clones carry equal noise."""
    from scipy.optimize import brentq

    def diff(k):
        V1, V2, _ = cloning_check(cloning_readout(k))
        return V1 - V2

    return float(brentq(diff, 0.5, math.sqrt(2.0), xtol=1e-14))


# ---------------------------------------------------------------------------
# two cells


def two_cell_matrices(kappa1: float, kappa2: float) -> tuple[np.ndarray, np.ndarray]:
    """Cell matrices on ``r = (x_L^C, p_M^C, p_L^S, p~_L^S, p~_M^C, p_A1, p_A2)``."""
    q1, t1, k1 = kappa1**2 / 4, kappa1**2 / (4 * R3), kappa1 / math.sqrt(2.0)
    q2, t2, k2 = kappa2**2 / 4, kappa2**2 / (4 * R3), kappa2 / math.sqrt(2.0)
    S1 = np.eye(7)
    S1[0, :] = [1, -q1, q1, t1, -t1, k1, 0]
    S1[5, :] = [0, -k1, k1, 0, 0, 1, 0]
    S2 = np.eye(7)
    S2[0, :] = [1, -q2, -q2, -t2, -t2, 0, k2]
    S2[6, :] = [0, -k2, -k2, 0, 0, 0, 1]
    return S1, S2


def two_cell_pipeline(spec: TwoCellSpec) -> tuple[np.ndarray, float, float]:
    """Covariance bookkeeping on the seven coupled quadratures.

    One wall loss after the first cell and two around the second; returns
    ``(gamma_2, nbar, F)`` with ``nbar`` read off the cosine output quadrature.
    """
    if not spec.ratio_ok:
        warnings.warn(
            f"kappa2/kappa1 = {spec.kappa2 / spec.kappa1:.6g} differs from 1 - A = "
            f"{1 - spec.loss_A:.6g}; readout is not unit gain",
            stacklevel=2,
        )
    A = spec.loss_A
    S1, S2 = two_cell_matrices(spec.kappa1, spec.kappa2)
    SA = np.diag([math.sqrt(1 - A)] * 5 + [1.0, 1.0])
    G = np.diag([A] * 5 + [0.0, 0.0])
    g1 = SA @ S1 @ S1.T @ SA.T + G
    g2 = SA @ S2 @ (SA @ g1 @ SA.T + G) @ S2.T @ SA.T + G
    nbar = 0.25 * (g2[0, 0] + g2[1, 1] + 2 * g2[0, 1]) - 0.5
    return g2, float(nbar), float(1.0 / (1.0 + nbar))


def sideband_cell_map(kappa: float, sigma: int, atom: str) -> SymplecticTransform:
    """One cell acting on the sideband modes in the ``Omega T >> 1`` limit.

    ``sigma = +1`` for the cell whose spins precess as ``x' = Omega p`` and
    ``-1`` for the counter-rotating one; atoms are in the rotating frame.
    """
    if sigma not in (1, -1):
        raise ValueError("sigma must be +1 or -1")
    labels = SIDEBAND_LIGHT + (atom,)
    S = SymplecticTransform(np.eye(18), labels, check=False)
    M = np.eye(18)
    k, q, t, s = kappa / math.sqrt(2.0), kappa**2 / 4, kappa**2 / (4 * R3), float(sigma)
    a = atom
    rows = {
        "x_LC": {f"p_{a}": k, "p_MC": -q, "p_LS": s * q, "p_M~C": -t, "p_L~S": s * t},
        "x_L~C": {"p_MC": t, "p_LS": -s * t},
        "x_LS": {f"x_{a}": -s * k, "p_LC": -s * q, "p_MS": -q, "p_L~C": -s * t, "p_M~S": -t},
        "x_L~S": {"p_LC": s * t, "p_MS": t},
        "x_MC": {f"x_{a}": k, "p_LC": q, "p_MS": s * q, "p_L~C": t, "p_M~S": s * t},
        "x_M~C": {"p_LC": -t, "p_MS": -s * t},
        "x_MS": {f"p_{a}": s * k, "p_MC": -s * q, "p_LS": q, "p_M~C": -s * t, "p_L~S": t},
        "x_M~S": {"p_MC": s * t, "p_LS": -t},
        f"x_{a}": {"p_LC": k, "p_MS": s * k},
        f"p_{a}": {"p_MC": -k, "p_LS": s * k},
    }
    for row, cols in rows.items():
        for col, val in cols.items():
            M[S._qindex(row), S._qindex(col)] = val
    return SymplecticTransform(M, labels)


_CELL_LABELS = SIDEBAND_LIGHT + ("A1", "A2")


def _two_cell_core(kappa1: float, kappa2: float, A: float) -> GaussianChannel:
    """Both cells with wall losses, atoms in the (A1, A2) basis."""
    n = 2 * len(_CELL_LABELS)
    ch = GaussianChannel(np.eye(n), np.zeros((n, n)), _CELL_LABELS, check=False)
    ch = ch.then(sideband_cell_map(kappa1, +1, "A1").as_channel())
    if A > 0:
        wall = loss_channel(A, SIDEBAND_LIGHT)
        ch = ch.then(wall).then(wall)
    ch = ch.then(sideband_cell_map(kappa2, -1, "A2").as_channel())
    if A > 0:
        ch = ch.then(wall)
    return ch


def two_cell_relations(kappa: float) -> SymplecticTransform:
    """Lossless two-cell map on ``TWO_CELL_MODES`` (atoms as sum/difference modes)."""
    to_pm = beam_splitter("A1", "A2").as_channel().embed(_CELL_LABELS)
    ch = to_pm.then(_two_cell_core(kappa, kappa, 0.0)).then(to_pm)
    S = SymplecticTransform(ch.X, SIDEBAND_LIGHT + ("A+", "A-"))
    return S.reorder(TWO_CELL_MODES)


_TWO_RENAME = {
    "LC": "outC", "MC": "auxC", "LS": "outS", "MS": "auxS",
    "L~C": "outC~", "M~C": "auxC~", "L~S": "outS~", "M~S": "auxS~",
    "A1": "A+", "A2": "A-",
}


def two_cell_channel(spec: TwoCellSpec) -> GaussianChannel:
    """Complete two-cell map on (sideband light, A1, A2) slots; atoms enter and leave as A+/A-."""
    to_pm = beam_splitter("A1", "A2").as_channel().embed(_CELL_LABELS)
    ch = to_pm.then(_two_cell_core(spec.kappa1, spec.kappa2, spec.loss_A))
    pairs = [("LC", "MC"), ("LS", "MS"), ("L~C", "M~C"), ("L~S", "M~S")]
    return ch.then(recombination(pairs)).then(to_pm)


def two_cell_readout(
    spec: TwoCellSpec, atomic_mean=None, atomic_cov=None, diff_mean=None, diff_cov=None
) -> ReadoutResult:
    """Full sideband-mode two-cell readout.

    The stored state lives in the sum mode ``A+`` and is read from the cosine
    output ``outC``; ``nbar`` and ``fidelity`` refer to that mode.  ``gain``
    maps ``(A+, A-)`` means to ``(outC, outS)`` means.
    """
    # slots A1/A2 hold A+/A- at input; the leading beam splitter converts them
    state = _input_state(
        _CELL_LABELS,
        {"A1": _atomic(atomic_mean, atomic_cov), "A2": _atomic(diff_mean, diff_cov)},
        None,
    )
    ch = two_cell_channel(spec)
    joint = apply_channel(state, ch).relabel(_TWO_RENAME)
    X = ch.X
    out_idx = np.r_[0:4]  # LC, LS
    atom_idx = np.r_[16:20]
    mu_plus = state.mean[16:18]
    return ReadoutResult(
        output=joint.reduced(["outC", "outS"]),
        aux=joint.reduced(["auxC", "auxS"]),
        memory=joint.reduced(["A+", "A-"]),
        nbar=added_noise(joint, "outC"),
        fidelity=fidelity_coherent(joint, "outC", READOUT_MAP @ mu_plus),
        gain=X[np.ix_(out_idx, atom_idx)].copy(),
        joint=joint,
        transfer=ch,
        memory_gain=X[np.ix_(atom_idx, atom_idx)].copy(),
    )
