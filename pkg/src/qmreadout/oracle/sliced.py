"""Time-sliced brute-force model of the light-atom passage.

The pulse is cut into ``N`` slices per beam, each an independent mode with
vacuum covariance ``I``.  Slice ``k`` couples to the atoms with
``kappa_s = kappa / sqrt(N)``; nothing about temporal modes or the ``kappa^2``
cross terms is put in by hand.  Reduced maps come out by projecting onto
sampled profiles and are compared with the analytic transforms.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..gaussian import SymplecticTransform, symplectic_residual
from ..protocols import SINGLE_MODES, TWO_CELL_MODES, single_cell_pass, two_cell_relations
from ..temporal import TemporalProfile, orthogonalize, profile
from ._kernels import propagate

SCHEMES = ("single", "double")
SINGLE_THRESHOLD = 1e-3
TWO_CELL_THRESHOLD = 5e-3
SLICES_PER_OMEGA_T = 100
ORTHONORMAL_TOL = 1e-10
ROUNDING_FLOOR = 1e-12


def default_slices(omega_t: float) -> int:
    return int(math.ceil(SLICES_PER_OMEGA_T * omega_t))


@dataclass(frozen=True)
class SlicedSystem:
    """Symplectic map on ``2N`` light slices plus the atoms, held as an operator.

    Mode order is ``L_0..L_{N-1}, M_0..M_{N-1}`` followed by ``atoms``.  The
    dense matrix is never formed unless :meth:`to_matrix` is asked for.
    """

    scheme: str
    kappa: float
    N: int
    omega_t: float = 0.0
    use_numba: bool | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.kappa < 0:
            raise ValueError("kappa must be non-negative")
        if self.scheme == "double" and not self.omega_t > 0:
            raise ValueError("two-cell scheme needs omega_t > 0")

    @property
    def kappa_slice(self) -> float:
        return self.kappa / math.sqrt(self.N)

    @property
    def atoms(self) -> tuple[str, ...]:
        return ("A",) if self.scheme == "single" else ("A1", "A2")

    @property
    def sigma(self) -> np.ndarray:
        return np.array([1.0]) if self.scheme == "single" else np.array([1.0, -1.0])

    @property
    def theta(self) -> np.ndarray:
        return self.omega_t * (np.arange(self.N) + 0.5) / self.N

    @property
    def n_modes(self) -> int:
        return 2 * self.N + len(self.atoms)

    def propagate(self, xL, pL, xM, pM, xa, pa):
        """Push split column blocks through the slices; returns new arrays."""
        out = [np.array(a, dtype=float, copy=True) for a in (xL, pL, xM, pM, xa, pa)]
        propagate(*out, self.kappa_slice, self.theta, self.sigma, use_numba=self.use_numba)
        return tuple(out)

    def apply(self, vectors: np.ndarray) -> np.ndarray:
        """``S @ vectors`` for phase-space column vectors in interleaved order."""
        v = np.asarray(vectors, dtype=float)
        squeeze = v.ndim == 1
        v = v.reshape(2 * self.n_modes, -1)
        N = self.N
        blocks = (v[0:2 * N:2], v[1:2 * N:2], v[2 * N:4 * N:2], v[2 * N + 1:4 * N:2], v[4 * N::2], v[4 * N + 1::2])
        xL, pL, xM, pM, xa, pa = self.propagate(*blocks)
        out = np.empty_like(v)
        out[0:2 * N:2], out[1:2 * N:2] = xL, pL
        out[2 * N:4 * N:2], out[2 * N + 1:4 * N:2] = xM, pM
        out[4 * N::2], out[4 * N + 1::2] = xa, pa
        return out[:, 0] if squeeze else out

    def to_matrix(self, max_modes: int = 4096) -> np.ndarray:
        if self.n_modes > max_modes:
            raise MemoryError(f"{self.n_modes} modes exceeds the dense limit {max_modes}")
        return self.apply(np.eye(2 * self.n_modes))

    def labels(self) -> tuple[str, ...]:
        return tuple(f"L{k}" for k in range(self.N)) + tuple(f"M{k}" for k in range(self.N)) + self.atoms


def build_sliced_transform(scheme: str, kappa: float, N: int, omega_t: float | None = None,
                           use_numba: bool | None = None) -> SlicedSystem:
    if scheme == "single":
        omega_t = 0.0
    elif omega_t is None:
        raise ValueError("two-cell scheme needs omega_t")
    return SlicedSystem(scheme, float(kappa), int(N), float(omega_t), use_numba)


# ---------------------------------------------------------------------------
# projection


@dataclass(frozen=True)
class ModeSpec:
    """Where a reduced mode lives: a light beam with slice weights, or an atom combination."""

    beam: str
    weights: np.ndarray


def default_modes(sliced: SlicedSystem) -> dict[str, ModeSpec]:
    N = sliced.N
    if sliced.scheme == "single":
        if N < 2:
            raise ValueError("the f3 mode vanishes on a single slice; need N >= 2")
        f1, f3 = profile("flat", N), profile("f3", N)
        modes = {}
        for b in ("L", "M"):
            modes[b] = ModeSpec(b, f1.samples)
            modes[b + "~"] = ModeSpec(b, f3.samples)
        modes["A"] = ModeSpec("atoms", np.array([1.0]))
        return {k: modes[k] for k in SINGLE_MODES}
    wt = sliced.omega_t
    basis, _ = orthogonalize([profile(k, N, wt) for k in ("cosine", "sine", "f3_cosine", "f3_sine")])
    modes = {}
    for b in ("L", "M"):
        for name, prof in zip(("C", "S", "~C", "~S"), basis):
            label = b + name if not name.startswith("~") else b + "~" + name[1:]
            modes[label] = ModeSpec(b, prof.samples)
    r = 1.0 / math.sqrt(2.0)
    modes["A+"] = ModeSpec("atoms", np.array([r, r]))
    modes["A-"] = ModeSpec("atoms", np.array([r, -r]))
    return {k: modes[k] for k in TWO_CELL_MODES}


def profile_modes(sliced: SlicedSystem, profiles: Mapping[str, tuple[str, TemporalProfile]]) -> dict[str, ModeSpec]:
    """Light modes from ``{label: (beam, profile)}``; the atoms are appended unchanged."""
    modes = {}
    for label, (beam, prof) in profiles.items():
        if beam not in ("L", "M"):
            raise ValueError(f"unknown beam {beam!r}")
        if prof.N != sliced.N:
            raise ValueError(f"profile {label!r} has {prof.N} samples, expected {sliced.N}")
        modes[label] = ModeSpec(beam, prof.samples)
    eye = np.eye(len(sliced.atoms))
    for i, a in enumerate(sliced.atoms):
        modes[a] = ModeSpec("atoms", eye[i])
    return modes


@dataclass(frozen=True)
class Projection:
    transform: SymplecticTransform
    leakage: float
    symplectic_residual: float

    @property
    def matrix(self) -> np.ndarray:
        return self.transform.matrix


def _unit_columns(modes: Mapping[str, ModeSpec], N: int) -> dict[str, np.ndarray]:
    units = {}
    for label, m in modes.items():
        w = np.asarray(m.weights, dtype=float)
        units[label] = w if m.beam == "atoms" else w / math.sqrt(N)
    for beam in ("L", "M", "atoms"):
        group = [u for lab, u in units.items() if modes[lab].beam == beam]
        if group:
            G = np.array(group)
            err = np.abs(G @ G.T - np.eye(len(group))).max()
            if err > ORTHONORMAL_TOL:
                raise ValueError(f"projector set for {beam!r} is not orthonormal (error {err:.3e})")
    return units


def project(sliced: SlicedSystem, modes: Mapping[str, ModeSpec] | None = None) -> Projection:
    """Reduced map ``P S P^T`` on the listed modes.

    Only the ``2 n`` projected input columns are propagated.  ``leakage`` is
    the Frobenius norm of the part of ``S P^T`` outside the span of ``P``.
    """
    if modes is None:
        modes = default_modes(sliced)
    labels = tuple(modes)
    N, na = sliced.N, len(sliced.atoms)
    units = _unit_columns(modes, N)
    ncol = 2 * len(labels)
    z = lambda n: np.zeros((n, ncol))
    xL, pL, xM, pM, xa, pa = z(N), z(N), z(N), z(N), z(na), z(na)
    blocks = {"L": (xL, pL), "M": (xM, pM), "atoms": (xa, pa)}
    for i, lab in enumerate(labels):
        xb, pb = blocks[modes[lab].beam]
        xb[:, 2 * i] = units[lab]
        pb[:, 2 * i + 1] = units[lab]
    xL, pL, xM, pM, xa, pa = sliced.propagate(xL, pL, xM, pM, xa, pa)
    out = {"L": (xL, pL), "M": (xM, pM), "atoms": (xa, pa)}
    R = np.empty((ncol, ncol))
    leak2 = 0.0
    for beam, (xb, pb) in out.items():
        idx = [i for i, lab in enumerate(labels) if modes[lab].beam == beam]
        U = np.array([units[labels[i]] for i in idx]).reshape(len(idx), xb.shape[0])
        for quad, arr in ((0, xb), (1, pb)):
            coef = U @ arr
            for r, i in enumerate(idx):
                R[2 * i + quad] = coef[r]
            resid = arr - U.T @ coef
            leak2 += float(np.sum(resid * resid))
    leak = math.sqrt(leak2)
    return Projection(SymplecticTransform(R, labels, check=False), leak, symplectic_residual(R))


def reference_map(scheme: str, kappa: float) -> SymplecticTransform:
    return single_cell_pass(kappa) if scheme == "single" else two_cell_relations(kappa)


# ---------------------------------------------------------------------------
# convergence


@dataclass(frozen=True)
class ConvergenceRow:
    N: int
    deviation: float
    leakage: float
    symplectic_residual: float
    seconds: float


@dataclass(frozen=True)
class ConvergenceReport:
    scheme: str
    kappa: float
    omega_t: float
    rows: tuple[ConvergenceRow, ...]
    order: float
    monotone: bool

    @property
    def final_deviation(self) -> float:
        return self.rows[-1].deviation

    @property
    def threshold(self) -> float:
        return SINGLE_THRESHOLD if self.scheme == "single" else TWO_CELL_THRESHOLD

    @property
    def passed(self) -> bool:
        return self.final_deviation <= self.threshold


def fitted_order(Ns: Sequence[int], devs: Sequence[float]) -> float:
    """Least-squares slope of ``-log dev`` against ``log N``; ``nan`` if undefined.

    Deviations at the rounding floor carry no convergence information and are skipped.
    """
    pts = [(math.log(n), math.log(d)) for n, d in zip(Ns, devs) if d > ROUNDING_FLOOR]
    if len(pts) < 2:
        return float("nan")
    x, y = np.array(pts).T
    return float(-np.polyfit(x, y, 1)[0])


def convergence_report(scheme: str, kappa: float, Ns: Sequence[int], omega_t: float | None = None,
                       use_numba: bool | None = None) -> ConvergenceReport:
    Ns = [int(n) for n in Ns]
    if not Ns or any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValueError("Ns must be a non-empty increasing list")
    ref = reference_map(scheme, kappa).matrix
    rows = []
    for N in Ns:
        t0 = time.perf_counter()
        proj = project(build_sliced_transform(scheme, kappa, N, omega_t, use_numba))
        dt = time.perf_counter() - t0
        dev = float(np.abs(proj.matrix - ref).max())
        rows.append(ConvergenceRow(N, dev, proj.leakage, proj.symplectic_residual, dt))
    devs = [r.deviation for r in rows]
    floored = [max(d, ROUNDING_FLOOR) for d in devs]
    monotone = all(b <= a for a, b in zip(floored, floored[1:]))
    if not monotone:
        warnings.warn(f"deviation is not monotone in N: {devs}", RuntimeWarning, stacklevel=2)
    return ConvergenceReport(scheme, float(kappa), float(omega_t or 0.0), tuple(rows),
                             fitted_order(Ns, devs), monotone)
