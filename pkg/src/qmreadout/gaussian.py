"""Phase-space representation of multimode Gaussian states.

Conventions used throughout the package:

* quadratures are interleaved per mode, ``(x1, p1, x2, p2, ...)``;
* the covariance matrix is ``gamma_jk = <r_j r_k + r_k r_j> - 2 <r_j><r_k>``,
  so the vacuum has ``gamma = I`` and physical variances are ``gamma / 2``;
* a coherent amplitude ``alpha`` corresponds to the mean ``sqrt(2) (Re alpha, Im alpha)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

SYMPLECTIC_TOL = 1e-12
CP_TOL = 1e-10

_J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


class SymplecticError(ValueError):
    """Matrix fails the symplectic condition."""


class CPViolation(ValueError):
    """Channel pair (X, Y) is not completely positive."""


@lru_cache(maxsize=None)
def omega(n_modes: int) -> np.ndarray:
    """Symplectic form for ``n_modes`` modes in interleaved ordering (read-only)."""
    W = np.kron(np.eye(n_modes), _J2)
    W.flags.writeable = False
    return W


def _asymmetry(M: np.ndarray) -> float:
    return float(np.max(np.abs(M - M.T))) if M.size else 0.0


def coherent_mean(alpha: complex) -> np.ndarray:
    return np.sqrt(2.0) * np.array([alpha.real, alpha.imag])


def symplectic_residual(S: np.ndarray) -> float:
    """Frobenius norm of ``S Omega S^T - Omega``."""
    W = omega(S.shape[0] // 2)
    return float(np.linalg.norm(S @ W @ S.T - W))


def cp_min_eigenvalue(X: np.ndarray, Y: np.ndarray) -> float:
    """Smallest eigenvalue of ``Y + i Omega - i X Omega X^T``."""
    W = omega(X.shape[0] // 2)
    M = Y + 1j * W - 1j * (X @ W @ X.T)
    return float(np.linalg.eigvalsh(M)[0])


def _quadrature_index(labels: Sequence[str], targets: Iterable[str]) -> np.ndarray:
    pos = {lab: i for i, lab in enumerate(labels)}
    idx = []
    for t in targets:
        if t not in pos:
            raise KeyError(f"mode {t!r} not present in {list(labels)}")
        idx.extend((2 * pos[t], 2 * pos[t] + 1))
    return np.asarray(idx, dtype=np.intp)


def _check_labels(labels: tuple[str, ...]) -> None:
    if len(set(labels)) != len(labels):
        raise ValueError(f"duplicate mode labels: {labels}")


@dataclass(frozen=True)
class GaussianState:
    """Mean vector and covariance matrix over labelled modes.

    The constructor does not insist on physicality so that limiting cases
    (zero-variance quadratures) can be represented; use :meth:`is_physical`.
    """

    labels: tuple[str, ...]
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        _check_labels(labels)
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = np.array(self.cov, dtype=float)
        n = 2 * len(labels)
        if mean.shape != (n,) or cov.shape != (n, n):
            raise ValueError(
                f"expected mean ({n},) and cov ({n},{n}); got {mean.shape}, {cov.shape}"
            )
        if _asymmetry(cov) > 1e-12 * max(1.0, float(np.max(np.abs(cov)))):
            raise ValueError("covariance matrix is not symmetric")
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @classmethod
    def vacuum(cls, labels: Sequence[str]) -> "GaussianState":
        n = len(labels)
        return cls(tuple(labels), np.zeros(2 * n), np.eye(2 * n))

    @classmethod
    def coherent(cls, label: str, alpha: complex = 0.0) -> "GaussianState":
        return cls((label,), coherent_mean(complex(alpha)), np.eye(2))

    @property
    def n_modes(self) -> int:
        return len(self.labels)

    def index(self, labels: Iterable[str]) -> np.ndarray:
        return _quadrature_index(self.labels, labels)

    def reduced(self, labels: Sequence[str]) -> "GaussianState":
        idx = self.index(labels)
        return GaussianState(tuple(labels), self.mean[idx], self.cov[np.ix_(idx, idx)])

    def mode_mean(self, label: str) -> np.ndarray:
        return self.mean[self.index([label])]

    def mode_cov(self, label: str) -> np.ndarray:
        idx = self.index([label])
        return self.cov[np.ix_(idx, idx)]

    def relabel(self, mapping: dict[str, str]) -> "GaussianState":
        return GaussianState(
            tuple(mapping.get(lab, lab) for lab in self.labels), self.mean, self.cov
        )

    def tensor(self, other: "GaussianState") -> "GaussianState":
        n, m = 2 * self.n_modes, 2 * other.n_modes
        cov = np.zeros((n + m, n + m))
        cov[:n, :n] = self.cov
        cov[n:, n:] = other.cov
        return GaussianState(
            self.labels + other.labels, np.concatenate([self.mean, other.mean]), cov
        )

    def is_physical(self, tol: float = CP_TOL) -> bool:
        M = self.cov + 1j * omega(self.n_modes)
        return bool(np.linalg.eigvalsh(M)[0] >= -tol)


@dataclass(frozen=True)
class SymplecticTransform:
    """Gaussian unitary ``r -> S r`` acting on the modes ``labels``."""

    matrix: np.ndarray
    labels: tuple[str, ...]
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        _check_labels(labels)
        S = np.array(self.matrix, dtype=float)
        if S.shape != (2 * len(labels), 2 * len(labels)):
            raise ValueError(f"matrix shape {S.shape} does not match {len(labels)} modes")
        if self.check:
            # rounding in S Omega S^T grows with the squared entry size
            res = symplectic_residual(S)
            scale = max(1.0, float(np.max(np.abs(S))) ** 2) if S.size else 1.0
            if res > SYMPLECTIC_TOL * scale:
                raise SymplecticError(f"matrix is not symplectic (residual {res:.3e})")
        S.flags.writeable = False
        object.__setattr__(self, "matrix", S)

    def entry(self, row: str, col: str) -> float:
        """Coefficient of input quadrature ``col`` in output quadrature ``row``.

        Quadratures are named ``"x_L"``, ``"p_M~"`` etc.
        """
        return float(self.matrix[self._qindex(row), self._qindex(col)])

    def _qindex(self, name: str) -> int:
        quad, _, label = name.partition("_")
        return 2 * self.labels.index(label) + (0 if quad == "x" else 1)

    def reorder(self, labels: Sequence[str]) -> "SymplecticTransform":
        idx = _quadrature_index(self.labels, labels)
        return SymplecticTransform(self.matrix[np.ix_(idx, idx)], tuple(labels), check=False)

    def as_channel(self) -> "GaussianChannel":
        n = self.matrix.shape[0]
        return GaussianChannel(self.matrix, np.zeros((n, n)), self.labels, check=False)


@dataclass(frozen=True)
class GaussianChannel:
    """Gaussian CP map ``gamma -> X gamma X^T + Y``, ``mean -> X mean``."""

    X: np.ndarray
    Y: np.ndarray
    labels: tuple[str, ...]
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        _check_labels(labels)
        X = np.array(self.X, dtype=float)
        Y = np.array(self.Y, dtype=float)
        n = 2 * len(labels)
        if X.shape != (n, n) or Y.shape != (n, n):
            raise ValueError(f"X, Y must be {n}x{n}")
        if self.check:
            if _asymmetry(Y) > 1e-12 * max(1.0, float(np.max(np.abs(Y)))):
                raise ValueError("Y must be symmetric")
            ev = cp_min_eigenvalue(X, Y)
            if ev < -CP_TOL:
                raise CPViolation(f"channel is not completely positive (min eig {ev:.3e})")
        X.flags.writeable = False
        Y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    def embed(self, labels: Sequence[str]) -> "GaussianChannel":
        """Extend to act on ``labels`` (a superset), identity elsewhere."""
        labels = tuple(labels)
        idx = _quadrature_index(labels, self.labels)
        n = 2 * len(labels)
        X = np.eye(n)
        Y = np.zeros((n, n))
        X[np.ix_(idx, idx)] = self.X
        Y[np.ix_(idx, idx)] = self.Y
        return GaussianChannel(X, Y, labels, check=False)

    def then(self, other: "GaussianChannel") -> "GaussianChannel":
        """Composition: apply ``self`` first, then ``other``, on the union of modes."""
        first = self
        if other.labels != first.labels:
            labels = first.labels + tuple(l for l in other.labels if l not in first.labels)
            first = first.embed(labels) if labels != first.labels else first
            other = other.embed(labels)
        X = other.X @ first.X
        Y = other.X @ first.Y @ other.X.T + other.Y
        return GaussianChannel(X, 0.5 * (Y + Y.T), first.labels, check=False)


def _as_channel(op: SymplecticTransform | GaussianChannel) -> GaussianChannel:
    return op.as_channel() if isinstance(op, SymplecticTransform) else op


def apply_unitary(state: GaussianState, S: SymplecticTransform) -> GaussianState:
    """``gamma -> S gamma S^T`` and ``mean -> S mean`` on the targeted modes."""
    if not isinstance(S, SymplecticTransform):
        raise TypeError("apply_unitary expects a SymplecticTransform")
    idx = state.index(S.labels)
    M = S.matrix
    mean = state.mean.copy()
    mean[idx] = M @ mean[idx]
    cov = state.cov.copy()
    cov[idx, :] = M @ cov[idx, :]
    cov[:, idx] = cov[:, idx] @ M.T
    return GaussianState(state.labels, mean, 0.5 * (cov + cov.T))


def apply_channel(state: GaussianState, ch: SymplecticTransform | GaussianChannel) -> GaussianState:
    """``gamma -> X gamma X^T + Y`` and ``mean -> X mean`` on the targeted modes."""
    ch = _as_channel(ch)
    idx = state.index(ch.labels)
    mean = state.mean.copy()
    mean[idx] = ch.X @ mean[idx]
    cov = state.cov.copy()
    cov[idx, :] = ch.X @ cov[idx, :]
    cov[:, idx] = cov[:, idx] @ ch.X.T
    cov[np.ix_(idx, idx)] += ch.Y
    return GaussianState(state.labels, mean, 0.5 * (cov + cov.T))


def _labels(modes: str | Sequence[str]) -> tuple[str, ...]:
    return (modes,) if isinstance(modes, str) else tuple(modes)


def loss_channel(A: float, modes: str | Sequence[str]) -> GaussianChannel:
    """Beam-splitter loss mixing in vacuum with intensity fraction ``A``."""
    if not 0.0 <= A <= 1.0:
        raise ValueError(f"loss coefficient must lie in [0, 1], got {A}")
    labels = _labels(modes)
    n = 2 * len(labels)
    return GaussianChannel(np.sqrt(1.0 - A) * np.eye(n), A * np.eye(n), labels)


def amplifier_channel(G: float, modes: str | Sequence[str]) -> GaussianChannel:
    """Phase-insensitive amplifier with intensity gain ``G >= 1``."""
    if not G >= 1.0:
        raise ValueError(f"amplifier gain must be >= 1, got {G}")
    labels = _labels(modes)
    n = 2 * len(labels)
    return GaussianChannel(np.sqrt(G) * np.eye(n), (G - 1.0) * np.eye(n), labels)


def beam_splitter(i: str, j: str) -> SymplecticTransform:
    """Balanced beam splitter; mode ``i`` becomes ``(i + j)/sqrt2``, ``j`` becomes ``(i - j)/sqrt2``.

    Preceded by :func:`wave_plate` on ``j`` this gives the readout arm
    ``x = (x_i + p_j)/sqrt2``, ``p = (p_i - x_j)/sqrt2`` in mode ``i``.
    """
    if i == j:
        raise ValueError("beam splitter needs two distinct modes")
    B = np.kron(np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0), np.eye(2))
    return SymplecticTransform(B, (i, j))


def wave_plate(mode: str) -> SymplecticTransform:
    """Quarter-turn phase-space rotation ``x -> p``, ``p -> -x``."""
    return SymplecticTransform(_J2.copy(), (mode,))


def squeezer(mode: str, r: float, axis: str = "x") -> SymplecticTransform:
    """Squeeze the ``axis`` quadrature by ``exp(-r)``, stretch the other by ``exp(r)``."""
    if not np.isfinite(r):
        raise ValueError("squeezing parameter must be finite")
    if axis == "x":
        d = [np.exp(-r), np.exp(r)]
    elif axis == "p":
        d = [np.exp(r), np.exp(-r)]
    else:
        raise ValueError(f"axis must be 'x' or 'p', got {axis!r}")
    return SymplecticTransform(np.diag(d), (mode,))


def phase_rotation(mode: str, theta: float) -> SymplecticTransform:
    c, s = np.cos(theta), np.sin(theta)
    return SymplecticTransform(np.array([[c, s], [-s, c]]), (mode,))


def added_noise_per_quadrature(state: GaussianState, mode: str) -> tuple[float, float]:
    """Added thermal photons ``gamma_qq/2 - 1/2`` for ``x`` and ``p`` separately."""
    g = state.mode_cov(mode)
    nx, np_ = 0.5 * g[0, 0] - 0.5, 0.5 * g[1, 1] - 0.5
    if min(nx, np_) < -CP_TOL:
        raise ValueError(
            f"negative added noise ({nx:.3e}, {np_:.3e}); covariance convention is off"
        )
    return nx, np_


def added_noise(state: GaussianState, mode: str) -> float:
    """Mean thermal photon number ``(gamma_xx + gamma_pp)/4 - 1/2`` of a unit-gain output.

    For asymmetric noise this is the quadrature average; see
    :func:`added_noise_per_quadrature`.
    """
    nx, np_ = added_noise_per_quadrature(state, mode)
    return 0.5 * (nx + np_)


def fidelity_coherent(state: GaussianState, mode: str, target_mean) -> float:
    """Overlap of ``mode`` with the coherent state of mean ``target_mean``."""
    V = 0.5 * state.mode_cov(mode) + 0.5 * np.eye(2)
    delta = state.mode_mean(mode) - np.asarray(target_mean, dtype=float)
    det = np.linalg.det(V)
    if not det > 0.0:
        raise ArithmeticError("singular covariance sum in fidelity evaluation")
    q = delta @ np.linalg.solve(V, delta)
    return float(np.exp(-0.5 * q) / np.sqrt(det))
