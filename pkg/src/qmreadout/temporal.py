"""Sampled temporal pulse profiles on a uniform midpoint grid."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

GRAM_TOL = 1e-12


class RankError(ValueError):
    """Profiles are linearly dependent on the sampling grid."""


def midpoints(N: int) -> np.ndarray:
    """Slice midpoints ``t_k / T = (k + 1/2) / N``."""
    return (np.arange(N) + 0.5) / N


@dataclass(frozen=True)
class TemporalProfile:
    """Samples of ``f(t)`` at slice midpoints, normalised so ``(1/T) sum f^2 dt = 1``.

    ``shape`` is the continuous profile as a function of ``s = t/T`` (already
    carrying the normalisation scale) and is kept for point evaluation.
    """

    samples: np.ndarray
    T: float = 1.0
    kind: str = "custom"
    shape: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        s = np.array(self.samples, dtype=float).reshape(-1)
        if s.size < 1:
            raise ValueError("profile needs at least one slice")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @property
    def N(self) -> int:
        return self.samples.size

    def __call__(self, t):
        """Evaluate the continuous profile at time ``t`` in ``[0, T]``."""
        if self.shape is None:
            raise TypeError("profile has no continuous shape")
        return self.shape(np.asarray(t, dtype=float) / self.T)


def _shape(kind: str, omega_t: float | None) -> Callable[[np.ndarray], np.ndarray]:
    r3 = np.sqrt(3.0)
    r2 = np.sqrt(2.0)
    if kind == "flat":
        return lambda s: np.ones_like(s)
    if kind == "ramp":
        return lambda s: r3 * (1.0 - s)
    if kind == "f3":
        return lambda s: r3 * (1.0 - 2.0 * s)
    if kind in ("cosine", "sine", "f3_cosine", "f3_sine"):
        if omega_t is None or not omega_t > 0:
            raise ValueError(f"{kind!r} profile needs omega_t > 0")
        carrier = np.cos if kind.endswith("cosine") else np.sin
        if kind.startswith("f3"):
            return lambda s: r2 * r3 * (1.0 - 2.0 * s) * carrier(omega_t * s)
        return lambda s: r2 * carrier(omega_t * s)
    raise ValueError(f"unknown profile kind {kind!r}")


def profile(kind: str, N: int, omega_t: float | None = None, T: float = 1.0) -> TemporalProfile:
    """Build a named profile sampled on ``N`` slices.

    Kinds: ``flat`` (1), ``ramp`` (sqrt3 (1 - t/T)), ``f3`` (sqrt3 (1 - 2t/T)),
    ``cosine``/``sine`` (sqrt2 cos/sin(Omega t)) and the ``f3_cosine``/``f3_sine``
    sideband versions of ``f3``.

    Samples are rescaled so the midpoint norm is exactly one; the scale differs
    from one by ``O(1/N^2)`` for the polynomial kinds and ``O(1/(Omega T))`` for
    the sideband kinds.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    base = _shape(kind, omega_t)
    raw = base(midpoints(N))
    norm2 = float(np.mean(raw**2))
    if norm2 == 0.0:
        scale = 1.0
    else:
        scale = 1.0 / np.sqrt(norm2)
    return TemporalProfile(raw * scale, T, kind, lambda s, b=base, c=scale: c * b(s))


def inner(f: TemporalProfile, g: TemporalProfile) -> float:
    """``(1/T) int f g dt`` by the midpoint rule."""
    if f.N != g.N or f.T != g.T:
        raise ValueError(f"grid mismatch: N={f.N},{g.N} T={f.T},{g.T}")
    return float(np.dot(f.samples, g.samples) / f.N)


def orthogonalize(fs: Sequence[TemporalProfile]) -> tuple[list[TemporalProfile], np.ndarray]:
    """Gram-Schmidt on ``fs``.

    Returns the orthonormal basis and the coefficient matrix ``C`` with
    ``fs[i] = sum_j C[i, j] basis[j]`` (lower triangular).
    """
    if not fs:
        raise ValueError("need at least one profile")
    gram = np.array([[inner(a, b) for b in fs] for a in fs])
    if np.linalg.det(gram) < GRAM_TOL:
        raise RankError(f"profiles are linearly dependent (Gram det {np.linalg.det(gram):.3e})")
    basis: list[TemporalProfile] = []
    C = np.zeros((len(fs), len(fs)))
    for i, f in enumerate(fs):
        v = f.samples.copy()
        for j, b in enumerate(basis):
            C[i, j] = np.dot(f.samples, b.samples) / f.N
            v -= C[i, j] * b.samples
        # second pass keeps orthogonality at rounding level
        for j, b in enumerate(basis):
            c = np.dot(v, b.samples) / f.N
            C[i, j] += c
            v -= c * b.samples
        nrm = np.sqrt(np.dot(v, v) / f.N)
        C[i, i] = nrm
        basis.append(TemporalProfile(v / nrm, f.T, f"orth({f.kind})"))
    return basis, C


def mode_projector(prof: TemporalProfile, n_slices: int | None = None) -> np.ndarray:
    """Unit vector ``c_k ∝ f(t_k)`` mapping slice quadratures onto the profile's mode."""
    if n_slices is not None and n_slices != prof.N:
        raise ValueError(f"profile has {prof.N} samples, expected {n_slices}")
    nrm = np.linalg.norm(prof.samples)
    if nrm == 0.0:
        raise ValueError("cannot project onto a zero profile")
    return prof.samples / nrm
