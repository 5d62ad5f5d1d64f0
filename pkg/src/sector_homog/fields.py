"""Heterogeneous 2x2 SPD coefficient fields on the plane.

All fields here are pointwise isotropic (scalar times identity), which is the
setting of the experiments; the constant variant carries a full matrix so the
assembly path for genuine matrices stays exercised.  Evaluation is vectorized:
``eval_coeff(field, pts)`` maps an ``(n, 2)`` batch to ``(n, 2, 2)``.

Periodic variants expose their unit-cell structure through ``cell_scalar_at``
(scalar on the unit torus), the physical period, and a rotation; the unit-cell
solver works in cell coordinates and physical-space users pull results back
via ``x -> S^T x / period``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import NotNormalizableError

DEFAULT_KAPPA = 1.5
DEFAULT_ROTATION = 0.35


def rotation_matrix(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def default_periodic_cell(kappa: float = DEFAULT_KAPPA) -> Callable:
    """Smooth unit-periodic scalar y -> exp(kappa sin(2 pi y1) sin(2 pi y2)).

    Symmetric under the coordinate swap y1 <-> y2 and under
    (y1, y2) -> (-y1, y2 + 1/2), which together force the homogenized matrix
    of the induced isotropic field to be a scalar multiple of the identity.
    """

    def cell(y):
        y = np.asarray(y, dtype=float)
        return np.exp(kappa * np.sin(2.0 * np.pi * y[..., 0]) * np.sin(2.0 * np.pi * y[..., 1]))

    cell.kappa = kappa
    return cell


def _scalar_to_matrix(vals: np.ndarray) -> np.ndarray:
    out = np.zeros(vals.shape + (2, 2))
    out[..., 0, 0] = vals
    out[..., 1, 1] = vals
    return out


@dataclass(frozen=True)
class ConstantField:
    """a(x) = M, a fixed SPD matrix."""

    matrix: np.ndarray = None

    def __post_init__(self):
        m = np.eye(2) if self.matrix is None else np.asarray(self.matrix, dtype=float)
        if m.shape != (2, 2) or not np.allclose(m, m.T):
            raise ValueError("constant coefficient must be a symmetric 2x2 matrix")
        object.__setattr__(self, "matrix", m)

    oscillation_scale = math.inf  # nothing to resolve

    @property
    def ellipticity(self) -> float:
        w = np.linalg.eigvalsh(self.matrix)
        return float(min(w[0], 1.0 / w[1]))

    def eval(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return np.broadcast_to(self.matrix, pts.shape[:-1] + (2, 2)).copy()

    def scalar_values(self, pts):
        pts = np.asarray(pts, dtype=float)
        if not np.allclose(self.matrix, self.matrix[0, 0] * np.eye(2)):
            raise ValueError("constant field is not isotropic")
        return np.full(pts.shape[:-1], self.matrix[0, 0])

    def normalized(self, c: float) -> "ConstantField":
        return ConstantField(self.matrix / c)

    def describe(self) -> dict:
        return {"kind": "constant", "matrix": self.matrix.tolist()}


@dataclass(frozen=True)
class RotatedPeriodicField:
    """a(x) = cell(S^T x / epsilon) * Id / normalization.

    ``cell`` is a unit-periodic positive scalar, S the rotation by
    ``rotation`` radians, so the field is (epsilon S Q_1)-periodic and no
    lattice direction aligns with the sector edges for generic angles.
    """

    cell: Callable
    rotation: float = DEFAULT_ROTATION
    epsilon: float = 1.0
    normalization: float = 1.0

    @property
    def oscillation_scale(self) -> float:
        return self.epsilon

    @property
    def S(self) -> np.ndarray:
        return rotation_matrix(self.rotation)

    @property
    def ellipticity(self) -> float:
        kappa = getattr(self.cell, "kappa", None)
        if kappa is not None:
            return math.exp(-kappa) / self.normalization
        ys = np.linspace(0.0, 1.0, 257)
        grid = np.stack(np.meshgrid(ys, ys, indexing="ij"), axis=-1)
        return float(np.min(self.cell(grid)) / self.normalization)

    def cell_scalar_at(self, y):
        """Scalar value on the unit torus (cell coordinates)."""
        return np.asarray(self.cell(np.asarray(y, dtype=float))) / self.normalization

    def to_cell_coords(self, pts):
        pts = np.asarray(pts, dtype=float)
        return pts @ self.S / self.epsilon  # row-vector form of S^T x / eps

    def scalar_values(self, pts):
        return self.cell_scalar_at(self.to_cell_coords(pts))

    def eval(self, pts) -> np.ndarray:
        return _scalar_to_matrix(self.scalar_values(pts))

    def normalized(self, c: float) -> "RotatedPeriodicField":
        return replace(self, normalization=self.normalization * c)

    def describe(self) -> dict:
        return {"kind": "rotated-periodic", "kappa": getattr(self.cell, "kappa", None),
                "rotation": self.rotation, "epsilon": self.epsilon,
                "normalization": self.normalization}


def _hash01(i: np.ndarray, j: np.ndarray, seed: int) -> np.ndarray:
    """Deterministic uniform-ish bit per integer cell (splitmix-style)."""
    with np.errstate(over="ignore"):  # uint64 wrap-around is the point
        z = (i.astype(np.uint64) * np.uint64(0x9E3779B97F4A7C15)
             ^ j.astype(np.uint64) * np.uint64(0xC2B2AE3D27D4EB4F)
             ^ np.uint64(seed & 0xFFFFFFFF) * np.uint64(0xD6E8FEB86659FD93))
        z ^= z >> np.uint64(33)
        z *= np.uint64(0xFF51AFD7ED558CCD)
        z ^= z >> np.uint64(33)
    return (z >> np.uint64(63)).astype(bool)


@dataclass(frozen=True)
class CheckerboardField:
    """Square tiles of side epsilon with values sqrt(c) / 1/sqrt(c).

    seed == 0 gives the deterministic parity checkerboard (period 2*epsilon),
    whose homogenized matrix is exactly the identity by self-duality.  A
    nonzero seed samples tiles independently at random; the cell problem then
    periodizes a block of ``cells_per_period`` tiles, which is the reported
    approximation for such samples.
    """

    contrast: float = 4.0
    epsilon: float = 1.0
    seed: int = 0
    cells_per_period: int = 8

    def __post_init__(self):
        if self.contrast <= 1.0:
            raise ValueError("contrast must exceed 1")

    @property
    def oscillation_scale(self) -> float:
        return self.epsilon

    @property
    def S(self) -> np.ndarray:
        return np.eye(2)

    @property
    def ellipticity(self) -> float:
        return 1.0 / math.sqrt(self.contrast)

    @property
    def period(self) -> float:
        q = 2 if self.seed == 0 else self.cells_per_period
        return q * self.epsilon

    def _tile_high(self, i, j):
        if self.seed == 0:
            return (i + j) % 2 == 0
        q = self.cells_per_period
        return _hash01(np.mod(i, q), np.mod(j, q), self.seed)

    def scalar_values(self, pts):
        pts = np.asarray(pts, dtype=float)
        i = np.floor(pts[..., 0] / self.epsilon).astype(np.int64)
        j = np.floor(pts[..., 1] / self.epsilon).astype(np.int64)
        hi = self._tile_high(i, j)
        root = math.sqrt(self.contrast)
        return np.where(hi, root, 1.0 / root)

    def eval(self, pts) -> np.ndarray:
        return _scalar_to_matrix(self.scalar_values(pts))

    def cell_scalar_at(self, y):
        """Scalar on the unit torus: one period of tiles mapped to [0,1)^2."""
        y = np.mod(np.asarray(y, dtype=float), 1.0)
        q = 2 if self.seed == 0 else self.cells_per_period
        i = np.minimum(np.floor(y[..., 0] * q), q - 1).astype(np.int64)
        j = np.minimum(np.floor(y[..., 1] * q), q - 1).astype(np.int64)
        hi = self._tile_high(i, j)
        root = math.sqrt(self.contrast)
        return np.where(hi, root, 1.0 / root)

    def to_cell_coords(self, pts):
        return np.asarray(pts, dtype=float) / self.period

    def normalized(self, c: float):
        if abs(c - 1.0) > 0.05:
            raise NotNormalizableError(
                "checkerboard is self-dual; a normalization this far from 1 signals a bad abar")
        return GenericPeriodicField(
            cell=lambda y: self.cell_scalar_at(y) / c,
            rotation=0.0, period=self.period,
            ellipticity=self.ellipticity / c,
            description={**self.describe(), "normalization": c})

    def describe(self) -> dict:
        return {"kind": "checkerboard", "contrast": self.contrast,
                "epsilon": self.epsilon, "seed": self.seed}


@dataclass(frozen=True)
class GenericPeriodicField:
    """Isotropic field from an arbitrary periodic scalar sampler (test rig)."""

    cell: Callable
    rotation: float = 0.0
    period: float = 1.0
    ellipticity: float = 0.1
    description: dict = None

    @property
    def oscillation_scale(self) -> float:
        return self.period

    @property
    def S(self) -> np.ndarray:
        return rotation_matrix(self.rotation)

    @property
    def epsilon(self) -> float:
        return self.period

    def cell_scalar_at(self, y):
        return np.asarray(self.cell(np.asarray(y, dtype=float)), dtype=float)

    def to_cell_coords(self, pts):
        pts = np.asarray(pts, dtype=float)
        return pts @ self.S / self.period

    def scalar_values(self, pts):
        return self.cell_scalar_at(self.to_cell_coords(pts))

    def eval(self, pts) -> np.ndarray:
        return _scalar_to_matrix(self.scalar_values(pts))

    def normalized(self, c: float) -> "GenericPeriodicField":
        inner = self.cell
        return replace(self, cell=lambda y: np.asarray(inner(y)) / c,
                       ellipticity=self.ellipticity / c)

    def describe(self) -> dict:
        return dict(self.description or {"kind": "generic-periodic", "period": self.period})


def eval_coeff(field, x) -> np.ndarray:
    """Symmetric 2x2 coefficient at a point or an (n, 2) batch."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    out = field.eval(x[None, :] if single else x)
    return out[0] if single else out


def identity_deviation(abar: np.ndarray) -> float:
    """Frobenius distance |abar - Id|."""
    return float(np.linalg.norm(np.asarray(abar) - np.eye(2)))


def normalize_to_identity(field, abar: np.ndarray):
    """Rescale the field by the mean diagonal of its homogenized matrix.

    Rejects matrices whose anisotropy exceeds 10% of the trace: rescaling by a
    scalar cannot repair a genuinely anisotropic effective matrix.
    """
    abar = np.asarray(abar, dtype=float)
    trace = abar[0, 0] + abar[1, 1]
    aniso = abs(abar[0, 0] - abar[1, 1]) + 2.0 * abs(abar[0, 1])
    if aniso > 0.1 * trace:
        raise NotNormalizableError(
            f"homogenized matrix too anisotropic to rescale: deviation {aniso:.3g} "
            f"vs trace {trace:.3g}")
    return field.normalized(0.5 * trace)
