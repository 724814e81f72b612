"""Periodic spatial grids and the momentum lattices derived from them.

All solvers in this package live on a 3-axis periodic box.  Axes with a
single grid point are *degenerate*: fields are constant along them, they
carry unit quadrature measure, and the associated momentum is frozen to 0.
This keeps the full 4x4 matrix structure while letting quasi-1D and
quasi-2D runs stay cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Periodic box: per-axis lengths and point counts.

    Quadrature convention: degenerate axes (a single point) contribute a
    factor 1 to the cell measure, so integrals are effectively taken over
    the non-degenerate axes only.
    """

    lengths: tuple[float, float, float]
    shape: tuple[int, int, int]

    def __post_init__(self):
        if len(self.lengths) != 3 or len(self.shape) != 3:
            raise ValueError("grid is always 3-axis (use single-point axes to reduce)")
        for L, n in zip(self.lengths, self.shape):
            if L <= 0 or n < 1:
                raise ValueError(f"invalid axis: length={L}, points={n}")

    @property
    def degenerate(self) -> tuple[bool, bool, bool]:
        return tuple(n == 1 for n in self.shape)

    @property
    def d_eff(self) -> int:
        """Number of non-degenerate axes."""
        return sum(n > 1 for n in self.shape)

    @property
    def spacing(self) -> tuple[float, float, float]:
        return tuple(L / n for L, n in zip(self.lengths, self.shape))

    @property
    def cell(self) -> float:
        """Spatial quadrature weight (product of spacings over non-degenerate axes)."""
        out = 1.0
        for L, n in zip(self.lengths, self.shape):
            if n > 1:
                out *= L / n
        return out

    def axis_coords(self, axis: int) -> np.ndarray:
        n = self.shape[axis]
        return np.arange(n) * (self.lengths[axis] / n)

    def coords(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Meshgrid ('ij') of the three coordinate axes."""
        return np.meshgrid(*(self.axis_coords(a) for a in range(3)), indexing="ij")

    def freq(self, axis: int) -> np.ndarray:
        """Physical Fourier frequencies 2*pi*fftfreq for one axis (0 if degenerate)."""
        n = self.shape[axis]
        if n == 1:
            return np.zeros(1)
        return 2 * np.pi * np.fft.fftfreq(n, d=self.lengths[axis] / n)

    def freq_mesh(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return np.meshgrid(*(self.freq(a) for a in range(3)), indexing="ij")

    def momentum_spacing(self, eps: float) -> tuple[float, float, float]:
        """Spacing of the eps-scaled momentum lattice 2*pi*eps/L per axis."""
        return tuple(2 * np.pi * eps / L for L in self.lengths)

    def wigner_xi(self, eps: float, axis: int) -> np.ndarray:
        """The Wigner xi lattice for one axis, fft-ordered.

        Spacing is pi*eps/L: half of the eps-scaled momentum lattice, because
        the transform shifts by half grid cells in the y variable.
        """
        n = self.shape[axis]
        if n == 1:
            return np.zeros(1)
        return np.pi * eps / self.lengths[axis] * np.fft.fftfreq(n, d=1.0 / n)

    def wigner_xi_spacing(self, eps: float) -> float:
        """Phase-space xi cell (product of pi*eps/L over non-degenerate axes)."""
        out = 1.0
        for L, n in zip(self.lengths, self.shape):
            if n > 1:
                out *= np.pi * eps / L
        return out

    def to_dict(self) -> dict:
        return {"lengths": list(self.lengths), "shape": list(self.shape)}

    @classmethod
    def from_dict(cls, d: dict) -> "Grid":
        return cls(lengths=tuple(float(x) for x in d["lengths"]),
                   shape=tuple(int(x) for x in d["shape"]))


def quasi_1d(n: int, length: float = 2 * np.pi) -> Grid:
    """Box degenerate along axes 1 and 2, resolved along axis 3."""
    return Grid(lengths=(length, length, length), shape=(1, 1, n))
