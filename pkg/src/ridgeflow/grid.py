"""Periodic grids, Fourier differentiation and trapezoid quadrature.

Every discrete L2 inner product in this package is defined by the
quadrature weights stored here.  Grids are uniform and periodic (the
right endpoint is identified with the left one), which makes the
trapezoid rule spectrally accurate and the weight matrix a scalar.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Grid1D",
    "ProductGrid",
    "make_periodic_grid",
    "fourier_diff_matrix",
    "quadrature_integrate",
]


class Grid1D:
    """Uniform periodic grid on [a, b) with n nodes.

    Nodes are x_j = a + j*(b-a)/n for j = 0..n-1; the quadrature weight
    of every node is (b-a)/n (periodic trapezoid rule).  Instances are
    immutable by convention; differentiation matrices are cached.
    """

    def __init__(self, a, b, n):
        if not (b > a):
            raise ValueError(f"invalid-range: need b > a, got a={a}, b={b}")
        if n < 2:
            raise ValueError(f"invalid-size: need n >= 2, got n={n}")
        self.a = float(a)
        self.b = float(b)
        self.n = int(n)
        self.length = self.b - self.a
        self.h = self.length / self.n
        self.nodes = self.a + self.h * np.arange(self.n)
        self.weights = np.full(self.n, self.h)
        self.sqrt_weights = np.sqrt(self.weights)
        self._diff_cache = {}

    def __eq__(self, other):
        return (
            isinstance(other, Grid1D)
            and self.a == other.a
            and self.b == other.b
            and self.n == other.n
        )

    def __hash__(self):
        return hash((self.a, self.b, self.n))

    def __repr__(self):
        return f"Grid1D(a={self.a}, b={self.b}, n={self.n})"

    def _symbol(self, order):
        """Spectral symbol (1j*k)^order on the rfft frequencies.

        The Nyquist mode of odd-order derivatives is zeroed (its sine
        component is invisible on the grid), which keeps the matrix real
        and antisymmetric.
        """
        k = 2.0 * np.pi * np.fft.rfftfreq(self.n, d=self.h)
        sym = (1j * k) ** order
        if order % 2 == 1 and self.n % 2 == 0:
            sym[-1] = 0.0
        return sym

    def diff_apply(self, values, order=1, axis=0):
        """Differentiate grid samples spectrally along ``axis``."""
        if order not in (1, 2):
            raise ValueError(f"unsupported-order: order must be 1 or 2, got {order}")
        values = np.asarray(values, dtype=float)
        if values.shape[axis] != self.n:
            raise ValueError(
                f"length-mismatch: expected {self.n} samples, got {values.shape[axis]}"
            )
        sym = self._symbol(order)
        spec = np.fft.rfft(values, axis=axis)
        shape = [1] * values.ndim
        shape[axis] = sym.size
        spec *= sym.reshape(shape)
        return np.fft.irfft(spec, n=self.n, axis=axis)

    def diff_matrix(self, order=1):
        """Dense pseudo-spectral differentiation matrix of given order."""
        if order not in (1, 2):
            raise ValueError(f"unsupported-order: order must be 1 or 2, got {order}")
        if order not in self._diff_cache:
            mat = self.diff_apply(np.eye(self.n), order=order, axis=0)
            self._diff_cache[order] = mat
        return self._diff_cache[order]

    def integrate(self, samples):
        """Quadrature of samples with the trapezoid weights."""
        samples = np.asarray(samples, dtype=float)
        if samples.shape[0] != self.n:
            raise ValueError(
                f"length-mismatch: expected {self.n} samples, got {samples.shape[0]}"
            )
        return float(self.weights @ samples)

    def interp_matrix(self, points):
        """Band-limited (trigonometric) interpolation matrix.

        Returns K of shape (len(points), n) such that K @ f interpolates
        grid samples f at the given points.
        """
        points = np.atleast_1d(np.asarray(points, dtype=float))
        s = points[:, None] - self.nodes[None, :]
        t = np.pi * s / self.length
        n = self.n
        with np.errstate(divide="ignore", invalid="ignore"):
            if n % 2 == 0:
                kernel = np.sin(n * t) / (n * np.tan(t))
            else:
                kernel = np.sin(n * t) / (n * np.sin(t))
        # remove the 0/0 at coincident nodes
        on_node = np.isclose(np.mod(s, self.length), 0.0) | np.isclose(
            np.mod(s, self.length), self.length
        )
        kernel = np.where(on_node, 1.0, kernel)
        kernel = np.where(np.isfinite(kernel), kernel, 0.0)
        return kernel


class ProductGrid:
    """Cartesian product of d one-dimensional periodic grids (d >= 2)."""

    def __init__(self, axes):
        axes = list(axes)
        if len(axes) < 2:
            raise ValueError(f"invalid-size: need d >= 2 axes, got {len(axes)}")
        self.axes = axes

    @property
    def d(self):
        return len(self.axes)

    @property
    def shape(self):
        return tuple(g.n for g in self.axes)

    @property
    def size(self):
        return int(np.prod([g.n for g in self.axes], dtype=np.int64))

    def __eq__(self, other):
        return isinstance(other, ProductGrid) and self.axes == other.axes

    def __hash__(self):
        return hash(tuple(self.axes))

    def __repr__(self):
        return f"ProductGrid({self.axes!r})"

    @classmethod
    def cube(cls, a, b, n, d):
        """Isotropic product grid: d copies of the same periodic axis."""
        return cls([make_periodic_grid(a, b, n) for _ in range(d)])


def make_periodic_grid(a, b, n):
    """Build a uniform periodic grid on [a, b) with n nodes."""
    return Grid1D(a, b, n)


def fourier_diff_matrix(g, order=1):
    """Pseudo-spectral Fourier differentiation matrix of a grid."""
    return g.diff_matrix(order)


def quadrature_integrate(g, samples):
    """Integrate grid samples with the periodic trapezoid rule."""
    return g.integrate(samples)
