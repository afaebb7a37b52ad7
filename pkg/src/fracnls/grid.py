"""Periodic grids, spectral fields, Littlewood-Paley shells and basic norms.

Fourier convention
------------------
The physical grid is ``x_j = -L + j*dx`` with ``dx = 2L/N`` on every axis and
the lattice of wavenumbers is ``xi_m = m*pi/L``.  Stored coefficients are

    u_hat(xi) = (dx / sqrt(2*pi))**d * sum_j u(x_j) exp(-i xi . x_j),

the Riemann sum of the unitary continuum transform.  With ``dxi = pi/L`` the
discrete Plancherel identity ``sum |u_hat|^2 dxi^d = sum |u|^2 dx^d`` holds
exactly.  Coefficient arrays are kept in numpy FFT order; ``Grid.axis_xi``
gives the matching wavenumbers.

The only constant attached to products lives in :func:`conv_constant`: the
transform of a product is ``(2 pi)^(-d/2) dxi^d sum_eta u_hat(xi-eta) v_hat(eta)``.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft

__all__ = [
    "Grid",
    "SpectralField",
    "DyadicShellSet",
    "make_grid",
    "transform_forward",
    "transform_inverse",
    "propagate_linear",
    "bump_phi",
    "bump_psi",
    "shell_set",
    "lp_project",
    "lp_project_low",
    "sobolev_norm",
    "lp_norm",
    "weighted_l2",
    "conv_constant",
    "dispersion",
    "zeros",
    "psi_k",
    "phi_k",
    "active_range",
    "lattice_range",
    "save_snapshot",
    "load_snapshot",
]

_SNAPSHOT_MAGIC = b"FNLS"


def _is_admissible_n(n):
    # powers of two, and three times a power of two (48, 96)
    if n < 8:
        return False
    while n % 2 == 0:
        n //= 2
    return n in (1, 3)


@dataclass(frozen=True)
class Grid:
    """Periodic box ``[-L, L]^dim`` sampled with ``n`` points per axis.

    Attributes
    ----------
    dim : int
        Spatial dimension, 1 or 3.
    n : int
        Points per axis.
    half_width : float
        Half box length ``L``.
    """

    dim: int
    n: int
    half_width: float

    @property
    def spacing(self):
        return 2.0 * self.half_width / self.n

    @property
    def dxi(self):
        return np.pi / self.half_width

    @property
    def shape(self):
        return (self.n,) * self.dim

    @cached_property
    def axis_x(self):
        return -self.half_width + self.spacing * np.arange(self.n)

    @cached_property
    def axis_index(self):
        return np.fft.fftfreq(self.n, d=1.0 / self.n).astype(np.int64)

    @cached_property
    def axis_xi(self):
        return self.dxi * self.axis_index

    def _mesh(self, axis):
        out = []
        for i in range(self.dim):
            s = [1] * self.dim
            s[i] = self.n
            out.append(axis.reshape(s))
        return out

    @cached_property
    def xi(self):
        """Broadcastable per-axis wavenumber arrays."""
        return self._mesh(self.axis_xi)

    @cached_property
    def x(self):
        """Broadcastable per-axis coordinate arrays."""
        return self._mesh(self.axis_x)

    @cached_property
    def xi_abs(self):
        r2 = np.zeros(self.shape)
        for c in self.xi:
            r2 = r2 + c * c
        return np.sqrt(r2)

    @cached_property
    def x_abs(self):
        r2 = np.zeros(self.shape)
        for c in self.x:
            r2 = r2 + c * c
        return np.sqrt(r2)

    @cached_property
    def sign(self):
        # (-1)^m per axis, from the grid starting at -L
        s = np.ones(self.shape)
        for c in self._mesh(np.where(self.axis_index % 2 == 0, 1.0, -1.0)):
            s = s * c
        return s

    @cached_property
    def dealias_mask(self):
        """Retained modes of the 2/3 rule, ``|m_i| < N/3`` on every axis."""
        m = np.ones(self.shape, dtype=bool)
        for c in self._mesh(np.abs(self.axis_index) < self.n / 3.0):
            m = m & c
        return m

    @property
    def forward_scale(self):
        return (self.spacing / np.sqrt(2.0 * np.pi)) ** self.dim

    def key(self):
        """Stable hash used for on-disk caches."""
        s = f"{self.dim}:{self.n}:{self.half_width!r}".encode()
        return hashlib.sha256(s).hexdigest()[:16]

    def check_shape(self, arr):
        if np.shape(arr) != self.shape:
            raise ValueError(f"array shape {np.shape(arr)} does not match grid {self.shape}")


def make_grid(dim, points_per_axis, half_width):
    """Build a :class:`Grid`, validating its parameters.

    ``points_per_axis`` must be at least 8 and a power of two or three times
    a power of two.
    """
    if dim not in (1, 3):
        raise ValueError(f"dim must be 1 or 3, got {dim}")
    n = int(points_per_axis)
    if n != points_per_axis or not _is_admissible_n(n):
        raise ValueError(f"points_per_axis must be 2^a or 3*2^a and >= 8, got {points_per_axis}")
    if not half_width > 0 or not np.isfinite(half_width):
        raise ValueError(f"half_width must be positive, got {half_width}")
    return Grid(dim, n, float(half_width))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Complex field stored by its Fourier coefficients.

    Parameters
    ----------
    grid : Grid
    coeffs : ndarray
        Coefficients in FFT order with the scaling documented in the module.
    """

    grid: Grid
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.grid.check_shape(self.coeffs)
        if not np.all(np.isfinite(self.coeffs)):
            raise FloatingPointError("non-finite spectral coefficients")

    def physical(self):
        return transform_inverse(self)

    def l2(self):
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2) * self.grid.dxi ** self.grid.dim))

    def with_coeffs(self, c):
        return SpectralField(self.grid, c)

    def conj(self):
        """Field of the complex conjugate, ``conj(u_hat(-xi))``."""
        c = np.conj(self.coeffs)
        for ax in range(self.grid.dim):
            c = np.roll(np.flip(c, axis=ax), 1, axis=ax)
        return SpectralField(self.grid, c)

    def _same(self, other):
        if other.grid != self.grid:
            raise ValueError("grid mismatch")

    def __add__(self, other):
        self._same(other)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._same(other)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, a):
        return SpectralField(self.grid, self.coeffs * a)

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralField(self.grid, -self.coeffs)


def zeros(grid):
    return SpectralField(grid, np.zeros(grid.shape, dtype=complex))


def transform_forward(values, grid):
    """Physical samples to :class:`SpectralField`."""
    values = np.asarray(values)
    grid.check_shape(values)
    c = sfft.fftn(values.astype(complex, copy=False)) * (grid.forward_scale * grid.sign)
    return SpectralField(grid, c)


def transform_inverse(f):
    """:class:`SpectralField` to physical samples."""
    g = f.grid
    return sfft.ifftn(f.coeffs * (g.sign / g.forward_scale))


def conv_constant(grid):
    """Constant ``C_d`` in ``F(uv) = C_d sum_eta u_hat(xi-eta) v_hat(eta)``."""
    return (2.0 * np.pi) ** (-grid.dim / 2.0) * grid.dxi ** grid.dim


def dispersion(grid, alpha):
    return grid.xi_abs ** alpha


def propagate_linear(f, alpha, t):
    """Apply ``exp(-i t D^alpha)``, i.e. multiply coefficients by ``exp(-i t |xi|^alpha)``."""
    if not alpha > 1:
        raise ValueError(f"alpha must exceed 1, got {alpha}")
    if alpha > 2:
        raise ValueError(f"alpha must be at most 2, got {alpha}")
    if t == 0:
        return f
    return f.with_coeffs(f.coeffs * np.exp(-1j * t * dispersion(f.grid, alpha)))


# ---------------------------------------------------------------------------
# bump functions and dyadic shells


def _e(x):
    out = np.zeros_like(x, dtype=float)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def bump_phi(r):
    """Radial bump: 1 on ``[0, 1]``, 0 beyond ``5/4``, C-infinity in between."""
    r = np.abs(np.asarray(r, dtype=float))
    s = 4.0 * (r - 1.0)
    a = _e(1.0 - s)
    b = _e(s)
    return a / (a + b)


def bump_psi(r):
    """``psi(r) = phi(r) - phi(2r)``, supported in ``[1/2, 5/4]``."""
    r = np.asarray(r, dtype=float)
    return bump_phi(r) - bump_phi(2.0 * r)


def psi_k(r, k):
    return bump_psi(np.ldexp(r, -k))


def phi_k(r, k):
    return bump_phi(np.ldexp(r, -k))


def active_range(grid):
    """Resolvable dyadic range ``(k_min, k_max)``."""
    k_min = int(np.ceil(np.log2(np.pi / grid.half_width))) + 1
    k_max = int(np.floor(np.log2(grid.n * np.pi / (2.0 * grid.half_width)))) - 2
    return k_min, k_max


def lattice_range(grid):
    """Shell indices ``(k_lo, k_hi)`` whose blocks partition the whole lattice.

    ``phi_k(|xi|, k_lo)`` is the indicator of ``xi = 0`` and ``psi_k`` for
    ``k_lo < k <= k_hi`` cover every nonzero lattice wavenumber.
    """
    k_lo = int(np.floor(np.log2(grid.dxi))) - 1
    k_hi = int(np.ceil(np.log2(grid.xi_abs.max()))) + 1
    return k_lo, k_hi


@dataclass(frozen=True, eq=False)
class DyadicShellSet:
    """Littlewood-Paley symbols realized on a grid.

    Attributes
    ----------
    k_min, k_max : int
        Active range.
    symbols : dict
        ``k -> psi_k(|xi|)`` for ``k`` in the active range.
    low_symbol : dict
        ``k -> phi_k(|xi|)`` for ``k_min - 1 <= k <= k_max``.
    """

    grid: Grid
    k_min: int
    k_max: int
    symbols: dict
    low_symbol: dict

    def check(self, k):
        if not self.k_min <= k <= self.k_max:
            raise ValueError(f"shell {k} outside active range [{self.k_min}, {self.k_max}]")


_SHELL_CACHE = {}


def shell_set(grid):
    if grid in _SHELL_CACHE:
        return _SHELL_CACHE[grid]
    k_min, k_max = active_range(grid)
    r = grid.xi_abs
    sym = {k: psi_k(r, k) for k in range(k_min, k_max + 1)}
    low = {k: phi_k(r, k) for k in range(k_min - 1, k_max + 1)}
    s = DyadicShellSet(grid, k_min, k_max, sym, low)
    _SHELL_CACHE[grid] = s
    return s


def lp_project(f, k):
    """``P_k f``."""
    s = shell_set(f.grid)
    s.check(k)
    return f.with_coeffs(f.coeffs * s.symbols[k])


def lp_project_low(f, k):
    """``P_{<=k} f``."""
    s = shell_set(f.grid)
    if not s.k_min - 1 <= k <= s.k_max:
        raise ValueError(f"shell {k} outside active range [{s.k_min - 1}, {s.k_max}]")
    return f.with_coeffs(f.coeffs * s.low_symbol[k])


# ---------------------------------------------------------------------------
# norms


def _finite(f):
    if not np.all(np.isfinite(f.coeffs)):
        raise FloatingPointError("non-finite field")


def sobolev_norm(f, s):
    """Inhomogeneous ``H^s`` norm with weight ``(1+|xi|^2)^(s/2)``."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    _finite(f)
    g = f.grid
    w = (1.0 + g.xi_abs ** 2) ** s
    return float(np.sqrt(np.sum(w * np.abs(f.coeffs) ** 2) * g.dxi ** g.dim))


def lp_norm(f, p):
    """Physical-space ``L^p`` norm, ``p`` in ``{1, 4/3, 2, 4, 6, inf}``."""
    _finite(f)
    u = np.abs(transform_inverse(f))
    if p == np.inf:
        return float(u.max())
    if p < 1:
        raise ValueError("p must be at least 1")
    return float((np.sum(u ** p) * f.grid.spacing ** f.grid.dim) ** (1.0 / p))


def weighted_l2(f, w):
    """``|| |x|^w f ||_2`` with the weight applied in physical space."""
    _finite(f)
    g = f.grid
    u = transform_inverse(f)
    return float(np.sqrt(np.sum((g.x_abs ** w * np.abs(u)) ** 2) * g.spacing ** g.dim))


# ---------------------------------------------------------------------------
# snapshots
#
# little-endian layout:
#   4 bytes magic "FNLS", int32 dim, int32 N, float64 L, float64 alpha,
#   then N^dim pairs (re, im) float64 in row-major order of ascending
#   wavenumber index (-N/2 ... N/2-1 on each axis).

_HEADER = struct.Struct("<4siidd")


def save_snapshot(path, f, alpha):
    g = f.grid
    c = np.fft.fftshift(f.coeffs)
    buf = np.empty(c.size * 2, dtype="<f8")
    buf[0::2] = c.real.ravel()
    buf[1::2] = c.imag.ravel()
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_SNAPSHOT_MAGIC, g.dim, g.n, g.half_width, float(alpha)))
        fh.write(buf.tobytes())


def load_snapshot(path):
    """Return ``(field, alpha)`` from a snapshot file."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        magic, dim, n, L, alpha = _HEADER.unpack(head)
        if magic != _SNAPSHOT_MAGIC:
            raise ValueError("not a field snapshot")
        buf = np.frombuffer(fh.read(), dtype="<f8")
    g = make_grid(dim, n, L)
    if buf.size != 2 * n ** dim:
        raise ValueError("truncated snapshot")
    c = (buf[0::2] + 1j * buf[1::2]).reshape(g.shape)
    return SpectralField(g, np.fft.ifftshift(c)), alpha
