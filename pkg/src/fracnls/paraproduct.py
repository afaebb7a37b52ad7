"""Bilinear Fourier multipliers, paraproducts and the normal-form operator.

A bilinear multiplier with symbol ``m`` acts as

    T_m(u, v)^(xi) = C_d sum_eta m(xi, eta) u_hat(xi - eta) v_hat(eta),

with ``C_d`` from :func:`fracnls.grid.conv_constant`, so that ``m = 1`` gives
the transform of ``u*v``.  All products are truncated by the 2/3 rule: inputs
are restricted to the retained modes and so is the output.  On that set the
pseudospectral product is the exact lattice convolution.

Three independent routes compute ``T_m``:

* :func:`apply_bilinear` uses the per-block Fourier-series separation
  ``psi_k(xi) m(xi, eta) psi_j(eta) = sum_a m_{k,a}(xi) e_{j,a}(eta)``, one
  pseudospectral product per retained modulation;
* :func:`apply_sparse` sums over the few low input frequencies of symbols
  whose first-argument support is a small ball (the LH family);
* :func:`direct_bilinear` is the brute-force double sum.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .errors import ExpansionError, NonContractionError, ValidationError
from .grid import (
    SpectralField,
    bump_phi,
    bump_psi,
    conv_constant,
    lattice_range,
    sobolev_norm,
)

__all__ = [
    "SymbolSpec",
    "BilinearSymbol",
    "ParaproductPieces",
    "symbol_one",
    "symbol_a_hl",
    "symbol_a_lh",
    "symbol_a_hh",
    "symbol_b",
    "resonance_phase",
    "block_symbols",
    "expand_symbol",
    "apply_bilinear",
    "apply_sparse",
    "direct_bilinear",
    "product",
    "decompose_paraproduct",
    "apply_B",
    "normal_form_forward",
    "normal_form_invert",
    "save_expansion",
    "load_expansion",
    "DEFAULT_GAP",
]

DEFAULT_GAP = 10


# ---------------------------------------------------------------------------
# symbols


def _norm(v):
    return np.sqrt(np.sum(v * v, axis=-1))


def _dyadic_pair(r_hi, r_lo, gap):
    """``sum_k psi_k(r_hi) phi(2^{-(k-gap)} r_lo)``; two values of ``k`` contribute."""
    r_hi = np.asarray(r_hi, dtype=float)
    r_lo = np.asarray(r_lo, dtype=float)
    out = np.zeros(np.broadcast(r_hi, r_lo).shape)
    pos = r_hi > 0
    safe = np.where(pos, r_hi, 1.0)
    j0 = np.floor(np.log2(safe))
    for dk in (0, 1):
        k = j0 + dk
        out += bump_psi(np.ldexp(safe, -k.astype(int))) * bump_phi(
            np.ldexp(r_lo * np.ones_like(safe), -(k - gap).astype(int))
        )
    return np.where(pos, out, 0.0)


def resonance_phase(alpha, xi, eta):
    """``|xi|^a - |xi-eta|^a + |eta|^a`` along the last axis."""
    return _norm(xi) ** alpha - _norm(xi - eta) ** alpha + _norm(eta) ** alpha


@dataclass(frozen=True)
class SymbolSpec:
    """A named symbol ``m(xi, eta)``.

    Attributes
    ----------
    name : str
        Identifier used for caches.
    evaluator : callable
        ``(xi, eta) -> array``; both arguments carry the vector on the last axis.
    zeta_radius : callable or None
        ``grid -> r`` bounding ``|xi - eta|`` on the support.  Enables
        :func:`apply_sparse`.
    """

    name: str
    evaluator: object = field(compare=False)
    zeta_radius: object = field(default=None, compare=False)

    def __call__(self, xi, eta):
        return self.evaluator(xi, eta)


def symbol_one():
    return SymbolSpec("one", lambda xi, eta: np.ones(np.broadcast_shapes(xi.shape, eta.shape)[:-1]))


def symbol_a_hl(gap=DEFAULT_GAP):
    """``a_HL``: first input at high frequency, second at least ``gap`` shells lower."""
    return SymbolSpec(f"a_hl_g{gap}", lambda xi, eta: _dyadic_pair(_norm(xi - eta), _norm(eta), gap))


def _lh_radius(gap):
    def r(grid):
        return 1.25 * 2.0 ** (lattice_range(grid)[1] - gap)

    return r


def symbol_a_lh(gap=DEFAULT_GAP):
    """``a_LH``: first input at least ``gap`` shells below the second."""
    return SymbolSpec(
        f"a_lh_g{gap}",
        lambda xi, eta: _dyadic_pair(_norm(eta), _norm(xi - eta), gap),
        _lh_radius(gap),
    )


def symbol_a_hh(gap=DEFAULT_GAP):
    """``a_HH = 1 - a_HL - a_LH``: comparable frequencies, including the origin."""

    def ev(xi, eta):
        z, e = _norm(xi - eta), _norm(eta)
        return 1.0 - _dyadic_pair(z, e, gap) - _dyadic_pair(e, z, gap)

    return SymbolSpec(f"a_hh_g{gap}", ev)


def symbol_b(alpha, gap=DEFAULT_GAP):
    """Normal-form symbol ``a_LH / phi``; zero at ``xi = 0``."""

    def ev(xi, eta):
        a = _dyadic_pair(_norm(eta), _norm(xi - eta), gap)
        ph = resonance_phase(alpha, xi, eta)
        ok = (a != 0) & (_norm(xi) > 0)
        return np.where(ok, a / np.where(ok, ph, 1.0), 0.0)

    return SymbolSpec(f"b_a{alpha!r}_g{gap}", ev, _lh_radius(gap))


# ---------------------------------------------------------------------------
# lattice helpers


def _index_vectors(grid):
    idx = np.stack(np.meshgrid(*([grid.axis_index] * grid.dim), indexing="ij"), axis=-1)
    return idx


def _masked(grid, c):
    return np.where(grid.dealias_mask, c, 0.0)


def _to_phys(grid, c):
    return sfft.ifftn(c * (grid.sign / grid.forward_scale))


def _to_spec(grid, u):
    return sfft.fftn(u) * (grid.forward_scale * grid.sign)


def product(grid, a_hat, b_hat):
    """Dealiased transform of the product of two coefficient arrays."""
    a = _to_phys(grid, _masked(grid, a_hat))
    b = _to_phys(grid, _masked(grid, b_hat))
    return _masked(grid, _to_spec(grid, a * b))


def block_symbols(grid):
    """Full-lattice partition ``[(k, chi_k(|xi|)), ...]`` summing to one.

    The first entry is the low block ``phi(2^{-k_lo}|xi|)``, which on the
    lattice is the indicator of ``xi = 0``; the rest are ``psi_k``.
    """
    k_lo, k_hi = lattice_range(grid)
    r = grid.xi_abs
    out = [(k_lo, bump_phi(np.ldexp(r, -k_lo)))]
    for k in range(k_lo + 1, k_hi + 1):
        out.append((k, bump_psi(np.ldexp(r, -k))))
    return out


# ---------------------------------------------------------------------------
# separated expansion


@dataclass(frozen=True, eq=False)
class BlockExpansion:
    """Retained Fourier-series terms of one block ``(k, j)``.

    ``coeffs[t, p]`` multiplies ``chi_j(eta) exp(2 pi i alphas[t] . n / M)``
    where ``n`` is the lattice index of ``eta`` inside the centred box of side
    ``M``;
    ``xi_index`` lists the flat output indices ``p`` refers to.
    """

    k: int
    j: int
    box: int
    alphas: np.ndarray
    xi_index: np.ndarray
    coeffs: np.ndarray
    tail: float


@dataclass(frozen=True, eq=False)
class BilinearSymbol:
    """Symbol together with its per-block separated expansion.

    Attributes
    ----------
    spec : SymbolSpec
    grid : Grid
    tolerance : float
    blocks : dict
        ``(k, j) -> BlockExpansion``.
    truncation_bound : float
        Largest relative tail over blocks.
    """

    spec: SymbolSpec
    grid: object
    tolerance: float
    blocks: dict
    truncation_bound: float

    @property
    def evaluator(self):
        return self.spec.evaluator

    def term_counts(self):
        return {kj: len(b.alphas) for kj, b in self.blocks.items()}

    def reconstruct(self, k, j, xi_flat, eta_index):
        """Evaluate the retained expansion of block ``(k, j)``.

        Parameters
        ----------
        xi_flat : ndarray of int
            Flat output indices (must belong to the block's list).
        eta_index : ndarray, shape (q, d)
            Lattice indices of ``eta`` inside the block's box.
        """
        b = self.blocks[(k, j)]
        pos = np.searchsorted(b.xi_index, xi_flat)
        ph = np.exp(2j * np.pi * (eta_index @ b.alphas.T) / b.box)
        r = np.sqrt(np.sum((eta_index * self.grid.dxi) ** 2, axis=-1))
        chi = _block_cutoff(j, lattice_range(self.grid)[0], r)
        return (b.coeffs[:, pos].T @ ph.T) * chi[None, :]


def _box_side(grid, j):
    m = int(np.ceil(6.0 * 2.0 ** j / grid.dxi))
    m += m % 2
    return min(grid.n, max(m, 2))


def _box_indices(grid, box):
    ax = np.fft.fftfreq(box, d=1.0 / box).astype(np.int64)
    return np.stack(np.meshgrid(*([ax] * grid.dim), indexing="ij"), axis=-1)


def _block_cutoff(j, k_lo, r):
    return bump_phi(np.ldexp(r, -k_lo)) if j == k_lo else bump_psi(np.ldexp(r, -j))


def expand_symbol(spec, grid, tolerance=1e-8, max_terms=4096, max_entries=4 * 10 ** 7):
    """Separate ``m`` block by block into retained Fourier-series terms.

    For output block ``k`` and input block ``j`` we write

        chi_k(xi) m(xi, eta) chi_j(eta) = sum_a c_a(xi) chi_j(eta) exp(2 pi i a.n/M),

    where ``n`` is the lattice index of ``eta`` in a centred box of ``M^d``
    points covering ``[-3*2^j, 3*2^j]^d``.  The coefficients are the DFT over
    the box of ``chi_k(xi) m(xi, eta) W(eta)``; two windows are tried,
    ``W = 1`` and a smooth bump equal to one on the support of ``chi_j``, and
    the one needing fewer terms wins.  Terms are kept in decreasing order of
    ``max_xi |c_a|`` until the dropped mass is at most ``tolerance`` times
    the block sup.  Only retained (dealiased) modes are sampled.

    Raises
    ------
    ExpansionError
        When a block needs more than ``max_terms`` terms.
    """
    blocks_sym = block_symbols(grid)
    k_lo = blocks_sym[0][0]
    idx = _index_vectors(grid)
    xi_all = (idx * grid.dxi).reshape(-1, grid.dim)
    flat_mask = grid.dealias_mask.ravel()
    axes = tuple(range(1, grid.dim + 1))
    blocks = {}
    worst = 0.0
    for j, _ in blocks_sym:
        box = _box_side(grid, j)
        bidx = _box_indices(grid, box)
        eta = bidx * grid.dxi
        rb = np.sqrt(np.sum(eta * eta, axis=-1))
        in_mask = np.all(np.abs(bidx) < grid.n / 3.0, axis=-1)
        chi_j = np.where(in_mask, _block_cutoff(j, k_lo, rb), 0.0)
        if not np.any(chi_j):
            continue
        supp = chi_j != 0
        windows = (np.ones_like(rb), bump_phi(rb / (1.25 * 2.0 ** j)))
        for k, chi_k in blocks_sym:
            sel = np.flatnonzero((chi_k.ravel() != 0) & flat_mask)
            if sel.size == 0:
                continue
            if sel.size * chi_j.size > max_entries:
                raise ExpansionError((k, j), max_terms, np.inf)
            xs = xi_all[sel].reshape((sel.size,) + (1,) * grid.dim + (grid.dim,))
            raw = chi_k.ravel()[sel].reshape((-1,) + (1,) * grid.dim) * spec(xs, eta[None])
            sup = np.abs(raw[:, supp] * chi_j[supp]).max()
            if sup == 0:
                continue
            best = None
            for w in windows:
                c = (sfft.fftn(raw * w, axes=axes) / box ** grid.dim).reshape(sel.size, -1)
                amax = np.abs(c).max(axis=0)
                order = np.argsort(-amax, kind="stable")
                tail = np.append(np.cumsum(amax[order][::-1])[::-1], 0.0)
                n_keep = int(np.argmax(tail[1:] <= tolerance * sup)) + 1
                if best is None or n_keep < best[0]:
                    best = (n_keep, c, order, tail)
            n_keep, c, order, tail = best
            if n_keep > max_terms:
                raise ExpansionError((k, j), max_terms, tail[max_terms] / sup)
            keep = order[:n_keep]
            dropped = tail[n_keep] / sup
            worst = max(worst, dropped)
            alphas = np.stack(np.unravel_index(keep, (box,) * grid.dim), axis=-1).astype(np.int64)
            blocks[(k, j)] = BlockExpansion(k, j, box, alphas, sel, c[:, keep].T.copy(), dropped)
    return BilinearSymbol(spec, grid, tolerance, blocks, worst)


def _check_pair(u, v):
    if u.grid != v.grid:
        raise ValidationError("grid mismatch")


def apply_bilinear(sym, u, v):
    """``T_m(u, v)`` from the separated expansion of ``sym``.

    Each retained modulation ``a`` of input block ``j`` costs one
    pseudospectral product ``u * (e_{j,a}(D) v)``; the output factors
    ``m_{k,a}`` are then applied per output block.
    """
    _check_pair(u, v)
    g = u.grid
    if sym.grid != g:
        raise ValidationError("symbol was expanded on a different grid")
    uh = _masked(g, u.coeffs)
    u_phys = _to_phys(g, uh)
    vh = _masked(g, v.coeffs)
    idx = _index_vectors(g)
    k_lo = lattice_range(g)[0]
    out = np.zeros(g.n ** g.dim, dtype=complex)
    by_j = {}
    for (k, j), b in sym.blocks.items():
        by_j.setdefault(j, []).append(b)
    for j, blist in by_j.items():
        box = blist[0].box
        in_box = np.all((idx >= -box // 2) & (idx < box // 2), axis=-1)
        vj = np.where(in_box, vh * _block_cutoff(j, k_lo, g.xi_abs), 0.0)
        terms = {}
        for b in blist:
            for t, a in enumerate(map(tuple, b.alphas)):
                terms.setdefault(a, []).append((b, t))
        for a, users in terms.items():
            mod = np.exp(2j * np.pi * (idx @ np.asarray(a)) / box)
            w = _to_phys(g, vj * mod)
            prod = _to_spec(g, u_phys * w).ravel()
            for b, t in users:
                out[b.xi_index] += b.coeffs[t] * prod[b.xi_index]
    return SpectralField(g, out.reshape(g.shape))


def direct_bilinear(spec, u, v):
    """Brute-force double sum over retained lattice modes, ``O(N^{2d})``."""
    _check_pair(u, v)
    g = u.grid
    C = conv_constant(g)
    idx = _index_vectors(g).reshape(-1, g.dim)
    keep = g.dealias_mask.ravel()
    pts = idx[keep]
    uh = u.coeffs.ravel()[keep]
    vh = v.coeffs.ravel()[keep]
    lookup = {tuple(p): i for i, p in enumerate(pts)}
    out = np.zeros(g.n ** g.dim, dtype=complex)
    flat_pos = np.flatnonzero(keep)
    eta = pts * g.dxi
    for p_i, p in enumerate(pts):
        diff = p[None, :] - pts
        ok = np.all(np.abs(diff) < g.n / 3.0, axis=-1)
        if not np.any(ok):
            continue
        zi = np.array([lookup[tuple(d)] for d in diff[ok]])
        xi = (p * g.dxi)[None, :]
        m = spec(np.broadcast_to(xi, eta[ok].shape), eta[ok])
        out[flat_pos[p_i]] = C * np.sum(m * uh[zi] * vh[ok])
    return SpectralField(g, out.reshape(g.shape))


_SPARSE_CACHE = {}


def apply_sparse(spec, u, v):
    """``T_m(u, v)`` by summing over the low frequencies of ``u``.

    Requires ``spec.zeta_radius``: the symbol vanishes unless
    ``|xi - eta| <= r``.  For each lattice ``zeta`` in that ball,
    ``out += C u_hat(zeta) m(xi, xi - zeta) v_hat(xi - zeta)``.
    """
    _check_pair(u, v)
    g = u.grid
    if spec.zeta_radius is None:
        raise ValidationError(f"symbol {spec.name} has no bounded first-argument support")
    r = spec.zeta_radius(g)
    if r / g.dxi >= g.n / 6.0:
        raise ValidationError("support ball too large for the sparse route")
    C = conv_constant(g)
    uh = _masked(g, u.coeffs)
    vh = _masked(g, v.coeffs)
    idx = _index_vectors(g)
    zs = idx.reshape(-1, g.dim)[(np.sqrt(np.sum((idx * g.dxi) ** 2, axis=-1)) <= r).ravel()]
    xi = idx * g.dxi
    out = np.zeros(g.shape, dtype=complex)
    for z in zs:
        cz = uh[tuple(z)]
        if cz == 0:
            continue
        key = (spec, g, tuple(z))
        m = _SPARSE_CACHE.get(key)
        if m is None:
            m = spec(xi, xi - z * g.dxi)
            _SPARSE_CACHE[key] = m
        out += cz * m * np.roll(vh, shift=tuple(z), axis=tuple(range(g.dim)))
    return SpectralField(g, C * _masked(g, out))


# ---------------------------------------------------------------------------
# paraproducts


@dataclass(frozen=True, eq=False)
class ParaproductPieces:
    """HH, HL and LH parts of ``u * conj(v)``."""

    hh: SpectralField
    hl: SpectralField
    lh: SpectralField

    def total(self):
        return self.hh + self.hl + self.lh


def _dyadic_sum(g, high, low, gap):
    """``sum_k F[(P_k high)(P_{<=k-gap} low)]`` with identical low filters grouped."""
    r = g.xi_abs
    k_lo, k_hi = lattice_range(g)
    groups = []
    for k in range(k_lo + 1, k_hi + 1):
        hi_f = bump_psi(np.ldexp(r, -k))
        lo_f = bump_phi(np.ldexp(r, -(k - gap)))
        if groups and np.array_equal(groups[-1][1], lo_f):
            groups[-1][0] += hi_f
        else:
            groups.append([hi_f, lo_f])
    out = np.zeros(g.shape, dtype=complex)
    for hi_f, lo_f in groups:
        if not np.any(hi_f * high) or not np.any(lo_f * low):
            continue
        out += product(g, hi_f * high, lo_f * low)
    return out


def lh_piece(u, v, gap=DEFAULT_GAP):
    """``(u conj(v))_LH`` only."""
    _check_pair(u, v)
    g = u.grid
    return SpectralField(g, _dyadic_sum(g, v.conj().coeffs, u.coeffs, gap))


def decompose_paraproduct(u, v, gap=DEFAULT_GAP):
    """Split ``u * conj(v)`` into HH, HL and LH pieces.

    HL and LH are sums of products of Littlewood-Paley pieces; HH is the
    remainder of the dealiased product, so the three always add up to it.
    """
    _check_pair(u, v)
    g = u.grid
    vb = v.conj().coeffs
    full = product(g, u.coeffs, vb)
    hl = _dyadic_sum(g, u.coeffs, vb, gap)
    lh = _dyadic_sum(g, vb, u.coeffs, gap)
    return ParaproductPieces(
        SpectralField(g, full - hl - lh), SpectralField(g, hl), SpectralField(g, lh)
    )


def hh_hl(u, v, gap=DEFAULT_GAP):
    """``(u conj(v))_{HH+HL}`` as the product minus its LH piece."""
    _check_pair(u, v)
    g = u.grid
    vb = v.conj().coeffs
    return SpectralField(g, product(g, u.coeffs, vb) - _dyadic_sum(g, vb, u.coeffs, gap))


# ---------------------------------------------------------------------------
# normal form


_B_CACHE = {}


def apply_B(u, v, alpha, gap=DEFAULT_GAP, route="auto", tolerance=1e-10):
    """``B(u, v)`` with symbol ``a_LH / phi``; the ``xi = 0`` mode is zero.

    ``route`` is ``"sparse"``, ``"separated"`` or ``"auto"`` (sparse when the
    support ball of the low input fits, separated otherwise).
    """
    spec = symbol_b(alpha, gap)
    g = u.grid
    if route == "auto":
        route = "sparse" if spec.zeta_radius(g) / g.dxi < g.n / 6.0 else "separated"
    if route == "sparse":
        return apply_sparse(spec, u, v)
    key = (spec, g, tolerance)
    sym = _B_CACHE.get(key)
    if sym is None:
        sym = expand_symbol(spec, g, tolerance)
        _B_CACHE[key] = sym
    return apply_bilinear(sym, u, v)


def normal_form_forward(u, alpha, coupling=1.0, gap=DEFAULT_GAP):
    """``w = u + i c B(u, conj u)`` for the equation with coupling ``c``."""
    return u + (1j * coupling) * apply_B(u, u.conj(), alpha, gap)


@dataclass
class InversionReport:
    iterations: int
    residuals: list
    ratios: list


def normal_form_invert(w, alpha, coupling=1.0, gap=DEFAULT_GAP, tolerance=1e-12,
                       max_iter=100, u0=None, s=10):
    """Solve ``u = w - i c B(u, conj u)`` by Picard iteration.

    Stops when ``||u_{n+1} - u_n||_{H^s}`` falls below ``tolerance`` times
    ``||w||_{H^s}``.  Returns ``(u, InversionReport)``.

    Raises
    ------
    NonContractionError
        When the residual ratio is at least 1 for 3 consecutive steps.
    """
    scale = sobolev_norm(w, s)
    if scale == 0:
        return w, InversionReport(0, [], [])
    u = w if u0 is None else u0
    res, ratios = [], []
    bad = 0
    for n in range(1, max_iter + 1):
        nxt = w - (1j * coupling) * apply_B(u, u.conj(), alpha, gap)
        r = sobolev_norm(nxt - u, s)
        if res:
            q = r / res[-1] if res[-1] > 0 else 0.0
            ratios.append(q)
            bad = bad + 1 if q >= 1 else 0
            if bad >= 3:
                raise NonContractionError(ratios, "normal-form inversion does not contract")
        res.append(r)
        u = nxt
        if r <= tolerance * scale:
            return u, InversionReport(n, res, ratios)
    raise NonContractionError(ratios or [np.inf], "normal-form inversion hit max_iter")


# ---------------------------------------------------------------------------
# expansion cache
#
# little-endian layout: magic "FNLX", int32 dim, int32 N, float64 L,
# float64 tolerance, int32 block count, then per block
#   int32 k, int32 j, int32 box, int32 n_terms, int32 n_xi, float64 tail,
#   int64[n_terms*dim] alphas, int64[n_xi] flat output indices,
#   float64 pairs (re, im)[n_terms*n_xi] coefficients (term-major).

_XHEAD = struct.Struct("<4siiddi")
_XBLOCK = struct.Struct("<iiiiid")


def expansion_cache_name(spec, grid, tolerance):
    return f"{spec.name}-{grid.key()}-{tolerance:.0e}.fnx"


def save_expansion(path, sym):
    g = sym.grid
    with open(path, "wb") as fh:
        fh.write(_XHEAD.pack(b"FNLX", g.dim, g.n, g.half_width, sym.tolerance, len(sym.blocks)))
        for (k, j), b in sorted(sym.blocks.items()):
            fh.write(_XBLOCK.pack(k, j, b.box, len(b.alphas), len(b.xi_index), b.tail))
            fh.write(np.ascontiguousarray(b.alphas, dtype="<i8").tobytes())
            fh.write(np.ascontiguousarray(b.xi_index, dtype="<i8").tobytes())
            pairs = np.empty(b.coeffs.size * 2, dtype="<f8")
            pairs[0::2] = b.coeffs.real.ravel()
            pairs[1::2] = b.coeffs.imag.ravel()
            fh.write(pairs.tobytes())


def load_expansion(path, spec, grid):
    """Read an expansion written by :func:`save_expansion` for ``spec`` on ``grid``."""
    with open(path, "rb") as fh:
        data = fh.read()
    magic, dim, n, L, tol, nb = _XHEAD.unpack_from(data, 0)
    if magic != b"FNLX" or (dim, n, L) != (grid.dim, grid.n, grid.half_width):
        raise ValidationError("expansion cache does not match the grid")
    off = _XHEAD.size
    blocks = {}
    worst = 0.0
    for _ in range(nb):
        k, j, box, nt, nx, tail = _XBLOCK.unpack_from(data, off)
        off += _XBLOCK.size
        alphas = np.frombuffer(data, "<i8", nt * dim, off).reshape(nt, dim).astype(np.int64)
        off += 8 * nt * dim
        xi_index = np.frombuffer(data, "<i8", nx, off).astype(np.int64)
        off += 8 * nx
        pairs = np.frombuffer(data, "<f8", 2 * nt * nx, off)
        off += 16 * nt * nx
        coeffs = (pairs[0::2] + 1j * pairs[1::2]).reshape(nt, nx)
        blocks[(k, j)] = BlockExpansion(k, j, box, alphas, xi_index, coeffs, tail)
        worst = max(worst, tail)
    return BilinearSymbol(spec, grid, tol, blocks, worst)
