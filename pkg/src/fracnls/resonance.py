"""Resonance phase, its derivatives, sampled symbol-class checks and the
dyadic constants that drive the decay bootstrap.

All vectors carry their components on the last axis, so the routines accept
single points and batches alike.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = [
    "PhaseContext",
    "RegionSpec",
    "EmptyRegionError",
    "eval_phase",
    "eval_grads",
    "sample_region",
    "verify_symbol_class",
    "region_sweep",
    "expansion_residual",
    "sample_expansion_points",
    "expansion_support_eps",
    "dyadic_constants",
    "epsilon_rate",
    "delta_rate",
]


def _norm(v):
    return np.sqrt(np.sum(v * v, axis=-1))


class EmptyRegionError(ValidationError):
    """Sampling found no admissible points."""


@dataclass(frozen=True)
class PhaseContext:
    """Closed-form phase ``phi(xi, eta) = G(xi) - G(xi - eta) + G(eta)``, ``G = |.|^alpha``."""

    alpha: float

    def __post_init__(self):
        if not 1 < self.alpha <= 2:
            raise ValidationError(f"alpha must lie in (1, 2], got {self.alpha}")

    def gamma(self, x):
        return _norm(x) ** self.alpha

    def grad_gamma(self, x):
        # alpha |x|^(alpha-2) x, continuous with value 0 at the origin
        r = _norm(x)[..., None]
        safe = np.where(r > 0, r, 1.0)
        return np.where(r > 0, self.alpha * safe ** (self.alpha - 2.0) * x, 0.0)

    def hess_gamma(self, x):
        """``alpha |x|^(alpha-2) ((alpha-2) x^ x^T + I)``; singular at 0."""
        a = self.alpha
        r = _norm(x)
        xh = x / r[..., None]
        eye = np.eye(x.shape[-1])
        return (a * r ** (a - 2.0))[..., None, None] * ((a - 2.0) * xh[..., :, None] * xh[..., None, :] + eye)

    def phase(self, xi, eta):
        return self.gamma(xi) - self.gamma(xi - eta) + self.gamma(eta)

    def grad_xi(self, xi, eta):
        return self.grad_gamma(xi) - self.grad_gamma(xi - eta)

    def grad_eta(self, xi, eta):
        return self.grad_gamma(eta) + self.grad_gamma(xi - eta)

    def hessians(self, xi, eta):
        """Blocks ``(d_xi grad_xi, d_eta grad_xi, d_xi grad_eta, d_eta grad_eta)``."""
        hz = self.hess_gamma(xi - eta)
        return (self.hess_gamma(xi) - hz, hz, hz, self.hess_gamma(eta) - hz)

    def rho(self, xi, eta):
        return self.gamma(xi) + self.gamma(eta)

    def trilinear_phase_1(self, xi, eta, zeta):
        """``G(xi) - G(xi-eta-zeta) + G(eta) - G(zeta)``."""
        return self.gamma(xi) - self.gamma(xi - eta - zeta) + self.gamma(eta) - self.gamma(zeta)

    def trilinear_phase_2(self, xi, eta, zeta):
        """``G(xi) - G(zeta) + G(xi-eta-zeta) + G(eta)``."""
        return self.gamma(xi) - self.gamma(zeta) + self.gamma(xi - eta - zeta) + self.gamma(eta)


def eval_phase(ctx, xi, eta):
    return ctx.phase(np.asarray(xi, float), np.asarray(eta, float))


def eval_grads(ctx, xi, eta):
    """``(grad_xi phi, grad_eta phi)``."""
    xi = np.asarray(xi, float)
    eta = np.asarray(eta, float)
    return ctx.grad_xi(xi, eta), ctx.grad_eta(xi, eta)


# ---------------------------------------------------------------------------
# regions


@dataclass(frozen=True)
class RegionSpec:
    """Dyadic region ``|xi| ~ 2^k, |xi-eta| ~ 2^k1, |eta| ~ 2^k2``.

    ``kind`` is ``"HH"`` (``|k1-k2| <= gap``, ``k1 >= k-gap``) or ``"HL"``
    (``k1-k2 >= gap``, ``|k1-k| <= gap``).
    """

    k: int
    k1: int
    k2: int
    kind: str = "HH"
    sample_count: int = 10000
    gap: int = 10

    def admissible(self):
        if self.kind == "HH":
            return abs(self.k1 - self.k2) <= self.gap and self.k1 >= self.k - self.gap
        if self.kind == "HL":
            return self.k1 - self.k2 >= self.gap and abs(self.k1 - self.k) <= self.gap
        raise ValidationError(f"unknown region kind {self.kind}")


def _random_dirs(rng, n, d=3):
    v = rng.normal(size=(n, d))
    return v / _norm(v)[:, None]


def _log_uniform(rng, k, n):
    return 2.0 ** (k - 1 + 2.0 * rng.random(n))


def sample_region(region, rng, max_rounds=50):
    """Sample ``(xi, eta)`` in the open region, radii log-uniform.

    ``|xi|`` and ``|xi-eta|`` are drawn log-uniformly, then ``|eta|`` is drawn
    log-uniformly in its shell intersected with the triangle-inequality range
    and the angle between ``xi`` and ``xi-eta`` is solved for.
    """
    want = region.sample_count
    out_xi, out_zeta = [], []
    got = 0
    for _ in range(max_rounds):
        n = 2 * want
        a = _log_uniform(rng, region.k, n)
        b = _log_uniform(rng, region.k1, n)
        lo = np.maximum(np.abs(a - b), 2.0 ** (region.k2 - 1))
        hi = np.minimum(a + b, 2.0 ** (region.k2 + 1))
        ok = hi > lo * (1 + 1e-12)
        if not np.any(ok):
            continue
        a, b, lo, hi = a[ok], b[ok], lo[ok], hi[ok]
        c = np.exp(np.log(lo) + (np.log(hi) - np.log(lo)) * rng.random(a.size))
        cos = np.clip((a * a + b * b - c * c) / (2 * a * b), -1.0, 1.0)
        e1 = _random_dirs(rng, a.size)
        t = _random_dirs(rng, a.size)
        t = t - np.sum(t * e1, axis=1)[:, None] * e1
        e2 = t / _norm(t)[:, None]
        sin = np.sqrt(1.0 - cos * cos)
        xi = a[:, None] * e1
        zeta = b[:, None] * (cos[:, None] * e1 + sin[:, None] * e2)
        eta = xi - zeta
        r = _norm(eta)
        keep = (r > 2.0 ** (region.k2 - 1)) & (r < 2.0 ** (region.k2 + 1))
        out_xi.append(xi[keep])
        out_zeta.append(zeta[keep])
        got += int(keep.sum())
        if got >= want:
            break
    if got == 0:
        raise EmptyRegionError(f"region (k={region.k}, k1={region.k1}, k2={region.k2}) has no admissible points")
    xi = np.concatenate(out_xi)[:want]
    zeta = np.concatenate(out_zeta)[:want]
    return xi, xi - zeta


def _scales(alpha, region):
    k, k1, k2 = region.k, region.k1, region.k2
    if region.kind == "HH":
        return 2.0 ** ((alpha - 1) * k1), 2.0 ** (k + (alpha - 2) * k1)
    return 2.0 ** ((alpha - 2) * k + k2), 2.0 ** ((alpha - 1) * k)


def _second_derivs(ctx, xi, eta, wrt, h_rel=1e-4):
    """Third derivatives of phi (second of its gradients) by central differences of Hessians."""
    out = []
    for which in ("xi", "eta"):
        scale = _norm(xi if which == "xi" else eta)[:, None]
        for i in range(xi.shape[-1]):
            e = np.zeros(xi.shape[-1])
            e[i] = 1.0
            h = h_rel * scale
            if which == "xi":
                hp, hm = ctx.hessians(xi + h * e, eta), ctx.hessians(xi - h * e, eta)
            else:
                hp, hm = ctx.hessians(xi, eta + h * e), ctx.hessians(xi, eta - h * e)
            # derivative of the block d_wrt grad_comp along (which, i)
            blk = {"xi": (0, 1), "eta": (2, 3)}[wrt]
            for b_idx, second in zip(blk, ("xi", "eta")):
                d = (hp[b_idx] - hm[b_idx]) / (2 * h[..., None])
                out.append((which, second, d))
    return out


def verify_symbol_class(ctx, region, max_order=2, seed=0):
    """Sampled symbol-class constants and ellipticity ratios on one region.

    For ``grad_xi phi`` and ``grad_eta phi`` with the scale ``tau`` attached
    to the region kind, reports ``max |d^a_xi d^b_eta g| |xi|^|a| |eta|^|b| / tau``
    grouped by ``(|a|, |b|)`` and ``min |g| / tau`` (ellipticity).  Also
    reports the cone ratio ``<xi/|xi|, grad_eta phi> / |grad_eta phi|`` and
    the dominant-coordinate ratio ``|d_{eta_l} phi| / |grad_eta phi|`` with
    ``l`` the largest coordinate of ``xi``.

    Returns
    -------
    dict
        JSON-ready report; ``pass`` requires all constants finite and all
        ellipticity ratios positive.
    """
    if not region.admissible():
        raise ValidationError(f"region {region} inconsistent with kind {region.kind}")
    rng = np.random.default_rng(seed)
    xi, eta = sample_region(region, rng)
    tau_xi, tau_eta = _scales(ctx.alpha, region)
    gx, ge = ctx.grad_xi(xi, eta), ctx.grad_eta(xi, eta)
    rx, re = _norm(xi), _norm(eta)
    consts = {"grad_xi": {}, "grad_eta": {}}
    consts["grad_xi"]["0,0"] = float(np.max(np.abs(gx)) / tau_xi)
    consts["grad_eta"]["0,0"] = float(np.max(np.abs(ge)) / tau_eta)
    if max_order >= 1:
        hxx, hex_, hxe, hee = ctx.hessians(xi, eta)
        consts["grad_xi"]["1,0"] = float(np.max(np.abs(hxx) * rx[:, None, None]) / tau_xi)
        consts["grad_xi"]["0,1"] = float(np.max(np.abs(hex_) * re[:, None, None]) / tau_xi)
        consts["grad_eta"]["1,0"] = float(np.max(np.abs(hxe) * rx[:, None, None]) / tau_eta)
        consts["grad_eta"]["0,1"] = float(np.max(np.abs(hee) * re[:, None, None]) / tau_eta)
    if max_order >= 2:
        w = {"xi": rx, "eta": re}
        for comp, tau in (("xi", tau_xi), ("eta", tau_eta)):
            acc = {}
            for a, b, d in _second_derivs(ctx, xi, eta, comp):
                na = (a == "xi") + (b == "xi")
                key = f"{na},{2 - na}"
                v = float(np.max(np.abs(d) * (w[a] * w[b])[:, None, None]) / tau)
                acc[key] = max(acc.get(key, 0.0), v)
            consts["grad_" + comp].update(acc)
    nge = _norm(ge)
    cone = np.abs(np.sum(xi / rx[:, None] * ge, axis=-1)) / nge
    lidx = np.argmax(np.abs(xi), axis=-1)
    dom = np.abs(ge[np.arange(len(xi)), lidx]) / nge
    ell = {
        "grad_xi": float(np.min(_norm(gx)) / tau_xi),
        "grad_eta": float(np.min(nge) / tau_eta),
        "cone": float(np.min(cone)),
        "dominant_coordinate": float(np.min(dom)),
    }
    ok = all(np.isfinite(v) for c in consts.values() for v in c.values())
    ok = ok and ell["grad_xi"] > 0 and ell["grad_eta"] > 0 and ell["cone"] > 0
    return {
        "region": {"k": region.k, "k1": region.k1, "k2": region.k2, "kind": region.kind,
                   "samples": int(len(xi))},
        "alpha": ctx.alpha,
        "constants": consts,
        "ellipticity": ell,
        "pass": bool(ok),
    }


def region_sweep(ctx, kind, offsets=range(-10, 11), k=0, sample_count=2000, max_order=1, seed=0,
                 gap=10):
    """Run :func:`verify_symbol_class` over all admissible ``(k1-k, k2-k)`` offsets.

    By homogeneity of ``phi`` every ratio depends only on the offsets, so the
    base index ``k`` is fixed.  Empty regions are skipped and counted.

    Returns
    -------
    dict
        ``reports`` list plus per-quantity ``min``, ``max`` and ``spread``
        (max/min) of the ellipticity ratios.
    """
    reports, empty = [], 0
    for o1 in offsets:
        for o2 in offsets:
            reg = RegionSpec(k, k + o1, k + o2, kind, sample_count, gap)
            if not reg.admissible():
                continue
            try:
                reports.append(verify_symbol_class(ctx, reg, max_order, seed))
            except EmptyRegionError:
                empty += 1
    if not reports:
        raise EmptyRegionError(f"no admissible nonempty {kind} region for these offsets")
    summary = {}
    for key in ("grad_xi", "grad_eta", "cone", "dominant_coordinate"):
        vals = np.array([r["ellipticity"][key] for r in reports])
        lo, hi = float(vals.min()), float(vals.max())
        summary[key] = {"min": lo, "max": hi, "spread": hi / lo if lo > 0 else float("inf")}
    return {"alpha": ctx.alpha, "kind": kind, "regions": len(reports), "empty": empty,
            "ellipticity": summary, "reports": reports}


# ---------------------------------------------------------------------------
# expansion identity for phi^{-1} near the LH diagonal


def expansion_residual(ctx, xi, eta, N, which="phi", eps=0.25):
    """Relative residual of the finite geometric expansion of ``1/phi``.

    ``which="phi"``: ``1/phi = rho^{-N}|xi-eta|^{N a}/phi + sum_{j=1}^N rho^{-j}|xi-eta|^{(j-1)a}``
    with ``rho = |xi|^a + |eta|^a``.  ``which="grad"``: the same with
    ``phi -> d_l phi``, ``rho -> d_l G(eta)``, ``|xi-eta|^a -> d_l G(eta-xi)``
    and ``l`` the largest coordinate of ``eta``.

    Raises
    ------
    ValidationError
        When a point violates ``|xi-eta| <= eps |eta|`` or ``phi = 0``.
    """
    xi = np.atleast_2d(np.asarray(xi, float))
    eta = np.atleast_2d(np.asarray(eta, float))
    if np.any(_norm(xi - eta) > eps * _norm(eta)):
        raise ValidationError("points violate |xi-eta| <= eps |eta|")
    if which == "phi":
        lhs_den = ctx.phase(xi, eta)
        rho = ctx.rho(xi, eta)
        q = ctx.gamma(xi - eta)
    elif which == "grad":
        l = np.argmax(np.abs(eta), axis=-1)
        rows = np.arange(len(eta))
        rho = ctx.grad_gamma(eta)[rows, l]
        q = ctx.grad_gamma(eta - xi)[rows, l]
        lhs_den = rho - q
    else:
        raise ValidationError(f"unknown identity {which}")
    if np.any(lhs_den == 0):
        raise ValidationError("phi vanishes at a sample point")
    lhs = 1.0 / lhs_den
    rhs = lhs * (q / rho) ** N
    for j in range(1, N + 1):
        rhs = rhs + q ** (j - 1) / rho ** j
    return np.abs(lhs - rhs) / np.abs(lhs)


def sample_expansion_points(rng, n, eps=0.25, d=3, k_range=(-8, 8)):
    """Random ``(xi, eta)`` with ``|xi - eta| <= eps |eta|``, radii log-uniform."""
    r = 2.0 ** rng.uniform(*k_range, n)
    eta = r[:, None] * _random_dirs(rng, n, d)
    s = eps * r * rng.random(n) ** (1.0 / 3.0)
    zeta = s[:, None] * _random_dirs(rng, n, d)
    return eta + zeta, eta


def expansion_support_eps(gap):
    """Largest ``|xi-eta| / |eta|`` on the support of ``a_LH`` with the given gap.

    The low input lives below ``(5/4) 2^{k-gap}`` and the high one above
    ``2^{k-1}``, so the ratio stays under ``(5/2) 2^{-gap}``.  Any ``eps`` at
    least this large covers every point the normal form touches.
    """
    return 2.5 * 2.0 ** (-gap)


# ---------------------------------------------------------------------------
# dyadic constants


def _check_lambda(alpha, lam):
    if not (alpha - 1) / 2 < lam < 0.5:
        raise ValidationError(
            f"lambda={lam} outside ((alpha-1)/2, 1/2) = ({(alpha - 1) / 2:.6g}, 0.5)"
        )


def epsilon_rate(alpha, lam):
    """``min(2 lam/(alpha-1), 3/2 - lam) - 1``."""
    return min(2 * lam / (alpha - 1), 1.5 - lam) - 1.0


def delta_rate(alpha, lam, degenerate_factor=1 - 1e-3):
    """``min((lam + 3/2)/alpha, 3/2) - 1``, shrunk by ``degenerate_factor`` when
    ``lam + 3/2 = 3 alpha/2``."""
    d = min((lam + 1.5) / alpha, 1.5) - 1.0
    if np.isclose(lam + 1.5, 1.5 * alpha, rtol=0, atol=1e-12):
        d *= degenerate_factor
    return d


def _c1_terms(alpha, lam, t, k, k1):
    kp = np.maximum(k1, 0)
    return 2.0 ** (-lam * k) * 2.0 ** (-2 * kp) * np.minimum(
        2.0 ** (1.5 * k + 2 * lam * k1),
        t ** -1.5 * 2.0 ** ((2 * lam - 1.5 * alpha + 1.5) * k1),
    )


def _c2_terms(alpha, lam, t, k2):
    kp = np.maximum(k2, 0)
    return 2.0 ** (-2 * kp) * np.minimum(
        2.0 ** ((lam + 1.5) * k2), t ** -1.5 * 2.0 ** ((lam - 1.5 * alpha + 1.5) * k2)
    )


def dyadic_constants(alpha, lam, t, k=None, k_range=(-400, 400)):
    """The two dyadic sums driving the decay estimate.

    Parameters
    ----------
    alpha, lam : float
        ``lam`` must lie in ``((alpha-1)/2, 1/2)``.
    t : float
        Time, positive.
    k : int or None
        Output shell of ``C1``.  ``None`` takes the sup over ``k`` in
        ``k_range``, which is the quantity whose decay rate is claimed.
    k_range : tuple of int
        Truncation of every dyadic sum (and of the sup).  The default keeps
        dropped summands below 1e-16 for ``t`` up to 1e6.

    Returns
    -------
    (C1, C2) : tuple of float
    """
    _check_lambda(alpha, lam)
    if not t > 0:
        raise ValidationError("t must be positive")
    lo, hi = k_range
    k2 = np.arange(lo, hi + 1, dtype=float)
    c2 = float(np.sum(_c2_terms(alpha, lam, t, k2)))
    ks = np.arange(lo, hi + 1) if k is None else np.array([k])
    best = 0.0
    for kk in ks:
        k1 = np.arange(kk - 10, hi + 1, dtype=float)
        best = max(best, float(np.sum(_c1_terms(alpha, lam, t, float(kk), k1))))
    return best, c2
