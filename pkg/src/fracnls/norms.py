"""Weighted dyadic norms of profiles, diagnostic series and decay fits.

Both norms are suprema over shells of

    2^{2 k_+} (2^{-lam k} |psi_k f_hat| + 2^{(1-lam) k} |psi_k grad f_hat|
               [+ 2^{(2-lam) k} |psi_k grad^2 f_hat|]),

the bracketed term being present only in the W-norm.  Derivatives in
frequency are transforms of ``(-i x) f`` and ``(-i x) (x) (-i x) f``; the
Hessian is measured in the Frobenius norm.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError
from .grid import (
    active_range,
    lattice_range,
    lp_norm,
    phi_k,
    psi_k,
    sobolev_norm,
    transform_forward,
    transform_inverse,
)

__all__ = [
    "NormParams",
    "ShellContribution",
    "NormReport",
    "DiagnosticSeries",
    "BudgetReport",
    "w_norm",
    "u_norm",
    "norm_report",
    "frequency_derivatives",
    "diagnostics_at",
    "decay_fit",
    "budget_check",
    "settles_after",
    "interpolation_ratios",
    "radial_w_norm",
    "DIAGNOSTIC_KEYS",
]

DIAGNOSTIC_KEYS = ("W1", "W2", "W3", "U1", "U2", "U3")


@dataclass(frozen=True)
class NormParams:
    """Exponents of the weighted norms.

    Parameters
    ----------
    alpha : float
        Dispersion order in ``(1, 2]``.
    lam : float
        Weight exponent, strictly inside ``((alpha-1)/2, 1/2)``.
    delta : float, optional
        Decay surplus; defaults to ``min((lam+3/2)/alpha, 3/2) - 1``, shrunk
        by ``1e-3`` when ``lam + 3/2 = 3 alpha / 2``.
    """

    alpha: float
    lam: float
    delta: float = None

    def __post_init__(self):
        if not 1 < self.alpha <= 2:
            raise ValidationError(f"alpha must lie in (1, 2], got {self.alpha}")
        lo = (self.alpha - 1) / 2
        if not lo < self.lam < 0.5:
            raise ValidationError(f"lam must lie in ({lo:g}, 0.5), got {self.lam}")
        if self.delta is None:
            d = min((self.lam + 1.5) / self.alpha, 1.5) - 1
            if np.isclose(self.lam + 1.5, 1.5 * self.alpha, rtol=0, atol=1e-12):
                d *= 1 - 1e-3
            object.__setattr__(self, "delta", float(d))
        if not self.delta > 0:
            raise ValidationError(f"delta must be positive, got {self.delta}")


@dataclass(frozen=True)
class ShellContribution:
    """One shell of a W/U norm.

    ``flag`` is ``"lumped"`` for the lowest shell (which carries all mass
    below ``2^k_min``), ``"unresolved"`` above the active range and ``""``
    otherwise.
    """

    k: int
    mass: float
    grad: float
    hess: float
    total: float
    flag: str = ""


@dataclass(frozen=True)
class NormReport:
    value: float
    argmax: int
    shells: tuple

    def as_dict(self):
        return {
            "value": self.value,
            "argmax": self.argmax,
            "shells": [vars(s) for s in self.shells],
        }


def frequency_derivatives(f, order=2):
    """Coefficients of ``grad f_hat`` (and ``grad^2 f_hat`` when ``order=2``).

    Returns
    -------
    grad : list of ndarray
        ``d`` arrays.
    hess : list of ndarray
        ``d*d`` arrays in row-major order, empty when ``order=1``.
    """
    g = f.grid
    u = transform_inverse(f)
    xs = g.x
    grad = [transform_forward(-1j * xi * u, g).coeffs for xi in xs]
    hess = []
    if order >= 2:
        cache = {}
        for i in range(g.dim):
            for j in range(g.dim):
                key = (min(i, j), max(i, j))
                if key not in cache:
                    cache[key] = transform_forward(-xs[i] * xs[j] * u, g).coeffs
                hess.append(cache[key])
    return grad, hess


def _shell_norm(arrs, weight, cell):
    return float(np.sqrt(sum(np.sum(np.abs(weight * a) ** 2) for a in arrs) * cell))


def norm_report(f, params, second=True):
    """Per-shell breakdown of the W-norm (``second=True``) or U-norm."""
    g = f.grid
    if not np.all(np.isfinite(f.coeffs)):
        raise NumericalError("non-finite field")
    if not np.any(f.coeffs):
        return NormReport(0.0, active_range(g)[0], ())
    k_min, k_max = active_range(g)
    k_hi = lattice_range(g)[1]
    grad, hess = frequency_derivatives(f, 2 if second else 1)
    cell = g.dxi ** g.dim
    r = g.xi_abs
    lam = params.lam
    shells = []
    for k in range(k_min, k_hi + 1):
        if k == k_min:
            wgt, flag = phi_k(r, k), "lumped"
        else:
            wgt, flag = psi_k(r, k), ("unresolved" if k > k_max else "")
        if k > k_max and not np.any(wgt * f.coeffs):
            continue
        a = _shell_norm([f.coeffs], wgt, cell)
        b = _shell_norm(grad, wgt, cell)
        c = _shell_norm(hess, wgt, cell) if second else 0.0
        tot = 2.0 ** (2 * max(k, 0)) * (2.0 ** (-lam * k) * a + 2.0 ** ((1 - lam) * k) * b
                                        + 2.0 ** ((2 - lam) * k) * c)
        shells.append(ShellContribution(k, a, b, c, float(tot), flag))
    best = max(shells, key=lambda s: s.total)
    return NormReport(best.total, best.k, tuple(shells))


def w_norm(f, params):
    """W-norm of a profile; see :func:`norm_report` for the shell breakdown."""
    return norm_report(f, params, second=True).value


def u_norm(f, params):
    """U-norm of a profile (no second-derivative term)."""
    return norm_report(f, params, second=False).value


# ---------------------------------------------------------------------------
# diagnostics along a trajectory


def diagnostics_at(t, w, u, f, g, params):
    """Instantaneous values of the six diagnostic norms.

    ``w, u`` are the fields at time ``t`` and ``f, g`` their profiles.
    ``W2``/``U2`` carry the factor ``(1+t)^(1+delta)``.
    """
    scale = (1.0 + t) ** (1.0 + params.delta)
    return {
        "W1": sobolev_norm(w, 10),
        "W2": scale * lp_norm(w, np.inf),
        "W3": w_norm(f, params),
        "U1": sobolev_norm(u, 10),
        "U2": scale * lp_norm(u, np.inf),
        "U3": u_norm(g, params),
    }


@dataclass
class DiagnosticSeries:
    """Instantaneous diagnostic norms at increasing times.

    Attributes
    ----------
    times : ndarray
    values : dict
        ``key -> ndarray`` for each key in :data:`DIAGNOSTIC_KEYS`; extra keys
        (for instance the unscaled sup norm ``"u_inf"``) are allowed.
    """

    times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    values: dict = field(default_factory=dict)

    def append(self, t, row):
        self.times = np.append(self.times, float(t))
        for key, v in row.items():
            if not (np.isfinite(v) and v >= 0):
                raise NumericalError(f"diagnostic {key} is {v} at t={t}")
            self.values[key] = np.append(self.values.get(key, np.zeros(0)), float(v))

    def running_sup(self):
        return {k: np.maximum.accumulate(v) for k, v in self.values.items()}

    def to_csv(self, path):
        keys = list(self.values)
        data = np.column_stack([self.times] + [self.values[k] for k in keys])
        np.savetxt(path, data, delimiter=",", header=",".join(["t"] + keys), comments="",
                   fmt="%.17g")


def decay_fit(t, values, window=None, max_residual=0.5):
    """Least-squares power law ``value ~ C (1+t)^p``.

    Parameters
    ----------
    t, values : array_like
        At least ten samples with positive values inside ``window``.
    window : tuple, optional
        ``(t_lo, t_hi)`` restricting the samples.
    max_residual : float
        Largest admissible RMS residual of the log-log fit.

    Returns
    -------
    dict
        ``exponent``, ``intercept`` (of ``log value``) and ``residual``.
    """
    t = np.asarray(t, float)
    v = np.asarray(values, float)
    if window is not None:
        sel = (t >= window[0]) & (t <= window[1])
        t, v = t[sel], v[sel]
    if t.size < 10:
        raise ValidationError(f"decay fit needs at least 10 points, got {t.size}")
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise ValidationError("decay fit needs positive finite values")
    x, y = np.log1p(t), np.log(v)
    (p, c), *_ = np.linalg.lstsq(np.column_stack([x, np.ones_like(x)]), y, rcond=None)
    res = float(np.sqrt(np.mean((y - p * x - c) ** 2)))
    if res > max_residual:
        raise NumericalError(f"series is not a power law (residual {res:.3g})")
    return {"exponent": float(p), "intercept": float(c), "residual": res}


@dataclass(frozen=True)
class BudgetReport:
    sups: dict
    total: float
    eps0: float
    implied_constant: float

    def as_dict(self):
        return {"sups": dict(self.sups), "total": self.total, "eps0": self.eps0,
                "implied_constant": self.implied_constant}


def budget_check(series, eps0):
    """Smallest ``C`` with ``sum of sup-in-time diagnostic norms <= C eps0``.

    ``series`` is a :class:`DiagnosticSeries` or anything with a
    ``diagnostics`` attribute holding one.
    """
    series = getattr(series, "diagnostics", series)
    if eps0 <= 0:
        raise ValidationError("eps0 must be positive")
    sups = {k: float(np.max(series.values[k])) if len(series.values.get(k, ())) else 0.0
            for k in DIAGNOSTIC_KEYS}
    total = float(sum(sups.values()))
    return BudgetReport(sups, total, float(eps0), total / eps0)


def settles_after(times, values, t_transient, tol=0.05):
    """Largest ratio ``v(t_j) / v(t_i)`` over ``t_transient <= t_i <= t_j``.

    The series is non-increasing after the transient, within ``tol``, when the
    returned ratio is at most ``1 + tol``.
    """
    t = np.asarray(times, float)
    v = np.asarray(values, float)[t >= t_transient]
    if v.size == 0:
        raise ValidationError("no samples after the transient")
    later_max = np.maximum.accumulate(v[::-1])[::-1]
    return float(np.max(later_max / v))


# ---------------------------------------------------------------------------
# interpolation and radial norms


def interpolation_ratios(f):
    """``|f|_1 / (|f|_2^{1/4} ||x|^2 f|_2^{3/4})`` and the ``L^{4/3}`` analogue with ``|x| f``."""
    g = f.grid
    u = np.abs(transform_inverse(f))
    cell = g.spacing ** g.dim
    l1 = np.sum(u) * cell
    l43 = (np.sum(u ** (4 / 3)) * cell) ** 0.75
    l2 = np.sqrt(np.sum(u ** 2) * cell)
    x1 = np.sqrt(np.sum((g.x_abs * u) ** 2) * cell)
    x2 = np.sqrt(np.sum((g.x_abs ** 2 * u) ** 2) * cell)
    return float(l1 / (l2 ** 0.25 * x2 ** 0.75)), float(l43 / (l2 ** 0.25 * x1 ** 0.75))


def radial_w_norm(profile, params, k_range=(-12, 12), nodes=4001, second=True):
    """W-norm (or U-norm) of a 3D radial profile ``f_hat(|xi|)``.

    The gradient is ``f'`` and the Hessian has eigenvalues ``f''`` and
    ``f'/rho`` (twice), so ``|grad^2 f|^2 = f''^2 + 2 (f'/rho)^2``.
    """
    a, b = profile.support
    rho = np.linspace(max(a, 1e-12), b, nodes)
    f = profile(rho)
    d1 = profile.spline(rho, 1)
    d2 = profile.spline(rho, 2)
    h2 = d2 ** 2 + 2 * (d1 / rho) ** 2
    best = 0.0
    for k in range(*k_range):
        w = psi_k(rho, k) ** 2 * 4 * np.pi * rho ** 2
        m = np.sqrt(np.trapezoid(w * np.abs(f) ** 2, rho))
        gr = np.sqrt(np.trapezoid(w * np.abs(d1) ** 2, rho))
        hs = np.sqrt(np.trapezoid(w * h2, rho)) if second else 0.0
        tot = 2.0 ** (2 * max(k, 0)) * (2.0 ** (-params.lam * k) * m + 2.0 ** ((1 - params.lam) * k) * gr
                                        + 2.0 ** ((2 - params.lam) * k) * hs)
        best = max(best, tot)
    return float(best)
