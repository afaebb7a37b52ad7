"""Time integration in the profile frame.

The state is the profile ``g_hat(t) = exp(i t |xi|^alpha) u_hat(t)``, for
which the original equation ``(d_t + i D^alpha) u = c u conj(u)`` reads

    d_t g_hat = c exp(i t |xi|^alpha) F(|u|^2).

The transformed system evolves ``f_hat = exp(i t |xi|^alpha) w_hat`` for
``w = u + i c B(u, conj u)``, with

    (d_t + i D^alpha) w = c (w wb)_{HH+HL} + i |c|^2 (w conj B)_{HH+HL}
                          - i c^2 (B ub)_{HH+HL} + i c^2 B(|u|^2, ub)
                          + i |c|^2 B(u, |u|^2),

``B = B(u, ub)``, and ``u`` recovered from ``w`` by Picard inversion at
every stage.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .errors import BlowUpError, NumericalError, ValidationError
from .grid import (
    SpectralField,
    active_range,
    bump_phi,
    dispersion,
    lp_norm,
    sobolev_norm,
    transform_forward,
)
from .norms import DiagnosticSeries, budget_check, diagnostics_at, u_norm, w_norm
from .paraproduct import (
    DEFAULT_GAP,
    apply_B,
    hh_hl,
    normal_form_forward,
    normal_form_invert,
    product,
)

__all__ = [
    "StepperConfig",
    "Trajectory",
    "rhs_original",
    "rhs_transformed",
    "evolve",
    "wrap_time",
    "shell_data",
    "gaussian_data",
    "normal_form_residual",
    "to_profile",
    "from_profile",
    "data_size",
    "implied_constant",
    "smallness_threshold",
]

SCHEMES = ("rk4", "strang")
KINDS = ("original", "transformed")


@dataclass(frozen=True)
class StepperConfig:
    """Integrator settings.

    Parameters
    ----------
    scheme : {"rk4", "strang"}
        RK4 on the profile, or Strang splitting of exact linear flow and a
        midpoint step of the nonlinearity (order 2).
    dt : float, optional
        Step size; by default ``min(0.01, 0.1 / (|c| max|u0|))``.
    dealias : bool
        2/3-rule truncation of the quadratic term.  The transformed system
        is always dealiased.
    coupling : complex
        Constant ``c`` in front of the nonlinearity.
    gap : int
        Paraproduct separation.
    """

    scheme: str = "rk4"
    dt: float = None
    dealias: bool = True
    coupling: complex = 1.0
    gap: int = DEFAULT_GAP

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValidationError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.dt is not None and not self.dt > 0:
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if not np.isfinite(complex(self.coupling)):
            raise ValidationError("coupling must be finite")

    def step_size(self, u0):
        if self.dt is not None:
            return float(self.dt)
        amp = abs(complex(self.coupling)) * lp_norm(u0, np.inf)
        return 0.01 if amp == 0 else float(min(0.01, 0.1 / amp))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Stored output of :func:`evolve`.

    Attributes
    ----------
    times : ndarray
        Strictly increasing output times.
    profiles : tuple of SpectralField
        ``g_hat`` at each output time.
    wprofiles : tuple of SpectralField or None
        ``f_hat`` for the transformed system.
    diagnostics : DiagnosticSeries
    meta : dict
        Step size, stability heuristic, wrap time and abort flags.
    """

    times: np.ndarray
    profiles: tuple
    wprofiles: tuple = None
    diagnostics: DiagnosticSeries = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValidationError("trajectory times must increase strictly")
        if len(self.profiles) != len(self.times):
            raise ValidationError("one profile per output time")
        grids = {p.grid for p in self.profiles}
        if len(grids) > 1:
            raise ValidationError("profiles live on different grids")

    def field_at(self, i, which="u"):
        """Physical-frame field (``u`` or ``w``) at output index ``i``."""
        prof = self.profiles[i] if which == "u" else self.wprofiles[i]
        return from_profile(prof, self.meta["alpha"], self.times[i])


def _phase(grid, alpha, t, cache):
    key = float(t)
    e = cache.get(key)
    if e is None:
        if len(cache) > 4:
            cache.clear()
        e = np.exp(1j * t * dispersion(grid, alpha))
        cache[key] = e
    return e


def to_profile(u, alpha, t):
    """``exp(i t D^alpha) u``."""
    return u.with_coeffs(u.coeffs * np.exp(1j * t * dispersion(u.grid, alpha)))


def from_profile(g, alpha, t):
    """``exp(-i t D^alpha) g``."""
    return g.with_coeffs(g.coeffs * np.exp(-1j * t * dispersion(g.grid, alpha)))


def wrap_time(grid, alpha):
    """Time at which the fastest resolved group speed has crossed ``L/2``."""
    k_max = active_range(grid)[1]
    return grid.half_width / 2 / (alpha * 2.0 ** (k_max * (alpha - 1)))


def _square(grid, c, dealias):
    """Coefficients of ``|u|^2``."""
    if dealias:
        cb = np.conj(c)
        for ax in range(grid.dim):
            cb = np.roll(np.flip(cb, axis=ax), 1, axis=ax)
        return product(grid, c, cb)
    u = sfft.ifftn(c * (grid.sign / grid.forward_scale))
    return sfft.fftn(np.abs(u) ** 2) * (grid.forward_scale * grid.sign)


def _check(c, s):
    if not np.all(np.isfinite(c)):
        raise BlowUpError(s)
    return c


def _nonlinear_transformed(w, u, alpha, config):
    c = complex(config.coupling)
    gap = config.gap
    ub = u.conj()
    b = apply_B(u, ub, alpha, gap)
    sq = u.with_coeffs(_square(u.grid, u.coeffs, True))
    out = c * hh_hl(w, w, gap).coeffs
    out = out + 1j * abs(c) ** 2 * hh_hl(w, b, gap).coeffs
    out = out - 1j * c ** 2 * hh_hl(b, u, gap).coeffs
    out = out + 1j * c ** 2 * apply_B(sq, ub, alpha, gap).coeffs
    out = out + 1j * abs(c) ** 2 * apply_B(u, sq, alpha, gap).coeffs
    return out


def rhs_original(g, s, alpha, config=StepperConfig(), _cache=None):
    """``d_s g_hat = c exp(i s |xi|^alpha) F(|u|^2)`` with ``u = exp(-i s D^alpha) g``.

    Raises
    ------
    BlowUpError
        When the nonlinearity is not finite.
    """
    if s < 0:
        raise ValidationError("s must be nonnegative")
    cache = {} if _cache is None else _cache
    e = _phase(g.grid, alpha, s, cache)
    u = g.with_coeffs(g.coeffs * np.conj(e))
    n = complex(config.coupling) * _square(g.grid, u.coeffs, config.dealias)
    return g.with_coeffs(_check(e * n, s))


def rhs_transformed(f, g, s, alpha, config=StepperConfig(), _cache=None):
    """Profile derivative of the transformed system.

    ``f`` and ``g`` are the profiles of ``w`` and ``u`` at time ``s``.
    """
    if f.grid != g.grid:
        raise ValidationError("profiles live on different grids")
    if s < 0:
        raise ValidationError("s must be nonnegative")
    cache = {} if _cache is None else _cache
    e = _phase(f.grid, alpha, s, cache)
    w = f.with_coeffs(f.coeffs * np.conj(e))
    u = g.with_coeffs(g.coeffs * np.conj(e))
    return f.with_coeffs(_check(e * _nonlinear_transformed(w, u, alpha, config), s))


class _System:
    """Right-hand side on raw coefficient arrays, with warm-started inversion."""

    def __init__(self, grid, alpha, config, kind):
        self.grid, self.alpha, self.config, self.kind = grid, alpha, config, kind
        self.cache = {}
        self.u_guess = None
        self.inversions = 0
        self.max_picard = 0

    def recover(self, w):
        c = complex(self.config.coupling)
        u, rep = normal_form_invert(w, self.alpha, c, self.config.gap, u0=self.u_guess)
        self.u_guess = u
        self.inversions += 1
        self.max_picard = max(self.max_picard, rep.iterations)
        return u

    def nonlinear(self, c_phys):
        """Nonlinearity for a physical-frame coefficient array."""
        f = SpectralField(self.grid, c_phys)
        if self.kind == "original":
            return complex(self.config.coupling) * _square(self.grid, c_phys, self.config.dealias)
        return _nonlinear_transformed(f, self.recover(f), self.alpha, self.config)

    def profile_rhs(self, s, c_prof):
        e = _phase(self.grid, self.alpha, s, self.cache)
        return _check(e * self.nonlinear(c_prof * np.conj(e)), s)


def _rk4(sys_, s, y, h):
    k1 = sys_.profile_rhs(s, y)
    k2 = sys_.profile_rhs(s + h / 2, y + (h / 2) * k1)
    k3 = sys_.profile_rhs(s + h / 2, y + (h / 2) * k2)
    k4 = sys_.profile_rhs(s + h, y + h * k3)
    return y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)


def _strang(sys_, s, y, h):
    # y is a profile; the split acts on the physical frame at time s
    disp = dispersion(sys_.grid, sys_.alpha)
    half = np.exp(-0.5j * h * disp)
    c = y * np.exp(-1j * s * disp)
    c = half * c
    mid = c + (h / 2) * sys_.nonlinear(c)
    c = c + h * sys_.nonlinear(mid)
    c = half * c
    return _check(c * np.exp(1j * (s + h) * disp), s + h)


def evolve(u0, alpha, t_end, config=StepperConfig(), kind="original", output_times=None,
           n_out=20, params=None, wrap_guard=True):
    """Integrate from ``u0`` at ``t=0``.

    Parameters
    ----------
    u0 : SpectralField
        Initial datum (physical frame, equal to the profile at ``t=0``).
    alpha : float
    t_end : float
    config : StepperConfig
    kind : {"original", "transformed"}
    output_times : array_like, optional
        Increasing times in ``[0, t_end]``; default ``n_out+1`` uniform times.
    params : NormParams, optional
        When given, the six diagnostic norms are recorded; otherwise only
        ``u_inf``, ``u_l2`` and ``U1``.
    wrap_guard : bool
        Stop at :func:`wrap_time` if ``t_end`` exceeds it.

    Returns
    -------
    Trajectory
    """
    if kind not in KINDS:
        raise ValidationError(f"kind must be one of {KINDS}, got {kind!r}")
    if not 1 < alpha <= 2:
        raise ValidationError(f"alpha must lie in (1, 2], got {alpha}")
    if not t_end > 0:
        raise ValidationError("t_end must be positive")
    grid = u0.grid
    t_wrap = wrap_time(grid, alpha)
    meta = {"alpha": alpha, "kind": kind, "scheme": config.scheme, "wrap_time": t_wrap,
            "aborted_at_wrap": False}
    if wrap_guard and t_end > t_wrap:
        t_end = t_wrap
        meta["aborted_at_wrap"] = True
    if output_times is None:
        output_times = np.linspace(0.0, t_end, n_out + 1)
    times = np.asarray(output_times, float)
    times = times[times <= t_end * (1 + 1e-12)]
    if times.size == 0 or times[0] < 0 or np.any(np.diff(times) <= 0):
        raise ValidationError("output times must be increasing inside [0, t_end]")
    dt = config.step_size(u0)
    amp = abs(complex(config.coupling)) * lp_norm(u0, np.inf)
    meta.update(dt=dt, stability_number=2 * dt * amp, stability_ok=bool(2 * dt * amp < 1))

    sys_ = _System(grid, alpha, config, kind)
    c = complex(config.coupling)
    if kind == "transformed":
        y = normal_form_forward(u0, alpha, c, config.gap).coeffs
        sys_.u_guess = u0
    else:
        y = u0.coeffs.astype(complex)
    stepper = _rk4 if config.scheme == "rk4" else _strang
    profiles, wprofiles = [], []
    series = DiagnosticSeries()
    s = 0.0
    steps = 0
    for t_out in times:
        span = t_out - s
        if span > 0:
            n = max(1, int(np.ceil(span / dt - 1e-9)))
            h = span / n
            # overflow surfaces as BlowUpError through _check
            with np.errstate(over="ignore", invalid="ignore"):
                for _ in range(n):
                    y = stepper(sys_, s, y, h)
                    s += h
                    steps += 1
            s = float(t_out)
        prof = SpectralField(grid, y.copy())
        if kind == "transformed":
            wprofiles.append(prof)
            w = from_profile(prof, alpha, s)
            u = sys_.recover(w)
            g = to_profile(u, alpha, s)
        else:
            g = prof
            u = from_profile(g, alpha, s)
            w = None
        profiles.append(g)
        series.append(s, _diagnostics(s, u, w, g, alpha, c, config, params))
    meta.update(steps=steps, inversions=sys_.inversions, max_picard=sys_.max_picard)
    return Trajectory(times, tuple(profiles), tuple(wprofiles) if wprofiles else None,
                      series, meta)


def _diagnostics(t, u, w, g, alpha, c, config, params):
    row = {"u_inf": lp_norm(u, np.inf), "u_l2": u.l2()}
    if params is None:
        row["U1"] = sobolev_norm(u, 10)
        return row
    if w is None:
        w = normal_form_forward(u, alpha, c, config.gap)
    f = to_profile(w, alpha, t)
    row.update(diagnostics_at(t, w, u, f, g, params))
    row["w_inf"] = lp_norm(w, np.inf)
    return row


# ---------------------------------------------------------------------------
# initial data


def shell_data(grid, eps0, k0, lam, width=0.5, seed=0, phase_amp=1.0):
    """``eps0 2^{lam k0} bump((|xi| - 2^k0) / (width 2^k0)) exp(i theta(xi))``.

    ``bump`` is the transition function ``phi``: one up to 1, zero beyond
    5/4.  ``theta`` is the random smooth phase ``a . xi + b |xi|^2 2^{-k0}``
    with ``|a|, |b| <= phase_amp``.
    """
    if not 0 < width < 0.8:
        raise ValidationError("width must lie in (0, 0.8)")
    rng = np.random.default_rng(seed)
    a = rng.uniform(-phase_amp, phase_amp, grid.dim)
    b = rng.uniform(-phase_amp, phase_amp)
    r = grid.xi_abs
    s = np.abs(r - 2.0 ** k0) / (width * 2.0 ** k0)
    amp = bump_phi(s)
    theta = sum(a[i] * grid.xi[i] for i in range(grid.dim)) + b * r ** 2 * 2.0 ** (-k0)
    c = eps0 * 2.0 ** (lam * k0) * amp * np.exp(1j * theta)
    return SpectralField(grid, np.where(grid.dealias_mask, c, 0.0))


def gaussian_data(grid, eps0, sigma=2.5, seed=None, chirp=0.0):
    """``eps0 exp(-|x|^2 / (2 sigma^2))`` in physical space, optionally chirped.

    Coefficients outside the 2/3-rule set are removed.
    """
    r2 = sum(x * x for x in grid.x)
    u = eps0 * np.exp(-r2 / (2 * sigma ** 2) + 1j * chirp * r2)
    if seed is not None:
        rng = np.random.default_rng(seed)
        u = u * np.exp(1j * rng.uniform(-np.pi, np.pi))
    f = transform_forward(u, grid)
    return f.with_coeffs(np.where(grid.dealias_mask, f.coeffs, 0.0))


# ---------------------------------------------------------------------------
# normal-form equivalence


def normal_form_residual(u0, alpha, t_end, dts, coupling=1.0, n_out=10, scheme="rk4"):
    """Equivalence residual between the original and transformed evolutions.

    For each step size the original equation is integrated for ``u`` and the
    transformed system for ``w``; the returned residual is the sup over the
    output times of ``||w - (u + i c B(u, conj u))||_{H^10}``.

    Returns
    -------
    dict
        ``dts``, ``residuals`` and observed ``orders`` between successive
        step sizes.
    """
    res = []
    times = np.linspace(0.0, t_end, n_out + 1)
    for dt in dts:
        cfg = StepperConfig(scheme=scheme, dt=dt, coupling=coupling)
        a = evolve(u0, alpha, t_end, cfg, "original", times, wrap_guard=False)
        b = evolve(u0, alpha, t_end, cfg, "transformed", times, wrap_guard=False)
        worst = 0.0
        for i, t in enumerate(times):
            u = from_profile(a.profiles[i], alpha, t)
            w = from_profile(b.wprofiles[i], alpha, t)
            worst = max(worst, sobolev_norm(w - normal_form_forward(u, alpha, coupling), 10))
        res.append(worst)
    res = np.array(res)
    ratios = np.asarray(dts[:-1], float) / np.asarray(dts[1:], float)
    orders = np.log(res[:-1] / res[1:]) / np.log(ratios) if len(res) > 1 else np.zeros(0)
    return {"dts": list(map(float, dts)), "residuals": res.tolist(), "orders": orders.tolist()}


# ---------------------------------------------------------------------------
# smallness


def data_size(u0, alpha, params, coupling=1.0, gap=DEFAULT_GAP):
    """``||w0||_W + ||u0||_{H^10} + ||u0||_U`` with ``w0 = u0 + i c B(u0, conj u0)``."""
    w0 = normal_form_forward(u0, alpha, coupling, gap)
    return w_norm(w0, params) + sobolev_norm(u0, 10) + u_norm(u0, params)


def implied_constant(u0, alpha, params, t_probe, config=StepperConfig(), n_out=5):
    """Budget constant of one run: sum of sup-in-time diagnostics over the data size."""
    tr = evolve(u0, alpha, t_probe, config, "original", n_out=n_out, params=params)
    return budget_check(tr, data_size(u0, alpha, params, config.coupling, config.gap)).implied_constant


def smallness_threshold(make_data, alpha, params, t_probe, config=StepperConfig(),
                        bracket=(1e-3, 1.0), iterations=6, factor=2.0, n_out=5):
    """Empirical smallness threshold by bisection in log-amplitude.

    The threshold is the largest amplitude ``A`` for which the implied budget
    constant of a run of length ``t_probe`` from ``make_data(A)`` stays within
    ``factor`` times the constant of the free flow.  Runs that blow up or
    whose normal form fails to invert count as too large.

    Returns
    -------
    dict
        ``threshold``, the free-flow constant ``c_linear`` and the probed
        ``(amplitude, constant)`` pairs.
    """
    lin_cfg = StepperConfig(config.scheme, config.dt, config.dealias, 0.0, config.gap)
    c_lin = implied_constant(make_data(bracket[0]), alpha, params, t_probe, lin_cfg, n_out)
    probes = []

    def ok(a):
        try:
            c = implied_constant(make_data(a), alpha, params, t_probe, config, n_out)
        except NumericalError:
            c = np.inf
        probes.append((float(a), float(c)))
        return c <= factor * c_lin

    lo, hi = bracket
    if not ok(lo):
        raise ValidationError("lower amplitude bracket is already above the threshold")
    if ok(hi):
        return {"threshold": float(hi), "c_linear": c_lin, "probes": probes, "bracketed": False}
    for _ in range(iterations):
        mid = np.sqrt(lo * hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return {"threshold": float(lo), "c_linear": c_lin, "probes": probes, "bracketed": True}
