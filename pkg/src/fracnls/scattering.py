"""Forward scattering diagnostics and the final-data (wave operator) iteration.

The final-data problem is solved by the Picard scheme

    (d_t + i D^alpha) w_{n+1} = Q(w_n, u_n),
    u_{n+1} = w_{n+1} - i c B(u_n, conj u_n),
    exp(i t D^alpha) w_{n+1}(t) -> f_inf,

started from free waves ``w_1 = u_1 = exp(-i t D^alpha) f_inf``.  With the
limit truncated at ``T_max`` the profile of ``w_{n+1}`` is the backward
Duhamel integral

    f_{n+1}(t) = f_inf - int_t^{T_max} exp(i s D^alpha) Q(w_n, u_n)(s) ds,

evaluated by the composite trapezoid rule on a fixed uniform mesh.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonContractionError, ValidationError
from .evolution import (
    StepperConfig,
    _nonlinear_transformed,
    evolve,
    from_profile,
    wrap_time,
)
from .grid import SpectralField, dispersion, sobolev_norm
from .norms import NormParams, decay_fit, w_norm
from .paraproduct import apply_B

__all__ = [
    "IterationReport",
    "FinalDataResult",
    "forward_profile_cauchy",
    "cauchy_blocks",
    "final_data_iterate",
    "wave_operator_roundtrip",
]


def forward_profile_cauchy(trajectory, s=10):
    """``||g(t_{i+1}) - g(t_i)||_{H^s}`` along the stored profiles."""
    p = trajectory.profiles
    return np.array([sobolev_norm(p[i + 1] - p[i], s) for i in range(len(p) - 1)])


def cauchy_blocks(trajectory, s=10):
    """Differences over dyadic blocks ``[T, 2T]`` and the fitted rate ``delta'``.

    For each stored time ``T`` with a stored time ``2T`` (within 1e-9) the
    value ``||g(2T) - g(T)||_{H^s}`` is recorded.

    Returns
    -------
    dict
        ``T``, ``diff`` and, with at least 10 blocks, the fitted ``exponent``
        (``-delta'``).
    """
    t = np.asarray(trajectory.times)
    rows = []
    for i, ti in enumerate(t):
        if ti <= 0:
            continue
        j = np.flatnonzero(np.abs(t - 2 * ti) <= 1e-9 * max(1.0, ti))
        if j.size:
            rows.append((ti, sobolev_norm(trajectory.profiles[j[0]] - trajectory.profiles[i], s)))
    out = {"T": [r[0] for r in rows], "diff": [r[1] for r in rows], "exponent": None}
    if len(rows) >= 10 and all(r[1] > 0 for r in rows):
        out["exponent"] = decay_fit(out["T"], out["diff"])["exponent"]
    return out


@dataclass
class IterationReport:
    """Per-iteration successive differences and contraction ratios.

    ``diffs[n]`` is ``sup_t`` of the ``H^10`` distance between iterates
    ``n+1`` and ``n+2`` (profiles of ``w`` and ``u`` added).
    """

    iterations: int = 0
    diffs: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    converged: bool = False
    quadrature_error: float = 0.0

    @property
    def contraction_factor(self):
        """Largest ratio after the first iterate (0 when fewer than two differences)."""
        return float(max(self.ratios)) if self.ratios else 0.0

    def as_dict(self):
        return {"iterations": self.iterations, "diffs": list(map(float, self.diffs)),
                "ratios": list(map(float, self.ratios)), "converged": self.converged,
                "quadrature_error": float(self.quadrature_error),
                "contraction_factor": self.contraction_factor}


@dataclass(frozen=True, eq=False)
class FinalDataResult:
    """Converged final-data solution on the shared mesh.

    ``fprofiles``/``gprofiles`` are the profiles of ``w`` and ``u``.
    """

    times: np.ndarray
    fprofiles: tuple
    gprofiles: tuple
    report: IterationReport
    alpha: float
    coupling: complex

    def u_at(self, i):
        return from_profile(self.gprofiles[i], self.alpha, self.times[i])


class _Packed:
    """Profiles on the mesh stored on the 2/3-rule modes only."""

    def __init__(self, grid, m):
        self.grid = grid
        self.idx = np.flatnonzero(grid.dealias_mask)
        self.data = np.zeros((m, self.idx.size), dtype=complex)

    def put(self, i, c):
        self.data[i] = c.ravel()[self.idx]

    def get(self, i):
        out = np.zeros(self.grid.shape, dtype=complex)
        out.ravel()[self.idx] = self.data[i]
        return out


def _h_weight(grid, s=10):
    return ((1.0 + grid.xi_abs ** 2) ** s).ravel()


def final_data_iterate(f_inf, alpha, T_max=None, config=StepperConfig(), max_iters=10,
                       tol=1e-10, mesh_step=0.05, eps0_max=None, params=None):
    """Picard iteration for the solution scattering to ``f_inf``.

    Parameters
    ----------
    f_inf : SpectralField
        Final profile, restricted to the 2/3-rule modes.
    alpha : float
    T_max : float, optional
        Truncation time, by default 0.8 times the wrap time.
    config : StepperConfig
        Supplies ``coupling`` and ``gap``.
    max_iters : int
    tol : float
        Stop when the successive difference falls below ``tol`` times
        ``||f_inf||_{H^10}``.
    mesh_step : float
        Upper bound on the mesh spacing; the node count is made even for the
        Richardson check.
    eps0_max : float, optional
        Reject data with ``||f_inf||_{H^10} + ||f_inf||_W`` above this bound
        (``params`` is then required).

    Raises
    ------
    NonContractionError
        When three consecutive contraction ratios are at least 1.
    ValidationError
        When ``T_max`` exceeds the wrap time, or the data are too large.
    """
    g = f_inf.grid
    t_wrap = wrap_time(g, alpha)
    if T_max is None:
        T_max = 0.8 * t_wrap
    if not 0 < T_max <= t_wrap:
        raise ValidationError(f"T_max must lie in (0, {t_wrap:.4g}] (wrap bound)")
    if eps0_max is not None:
        if params is None:
            params = NormParams(alpha, 0.25 + alpha / 4)
        size = sobolev_norm(f_inf, 10) + w_norm(f_inf, params)
        if size > eps0_max:
            raise ValidationError(f"final data of size {size:.4g} exceed eps0_max={eps0_max:.4g}")
    c = complex(config.coupling)
    gap = config.gap
    m = int(np.ceil(T_max / mesh_step))
    m += m % 2
    times = np.linspace(0.0, T_max, m + 1)
    h = times[1] - times[0]
    disp = dispersion(g, alpha)
    fin = np.where(g.dealias_mask, f_inf.coeffs, 0.0)
    weight = _h_weight(g)[np.flatnonzero(g.dealias_mask)]
    cell = g.dxi ** g.dim

    def hnorm(a):
        return float(np.sqrt(np.sum(weight * np.abs(a) ** 2) * cell))

    scale = hnorm(fin[g.dealias_mask].ravel()) if np.any(fin) else 0.0
    f_old, g_old = _Packed(g, m + 1), _Packed(g, m + 1)
    for i in range(m + 1):
        f_old.put(i, fin)
        g_old.put(i, fin)
    rep = IterationReport()
    bad = 0
    if scale == 0:
        rep.converged = True
        return _result(times, f_old, g_old, rep, alpha, c)
    for n in range(max_iters):
        f_new, g_new = _Packed(g, m + 1), _Packed(g, m + 1)
        acc = np.zeros(fin.shape, dtype=complex)
        acc_coarse = np.zeros(fin.shape, dtype=complex)
        prev = None
        quad = 0.0
        worst = 0.0
        for i in range(m, -1, -1):
            t = times[i]
            e = np.exp(1j * t * disp)
            w = SpectralField(g, f_old.get(i) * np.conj(e))
            u = SpectralField(g, g_old.get(i) * np.conj(e))
            forcing = e * _nonlinear_transformed(w, u, alpha, config)
            if prev is not None:
                acc = acc + (h / 2) * (forcing + prev[0])
                if (m - i) % 2 == 0:
                    acc_coarse = acc_coarse + h * (forcing + prev[1])
                    quad = max(quad, hnorm((acc - acc_coarse).ravel()[f_new.idx]) / 3)
            if (m - i) % 2 == 0:
                prev = (forcing, forcing)
            else:
                prev = (forcing, prev[1])
            fn = fin - acc
            bu = apply_B(u, u.conj(), alpha, gap).coeffs
            gn = fn - e * (1j * c) * bu
            f_new.put(i, fn)
            g_new.put(i, gn)
            worst = max(worst, hnorm(f_new.data[i] - f_old.data[i]) + hnorm(g_new.data[i] - g_old.data[i]))
        rep.iterations = n + 1
        rep.quadrature_error = quad / scale
        if rep.diffs:
            q = worst / rep.diffs[-1] if rep.diffs[-1] > 0 else 0.0
            rep.ratios.append(q)
            bad = bad + 1 if q >= 1 else 0
        rep.diffs.append(worst)
        f_old, g_old = f_new, g_new
        if bad >= 3:
            raise NonContractionError(rep.ratios, "final-data iteration does not contract")
        if worst <= tol * scale:
            rep.converged = True
            break
    return _result(times, f_old, g_old, rep, alpha, c)


def _result(times, fp, gp, rep, alpha, c):
    g = fp.grid
    fs = tuple(SpectralField(g, fp.get(i)) for i in range(len(times)))
    gs = tuple(SpectralField(g, gp.get(i)) for i in range(len(times)))
    return FinalDataResult(times, fs, gs, rep, alpha, c)


def wave_operator_roundtrip(f_inf, alpha, T_max=None, config=StepperConfig(), horizon=None,
                            detail=False, **kwargs):
    """Defect of the final-data solution re-run forward from ``t = 0``.

    The initial value ``u(0)`` of the final-data solution built on
    ``[0, T_max]`` is evolved forward with the original equation up to
    ``horizon`` (default ``T_max``), and the returned defect is
    ``||g(horizon) - f_inf||_{H^10}``.  For ``horizon > T_max`` this contains
    the Duhamel tail over ``[T_max, horizon]`` that the truncated iteration
    drops, so comparing several ``T_max`` at one horizon measures how fast
    the tail shrinks.  With ``detail=True`` a dict is returned that also holds
    the largest deviation from the final-data profiles on ``[0, T_max]`` and
    the iteration report.
    """
    if horizon is not None and T_max is not None and horizon < T_max:
        raise ValidationError("horizon must not precede T_max")
    res = final_data_iterate(f_inf, alpha, T_max, config, **kwargs)
    T = float(res.times[-1])
    horizon = T if horizon is None else float(horizon)
    if horizon < T:
        raise ValidationError("horizon must not precede T_max")
    if not np.any(f_inf.coeffs):
        return {"defect": 0.0, "deviation": 0.0, "report": res.report.as_dict(),
                "T_max": T, "horizon": horizon} if detail else 0.0
    stride = max(1, (len(res.times) - 1) // 10)
    sub = res.times[::stride]
    if sub[-1] != T:
        sub = np.append(sub, T)
    if horizon > T:
        sub = np.append(sub, horizon)
    tr = evolve(res.gprofiles[0], alpha, horizon, config, "original", sub, wrap_guard=False)
    defect = sobolev_norm(tr.profiles[-1] - f_inf, 10)
    if not detail:
        return defect
    dev = 0.0
    for k, t in enumerate(sub[sub <= T]):
        i = int(np.argmin(np.abs(res.times - t)))
        dev = max(dev, sobolev_norm(tr.profiles[k] - res.gprofiles[i], 10))
    return {"defect": defect, "deviation": dev, "report": res.report.as_dict(),
            "T_max": T, "horizon": horizon}
