import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracnls.errors import NumericalError, ValidationError
from fracnls.grid import active_range, lattice_range, make_grid, phi_k, psi_k, transform_forward
from fracnls.norms import (
    DiagnosticSeries,
    NormParams,
    budget_check,
    decay_fit,
    diagnostics_at,
    frequency_derivatives,
    interpolation_ratios,
    norm_report,
    radial_w_norm,
    settles_after,
    u_norm,
    w_norm,
)
from fracnls.radial import gaussian_profile
from tests.conftest import random_field

P = NormParams(1.5, 0.4)


def brute_w_norm_1d(u, grid, lam, second=True):
    # direct DFT sums for f_hat, f_hat' and f_hat'' on the lattice, then shell loops
    x, xi = grid.axis_x, grid.axis_xi
    dx = grid.spacing
    E = np.exp(-1j * np.outer(xi, x)) * dx / np.sqrt(2 * np.pi)
    fh, d1, d2 = E @ u, E @ (-1j * x * u), E @ (-x * x * u)
    k_min, k_max = active_range(grid)
    k_hi = lattice_range(grid)[1]
    r = np.abs(xi)
    best = 0.0
    for k in range(k_min, k_hi + 1):
        chi = phi_k(r, k) if k == k_min else psi_k(r, k)
        parts = [np.sqrt(np.sum(np.abs(chi * a) ** 2) * grid.dxi) for a in (fh, d1, d2)]
        tot = 2.0 ** (2 * max(k, 0)) * (2.0 ** (-lam * k) * parts[0] + 2.0 ** ((1 - lam) * k) * parts[1]
                                        + second * 2.0 ** ((2 - lam) * k) * parts[2])
        best = max(best, tot)
    return best


def test_params_validation():
    with pytest.raises(ValidationError):
        NormParams(1.5, 0.2)
    with pytest.raises(ValidationError):
        NormParams(1.5, 0.5)
    with pytest.raises(ValidationError):
        NormParams(2.5, 0.4)
    assert P.delta == pytest.approx(1.9 / 1.5 - 1)
    # degenerate point lam + 3/2 = 3 alpha/2
    assert NormParams(1.2, 0.3).delta == pytest.approx(0.5 * (1 - 1e-3))
    assert NormParams(1.5, 0.4, delta=0.1).delta == 0.1
    with pytest.raises(ValidationError):
        NormParams(1.5, 0.4, delta=0.0)


def test_zero_field_has_zero_norms(grid3):
    z = random_field(grid3, 0) * 0.0
    assert w_norm(z, P) == 0.0 and u_norm(z, P) == 0.0


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_matches_brute_force_1d(seed):
    g = make_grid(1, 48, 10.0)
    x = g.axis_x
    rng = np.random.default_rng(seed)
    u = np.exp(-x ** 2 / 4) * (rng.normal() + 1j * rng.normal() + np.cos(rng.uniform(0, 2) * x))
    f = transform_forward(u, g)
    for second in (True, False):
        want = brute_w_norm_1d(u, g, 0.4, second)
        got = norm_report(f, P, second).value
        assert got == pytest.approx(want, rel=1e-10)


def test_frequency_derivative_of_gaussian():
    # transform of exp(-x^2/2) is exp(-xi^2/2), so its derivative is -xi exp(-xi^2/2)
    g = make_grid(1, 64, 12.0)
    f = transform_forward(np.exp(-g.axis_x ** 2 / 2), g)
    (grad,), (hess,) = frequency_derivatives(f)
    xi = g.axis_xi
    assert np.allclose(grad, -xi * np.exp(-xi ** 2 / 2), atol=1e-12)
    assert np.allclose(hess, (xi ** 2 - 1) * np.exp(-xi ** 2 / 2), atol=1e-12)


@given(st.integers(0, 10 ** 6), st.floats(min_value=1e-3, max_value=1e3))
def test_homogeneity(seed, c):
    g = make_grid(1, 32, 8.0)
    f = random_field(g, seed)
    assert w_norm(f * c, P) == pytest.approx(c * w_norm(f, P), rel=1e-12)
    assert u_norm(f * (1j * c), P) == pytest.approx(c * u_norm(f, P), rel=1e-12)


@given(st.integers(0, 10 ** 6))
def test_u_norm_below_w_norm(seed):
    f = random_field(make_grid(1, 32, 8.0), seed)
    assert u_norm(f, P) <= w_norm(f, P)


def test_report_flags():
    g = make_grid(3, 32, 16.0)
    rep = norm_report(random_field(g, 3, dealias=False), P)
    k_min, k_max = active_range(g)
    assert rep.shells[0].flag == "lumped" and rep.shells[0].k == k_min
    assert all(s.flag == "unresolved" for s in rep.shells if s.k > k_max)
    assert rep.value == max(s.total for s in rep.shells)
    assert rep.as_dict()["argmax"] == rep.argmax


def test_lattice_norm_matches_radial_quadrature():
    # the lumped lowest shell differs by design; the next one is still
    # under-resolved at this box size, so compare from k_min + 2 upwards
    g = make_grid(3, 96, 24.0)
    r2 = g.x[0] ** 2 + g.x[1] ** 2 + g.x[2] ** 2
    f = transform_forward(np.exp(-r2 / 2), g)
    lattice = {s.k: s.total for s in norm_report(f, P).shells}
    for k in range(active_range(g)[0] + 1, 3):
        rad = radial_w_norm(gaussian_profile(), P, k_range=(k, k + 1), nodes=20001)
        assert lattice[k] == pytest.approx(rad, rel=1e-3)


def test_nonfinite_rejected(grid1):
    f = random_field(grid1, 0)
    f.coeffs[3] = np.inf
    with pytest.raises(NumericalError):
        w_norm(f, P)


def test_diagnostics_at_keys(grid3):
    f = random_field(grid3, 1)
    d = diagnostics_at(2.0, f, f, f, f, P)
    assert set(d) == {"W1", "W2", "W3", "U1", "U2", "U3"}
    assert d["W2"] == d["U2"] and d["W3"] >= d["U3"]


def test_series_rejects_bad_values():
    s = DiagnosticSeries()
    s.append(0.0, {"W1": 1.0})
    with pytest.raises(NumericalError):
        s.append(1.0, {"W1": np.nan})
    with pytest.raises(NumericalError):
        s.append(1.0, {"W1": -1.0})


def test_series_csv(tmp_path):
    s = DiagnosticSeries()
    for t in range(3):
        s.append(t, {"W1": 3.0 - t, "U1": 1.0 + t})
    s.to_csv(tmp_path / "d.csv")
    data = np.loadtxt(tmp_path / "d.csv", delimiter=",", skiprows=1)
    assert data.shape == (3, 3)
    assert np.array_equal(s.running_sup()["U1"], [1.0, 2.0, 3.0])


@pytest.mark.parametrize("p", [-1.5, -0.75, -1.0])
def test_decay_fit_recovers_power(p):
    t = np.linspace(1, 100, 30)
    r = decay_fit(t, 2.0 * (1 + t) ** p)
    assert r["exponent"] == pytest.approx(p, abs=1e-12)
    assert r["intercept"] == pytest.approx(np.log(2.0))


def test_decay_fit_guards():
    t = np.linspace(1, 100, 30)
    with pytest.raises(ValidationError):
        decay_fit(t[:9], t[:9])
    with pytest.raises(ValidationError):
        decay_fit(t, -t)
    with pytest.raises(NumericalError):
        decay_fit(t, np.exp(np.sin(t) * 3))
    r = decay_fit(t, (1 + t) ** -1.0, window=(10, 90))
    assert r["exponent"] == pytest.approx(-1.0)


def test_budget_zero_and_linear():
    s = DiagnosticSeries()
    s.append(0.0, dict.fromkeys(("W1", "W2", "W3", "U1", "U2", "U3"), 0.0))
    assert budget_check(s, 1.0).implied_constant == 0.0
    s = DiagnosticSeries()
    for t in range(4):
        s.append(t, {"W1": 1.0, "W2": 2.0 - t / 4, "W3": 1.0, "U1": 1.0, "U2": 2.0, "U3": 0.5})
    rep = budget_check(s, 2.0)
    assert rep.total == pytest.approx(7.5) and rep.implied_constant == pytest.approx(3.75)
    with pytest.raises(ValidationError):
        budget_check(s, 0.0)


def test_settles_after():
    t = np.linspace(0, 10, 11)
    v = np.concatenate([[1, 3, 5], np.linspace(5, 4, 8)])
    assert settles_after(t, v, 2.0) == pytest.approx(1.0)
    v2 = v.copy()
    v2[-1] = 5.5
    assert settles_after(t, v2, 2.0) == pytest.approx(5.5 / v2[-2])
    with pytest.raises(ValidationError):
        settles_after(t, v, 20.0)


def test_interpolation_ratios_bounded():
    # both ratios are bounded by dimensional constants over a corpus of fields
    g = make_grid(3, 32, 12.0)
    worst = [0.0, 0.0]
    for seed in range(200):
        rng = np.random.default_rng(seed)
        c = rng.normal(size=3) * 2
        s = rng.uniform(0.7, 2.5)
        r2 = sum((xx - cc) ** 2 for xx, cc in zip(g.x, c))
        u = np.exp(-r2 / (2 * s * s)) * np.exp(1j * rng.normal() * g.x[0])
        a, b = interpolation_ratios(transform_forward(u, g))
        worst = [max(worst[0], a), max(worst[1], b)]
    # sharp constants for Gaussians sit well below these bounds
    assert worst[0] < 10 and worst[1] < 10


def test_interpolation_ratios_gaussian_closed_form():
    # Gaussian moments: |u|_1 = (2 pi)^(3/2), |u|_2^2 = pi^(3/2),
    # ||x|^2 u|_2^2 = (15/4) pi^(3/2), ||x| u|_2^2 = (3/2) pi^(3/2), |u|_{4/3} = (3 pi/2)^(9/8)
    pi = np.pi
    want = ((2 * pi) ** 1.5 / (pi ** (3 / 16) * (3.75 * pi ** 1.5) ** 0.375),
            (1.5 * pi) ** (9 / 8) / (pi ** (3 / 16) * (1.5 * pi ** 1.5) ** 0.375))
    g = make_grid(3, 96, 24.0)
    r2 = g.x[0] ** 2 + g.x[1] ** 2 + g.x[2] ** 2
    for s in (1.0, 2.0):
        got = interpolation_ratios(transform_forward(np.exp(-r2 / (2 * s * s)), g))
        assert np.allclose(got, want, rtol=1e-12)
