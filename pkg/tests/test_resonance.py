import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracnls.errors import ValidationError
from fracnls.paraproduct import symbol_a_lh
from fracnls.resonance import (
    EmptyRegionError,
    PhaseContext,
    RegionSpec,
    delta_rate,
    dyadic_constants,
    epsilon_rate,
    expansion_residual,
    expansion_support_eps,
    region_sweep,
    sample_expansion_points,
    sample_region,
    verify_symbol_class,
)

alphas = st.floats(min_value=1.05, max_value=1.95)
vecs = st.lists(st.floats(min_value=-5, max_value=5), min_size=3, max_size=3).filter(
    lambda v: np.linalg.norm(v) > 0.1)


def test_alpha_range():
    for a in (1.0, 0.5, 2.1):
        with pytest.raises(ValidationError):
            PhaseContext(a)
    PhaseContext(2.0)


def test_phase_at_known_points():
    ctx = PhaseContext(1.5)
    xi = np.array([1.0, 0.0, 0.0])
    assert ctx.phase(xi, xi) == pytest.approx(2.0)
    assert ctx.phase(xi, np.zeros(3)) == 0.0
    eta = np.array([0.0, 2.0, 0.0])
    want = 1.0 - 5.0 ** 0.75 + 2.0 ** 1.5
    assert ctx.phase(xi, eta) == pytest.approx(want, rel=1e-14)


@given(alphas, vecs, vecs)
def test_gradients_match_finite_differences(a, xi, eta):
    ctx = PhaseContext(a)
    xi, eta = np.array(xi), np.array(eta)
    if np.linalg.norm(xi - eta) < 0.1:
        return
    h = 1e-6
    for grad, which in ((ctx.grad_xi(xi, eta), 0), (ctx.grad_eta(xi, eta), 1)):
        fd = np.zeros(3)
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            if which == 0:
                fd[i] = (ctx.phase(xi + e, eta) - ctx.phase(xi - e, eta)) / (2 * h)
            else:
                fd[i] = (ctx.phase(xi, eta + e) - ctx.phase(xi, eta - e)) / (2 * h)
        assert np.allclose(grad, fd, rtol=1e-6, atol=1e-6)


@given(alphas, vecs, vecs)
def test_hessian_blocks_match_finite_differences(a, xi, eta):
    ctx = PhaseContext(a)
    xi, eta = np.array(xi), np.array(eta)
    if np.linalg.norm(xi - eta) < 0.1:
        return
    h = 1e-6
    hxx, _, _, hee = ctx.hessians(xi, eta)
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        col = (ctx.grad_xi(xi + e, eta) - ctx.grad_xi(xi - e, eta)) / (2 * h)
        assert np.allclose(hxx[:, i], col, rtol=1e-5, atol=1e-5)
        col = (ctx.grad_eta(xi, eta + e) - ctx.grad_eta(xi, eta - e)) / (2 * h)
        assert np.allclose(hee[:, i], col, rtol=1e-5, atol=1e-5)


@given(alphas, vecs, vecs, st.floats(min_value=0.01, max_value=100))
def test_phase_homogeneity(a, xi, eta, lam):
    ctx = PhaseContext(a)
    xi, eta = np.array(xi), np.array(eta)
    lhs = ctx.phase(lam * xi, lam * eta)
    assert lhs == pytest.approx(lam ** a * ctx.phase(xi, eta), rel=1e-10, abs=1e-10 * lam ** a)


def test_region_sampling_stays_in_shells():
    reg = RegionSpec(3, 3, -2, "HL", 500, gap=5)
    xi, eta = sample_region(reg, np.random.default_rng(0))
    for v, k in ((xi, 3), (xi - eta, 3), (eta, -2)):
        r = np.linalg.norm(v, axis=1)
        assert np.all((r > 2.0 ** (k - 1) * (1 - 1e-12)) & (r < 2.0 ** (k + 1) * (1 + 1e-12)))


def test_empty_region_reported():
    with pytest.raises(EmptyRegionError):
        sample_region(RegionSpec(10, 0, 0, "HH", 10, gap=20), np.random.default_rng(0), max_rounds=3)


def test_inconsistent_region_rejected():
    with pytest.raises(ValidationError):
        verify_symbol_class(PhaseContext(1.5), RegionSpec(0, 0, 0, "HL"))


def test_symbol_class_report_shape():
    rep = verify_symbol_class(PhaseContext(1.5), RegionSpec(0, 0, 0, "HH", 300), max_order=2)
    assert rep["pass"]
    assert set(rep["constants"]["grad_xi"]) == {"0,0", "1,0", "0,1", "2,0", "1,1", "0,2"}
    assert rep["ellipticity"]["grad_eta"] > 0


def test_hl_sweep_small_offsets_passes():
    rep = region_sweep(PhaseContext(1.5), "HL", range(-3, 4), sample_count=200, gap=2)
    assert rep["regions"] > 0 and all(r["pass"] for r in rep["reports"])


@pytest.mark.parametrize("which", ["phi", "grad"])
@pytest.mark.parametrize("N", [1, 2, 3])
def test_geometric_expansion_identity(which, N):
    ctx = PhaseContext(1.5)
    xi, eta = sample_expansion_points(np.random.default_rng(N), 5000)
    assert expansion_residual(ctx, xi, eta, N, which).max() < 1e-12


def test_geometric_expansion_rejects_far_points():
    with pytest.raises(ValidationError):
        expansion_residual(PhaseContext(1.5), [[1.0, 0, 0]], [[0, 1.0, 0]], 1)


def test_rates():
    assert epsilon_rate(1.5, 0.4) == pytest.approx(0.1)
    assert delta_rate(1.5, 0.4) == pytest.approx(1.9 / 1.5 - 1)
    # degenerate point lam + 3/2 = 3 alpha/2
    assert delta_rate(1.6, 0.9) == pytest.approx(0.5 * (1 - 1e-3))


# mpmath oracle, 30 digits, summing the same dyadic series term by term
@pytest.mark.parametrize("alpha,lam,t,c1,c2", [
    (1.5, 0.4, 10.0, 0.27655369628575408, 0.1572929727621027),
    (1.8, 0.45, 100.0, 0.032266487556810949, 0.016495622855869833),
])
def test_dyadic_constants_frozen(alpha, lam, t, c1, c2):
    got = dyadic_constants(alpha, lam, t)
    assert got[0] == pytest.approx(c1, rel=1e-13)
    assert got[1] == pytest.approx(c2, rel=1e-13)


def test_dyadic_constants_validate():
    with pytest.raises(ValidationError):
        dyadic_constants(1.5, 0.2, 1.0)
    with pytest.raises(ValidationError):
        dyadic_constants(1.5, 0.4, 0.0)


def test_dyadic_constants_decrease_in_t():
    vals = [dyadic_constants(1.5, 0.4, t) for t in (1.0, 10.0, 100.0)]
    assert vals[0][0] > vals[1][0] > vals[2][0]
    assert vals[0][1] > vals[1][1] > vals[2][1]


@pytest.mark.parametrize("gap", [2, 4, 10])
def test_expansion_support_eps_bounds_lh_support(gap):
    # sample a_LH directly and compare the largest ratio with the closed form
    rng = np.random.default_rng(gap)
    eta = 2.0 ** rng.uniform(-1, 1.4, (200000, 1)) * np.array([[1.0, 0, 0]])
    zeta = 2.0 ** rng.uniform(-gap - 2, -gap + 1, (200000, 1)) * np.array([[0.6, 0.8, 0]])
    on = symbol_a_lh(gap)(eta + zeta, eta) > 0
    ratio = np.linalg.norm(zeta[on], axis=1) / np.linalg.norm(eta[on], axis=1)
    eps = expansion_support_eps(gap)
    assert ratio.max() <= eps and ratio.max() > 0.9 * eps
