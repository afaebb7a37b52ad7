import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracnls.grid import (
    SpectralField,
    active_range,
    bump_phi,
    bump_psi,
    conv_constant,
    lattice_range,
    load_snapshot,
    lp_norm,
    lp_project,
    make_grid,
    propagate_linear,
    psi_k,
    save_snapshot,
    shell_set,
    sobolev_norm,
    transform_forward,
    transform_inverse,
)
from tests.conftest import random_field

alphas = st.floats(min_value=1.05, max_value=2.0)
times = st.floats(min_value=-50.0, max_value=50.0)


def test_make_grid_rejects_bad_sizes():
    for n in (4, 12.5, 20, 100):
        with pytest.raises(ValueError):
            make_grid(3, n, 1.0)
    with pytest.raises(ValueError):
        make_grid(2, 16, 1.0)
    with pytest.raises(ValueError):
        make_grid(1, 16, -1.0)
    assert make_grid(3, 96, 60.0).n == 96


def test_gaussian_transform_matches_closed_form():
    # exp(-x^2/2) is its own unitary transform
    g = make_grid(1, 64, 12.0)
    f = transform_forward(np.exp(-g.axis_x ** 2 / 2), g)
    assert np.allclose(f.coeffs, np.exp(-g.axis_xi ** 2 / 2), atol=1e-13)


def test_roundtrip_and_plancherel(grid3):
    rng = np.random.default_rng(1)
    u = rng.normal(size=grid3.shape) + 1j * rng.normal(size=grid3.shape)
    f = transform_forward(u, grid3)
    assert np.allclose(transform_inverse(f), u, atol=1e-13)
    phys = np.sqrt(np.sum(np.abs(u) ** 2) * grid3.spacing ** 3)
    assert f.l2() == pytest.approx(phys, rel=1e-13)


def test_product_constant(grid1):
    a, b = random_field(grid1, 0), random_field(grid1, 1)
    prod = transform_forward(a.physical() * b.physical(), grid1).coeffs
    conv = np.array([sum(a.coeffs[(i - j) % 32] * b.coeffs[j] for j in range(32)) for i in range(32)])
    # dealiased inputs have no wrap-around
    assert np.allclose(prod, conv_constant(grid1) * conv, atol=1e-12)


def test_conj_is_complex_conjugate(grid3):
    f = random_field(grid3, 3, dealias=False)
    assert np.allclose(f.conj().physical(), np.conj(f.physical()), atol=1e-13)


def test_bump_values():
    assert bump_phi(np.array([0.0, 1.0]))[1] == 1.0
    assert bump_phi(np.array([1.125]))[0] == pytest.approx(0.5, abs=1e-15)
    assert bump_phi(np.array([1.25, 3.0])).max() == 0.0
    r = np.linspace(0, 3, 301)
    assert np.all(bump_psi(r)[(r < 0.5) | (r > 1.25)] == 0)


@given(st.floats(min_value=1e-3, max_value=1e3))
def test_partition_of_unity(r):
    total = sum(psi_k(np.array([r]), k)[0] for k in range(-20, 21))
    assert total == pytest.approx(1.0, abs=1e-15)


def test_grid_shells_partition(grid3):
    s = shell_set(grid3)
    total = s.low_symbol[s.k_min - 1] + sum(s.symbols.values())
    inside = grid3.xi_abs <= 2.0 ** s.k_max
    assert np.allclose(total[inside], 1.0, atol=1e-15)
    k_lo, k_hi = lattice_range(grid3)
    full = bump_phi(np.ldexp(grid3.xi_abs, -k_lo)) + sum(
        psi_k(grid3.xi_abs, k) for k in range(k_lo + 1, k_hi + 1))
    assert np.allclose(full, 1.0, atol=1e-15)


def test_active_range_examples():
    assert active_range(make_grid(3, 96, 60.0)) == (-3, -1)
    assert active_range(make_grid(3, 64, np.pi)) == (1, 3)


def test_lp_project_outside_range_raises(grid3):
    with pytest.raises(ValueError):
        lp_project(random_field(grid3, 0), 40)


def test_l2_conservation_64():
    g = make_grid(3, 64, 10.0)
    f = random_field(g, 5, dealias=False)
    for a in (1.25, 1.5, 2.0):
        assert propagate_linear(f, a, 7.3).l2() == pytest.approx(f.l2(), rel=1e-12)


@given(alphas, times, times)
def test_group_law(alpha, s, t):
    g = make_grid(1, 16, 3.0)
    f = random_field(g, 7, dealias=False)
    lhs = propagate_linear(propagate_linear(f, alpha, s), alpha, t).coeffs
    rhs = propagate_linear(f, alpha, s + t).coeffs
    assert np.allclose(lhs, rhs, atol=1e-12 * (1 + abs(s) + abs(t)))


def test_propagate_rejects_alpha():
    f = random_field(make_grid(1, 16, 3.0), 0)
    for a in (1.0, 0.5, 2.5):
        with pytest.raises(ValueError):
            propagate_linear(f, a, 1.0)


def test_norms_basic(grid3):
    f = random_field(grid3, 2)
    assert sobolev_norm(f, 0) == pytest.approx(f.l2(), rel=1e-14)
    assert sobolev_norm(f, 10) >= sobolev_norm(f, 3)
    u = f.physical()
    assert lp_norm(f, np.inf) == pytest.approx(np.abs(u).max())
    assert lp_norm(f, 2) == pytest.approx(f.l2(), rel=1e-12)


def test_nonfinite_field_rejected(grid1):
    c = np.zeros(grid1.shape, complex)
    c[0] = np.nan
    with pytest.raises(FloatingPointError):
        SpectralField(grid1, c)


def test_snapshot_roundtrip(tmp_path, grid3):
    f = random_field(grid3, 4, dealias=False)
    p = tmp_path / "f.fnls"
    save_snapshot(p, f, 1.5)
    g, alpha = load_snapshot(p)
    assert alpha == 1.5 and g.grid == grid3
    assert np.array_equal(g.coeffs, f.coeffs)
    raw = p.read_bytes()
    assert raw[:4] == b"FNLS" and len(raw) == 4 + 4 + 4 + 8 + 8 + 16 * 16 ** 3
