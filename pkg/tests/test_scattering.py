import numpy as np
import pytest

from fracnls.errors import NonContractionError, ValidationError
from fracnls.evolution import StepperConfig, evolve, gaussian_data, wrap_time
from fracnls.grid import make_grid, sobolev_norm
from fracnls.scattering import (
    cauchy_blocks,
    final_data_iterate,
    forward_profile_cauchy,
    wave_operator_roundtrip,
)

G = make_grid(3, 16, 8.0)


def test_zero_final_data():
    z = gaussian_data(G, 0.0)
    res = final_data_iterate(z, 1.5, 1.0)
    assert res.report.converged and res.report.iterations == 0
    assert wave_operator_roundtrip(z, 1.5, 1.0) == 0.0


def test_free_flow_converges_at_once():
    f = gaussian_data(G, 0.1, 1.5)
    res = final_data_iterate(f, 1.5, 1.0, StepperConfig(coupling=0.0), mesh_step=0.1)
    assert res.report.converged and res.report.iterations == 1
    assert all(np.array_equal(p.coeffs, f.coeffs) for p in res.gprofiles)


def test_small_data_contracts():
    f = gaussian_data(G, 0.05, 1.5)
    res = final_data_iterate(f, 1.5, 2.0, mesh_step=0.1, tol=1e-10)
    rep = res.report
    assert rep.converged and rep.contraction_factor < 0.5
    assert all(b < a for a, b in zip(rep.diffs, rep.diffs[1:]))
    # the last profile is the final datum up to the B correction at T
    assert sobolev_norm(res.fprofiles[-1] - f, 10) < 1e-14 * sobolev_norm(f, 10) + 1e-300
    assert rep.as_dict()["iterations"] == rep.iterations


def test_quadrature_estimate_shrinks_with_mesh():
    f = gaussian_data(G, 0.05, 1.5)
    e1 = final_data_iterate(f, 1.5, 2.0, mesh_step=0.2, max_iters=3).report.quadrature_error
    e2 = final_data_iterate(f, 1.5, 2.0, mesh_step=0.1, max_iters=3).report.quadrature_error
    assert 0 < e2 < e1 / 3


def test_argument_validation():
    f = gaussian_data(G, 0.05, 1.5)
    with pytest.raises(ValidationError):
        final_data_iterate(f, 1.5, 2 * wrap_time(G, 1.5))
    with pytest.raises(ValidationError):
        final_data_iterate(f, 1.5, 1.0, eps0_max=1e-6)
    with pytest.raises(ValidationError):
        wave_operator_roundtrip(f, 1.5, 1.0, horizon=0.5)


def test_large_data_does_not_contract():
    g = make_grid(1, 32, 8.0)
    f = gaussian_data(g, 40.0, 1.0)
    with pytest.raises(NonContractionError) as exc:
        final_data_iterate(f, 1.5, 1.0, mesh_step=0.05, max_iters=10)
    assert sum(r >= 1 for r in exc.value.ratios) >= 3


def test_roundtrip_reproduces_final_data():
    f = gaussian_data(G, 0.05, 1.5)
    d = wave_operator_roundtrip(f, 1.5, 2.0, StepperConfig(dt=0.025), detail=True,
                                mesh_step=0.05, tol=1e-10)
    scale = sobolev_norm(f, 10)
    assert d["deviation"] < 1e-3 * scale and d["defect"] < 1e-3 * scale
    assert d["report"]["converged"]


def test_forward_cauchy_of_free_flow_vanishes():
    u0 = gaussian_data(G, 0.1, 1.5)
    tr = evolve(u0, 1.5, 1.0, StepperConfig(dt=0.1, coupling=0.0), n_out=4)
    assert np.all(forward_profile_cauchy(tr) < 1e-13)


def test_cauchy_blocks_pairs_doubling_times():
    u0 = gaussian_data(G, 0.1, 1.5)
    times = [0.0, 0.25, 0.5, 1.0, 2.0]
    tr = evolve(u0, 1.5, 2.0, StepperConfig(dt=0.05), output_times=times)
    out = cauchy_blocks(tr)
    assert out["T"] == [0.25, 0.5, 1.0] and out["exponent"] is None
    assert all(d > 0 for d in out["diff"])
