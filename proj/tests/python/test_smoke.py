import json
import math

import pytest

import _homodefect as hd

SPEC_1D = json.dumps(
    {
        "dim": 1,
        "periodic": {"kind": "sin_product", "base": 2.0, "amp": 1.0},
        "defect": {"kind": "gaussian", "amplitude": 1.0, "width": 0.5},
        "r": 2.0,
        "mu": 8.0,
    }
)


def test_nu_r():
    assert hd.nu_r(3, 2) == 1.0
    assert hd.nu_r(3, 6) == 0.5
    assert hd.nu_r(1, 4) == 0.25
    with pytest.raises(hd.HomodefectError):
        hd.nu_r(2, 2.0)


def test_coefficient_eval():
    spec = hd.CoefficientSpec.from_json(SPEC_1D)
    spec.validate()
    assert spec.dim == 1
    # periodic part at y=0 plus full defect amplitude at the center
    assert spec([0.0]) == pytest.approx(3.0)
    assert spec([0.25]) == pytest.approx(3.0 + math.exp(-0.25**2 / 0.25), rel=1e-12)


def test_astar_matches_oracle():
    spec = hd.CoefficientSpec.from_json(SPEC_1D)
    exact = hd.exact_astar_1d(spec)
    assert exact == pytest.approx(math.sqrt(3.0), abs=1e-9)
    corr = hd.build_correctors(spec, cell_resolution=256, truncation_radius=8)
    astar = hd.homogenized_tensor(spec, corr)
    assert astar[0, 0] == pytest.approx(exact, abs=2e-4)


def test_two_scale_run_and_fields():
    spec = hd.CoefficientSpec.from_json(SPEC_1D)
    out = hd.solve_two_scale(spec, source="one", eps=0.125, nodes_per_eps=32)
    u = out["u_eps"].array
    assert u.ndim == 1 and u[0] == 0.0 and u[-1] == 0.0
    assert out["norms"]["l2_R"] < 0.2
    # remainder is small compared to the solution itself
    assert out["norms"]["l2_R"] < 0.5 * abs(u).max()


def test_oracle_norms_and_slope_fit():
    spec = hd.CoefficientSpec.from_json(SPEC_1D)
    pts = []
    for k in range(4, 8):
        eps = 2.0**-k
        n = hd.oracle_remainder_norms(spec, eps, source="one")
        pts.append((eps, n["l2_R"]))
    slope, stderr = hd.fit_slope(pts)
    assert slope > 0.5  # nu_r = min(1, 1/2) = 0.5 for r = 2 in 1D
    assert stderr < 0.5


def test_field_io_roundtrip(tmp_path):
    spec = hd.CoefficientSpec.from_json(SPEC_1D)
    corr = hd.build_correctors(spec, cell_resolution=64, truncation_radius=4)
    path = str(tmp_path / "w.hdf1")
    hd.save_field(corr.w_per[0], path)
    back = hd.load_field(path)
    assert (back.array == corr.w_per[0].array).all()
