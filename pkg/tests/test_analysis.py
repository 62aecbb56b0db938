import io
import json
import math

import numpy as np
import pytest

from giantgyro.analysis import (
    FIGURES,
    STRICT,
    SweepSpec,
    compare_table,
    figure_data,
    reciprocal_points,
    reference_params,
    sweep,
)
from giantgyro.linear_response import SystemParams
from giantgyro.topology import Kind, Topology

PI = math.pi


def test_sweep_columns_and_identities():
    spec = SweepSpec("phi", np.linspace(0, 2 * PI, 21), reference_params(0.1), STRICT["i"])
    data = sweep(spec)
    assert len(data) == 21
    for col in ("sigma", "snr_alpha", "sens_beta", "closed_snr_alpha", "closed_sens_beta"):
        assert col in data.columns
    assert np.allclose(data.columns["noise_alpha"], 0.5)
    assert data.columns["unitarity_residual"].max() < 1e-12
    assert np.allclose(data.columns["snr_alpha"], data.columns["closed_snr_alpha"], rtol=1e-9)


def test_omega_sweep_has_no_closed_columns():
    spec = SweepSpec("omega", np.linspace(-5, 5, 11), reference_params(0.1), STRICT["ii"], sensitivity=False)
    data = sweep(spec)
    assert "closed_snr_alpha" not in data.columns


@pytest.mark.parametrize("grid, variable", [([0.0], "phi"), ([1.0, 0.5], "phi"), ([0, 7.0], "phi"),
                                            ([0.0, 0.1], "cooperativity"), ([0.0, 1.0], "tau")])
def test_bad_sweeps_rejected(grid, variable):
    with pytest.raises(ValueError):
        sweep(SweepSpec(variable, np.array(grid), reference_params(), STRICT["i"]))


def test_csv_has_snapshot_and_full_precision():
    spec = SweepSpec("phi", np.array([0.0, 0.1]), reference_params(0.1), STRICT["i"], sensitivity=False)
    text = sweep(spec).to_csv()
    lines = text.splitlines()
    snap = json.loads(lines[0][2:])
    assert snap["topology"]["kind"] == "braided"
    assert lines[1].startswith("phi,sigma")
    assert lines[3].startswith("0.10000000000000001,")
    assert text == sweep(spec).to_csv()


@pytest.mark.parametrize(
    "top, expected",
    [
        (Topology(Kind.BRAIDED, "i", 2, 2), [0.5, 1.5]),
        (Topology(Kind.BRAIDED, "ii", 2, 2), [0.5, 1.5]),
        (Topology(Kind.BRAIDED, "i", 3, 3), [1 / 3, 2 / 3, 4 / 3, 5 / 3]),
        (Topology(Kind.NESTED, "i", 3, 2, 1), [2 / 3, 4 / 3]),
    ],
)
@pytest.mark.parametrize("method", ["closed", "numeric"])
def test_reciprocal_points(top, expected, method):
    roots = reciprocal_points(top, method).roots
    assert np.allclose(np.sort(roots) / PI, expected, atol=1e-9)


@pytest.mark.parametrize("N", [2, 3, 4])
def test_closed_and_numeric_roots_agree_for_nested(N):
    for M in (1, 2):
        for n in range(1, N):
            top = Topology(Kind.NESTED, "i", N, M, n)
            a, b = reciprocal_points(top, "closed"), reciprocal_points(top, "numeric")
            assert a.everywhere == b.everywhere
            assert np.allclose(np.sort(a.roots), np.sort(b.roots), atol=1e-8)


def test_general_braided_roots():
    top = Topology(Kind.BRAIDED, "i", 2, 3)
    numeric = reciprocal_points(top, "numeric").roots / PI
    closed = reciprocal_points(top, "closed").roots / PI
    assert np.allclose(closed, [0.41957, 1.0, 1.58043], atol=1e-5)
    # the numeric scan also sees the tangential zeros at pi/2 and 3pi/2
    assert np.allclose(numeric, [0.41957, 0.5, 1.0, 1.5, 1.58043], atol=1e-5)


@pytest.mark.parametrize("top", [Topology(Kind.COINCIDENT), Topology(Kind.DIRECT), Topology(Kind.NESTED, "i", 4, 1, 2)])
def test_identically_reciprocal(top):
    assert reciprocal_points(top).everywhere


def test_separated_never_reciprocal():
    res = reciprocal_points(Topology(Kind.SEPARATED, "i", 2, 2))
    assert len(res) == 0 and not res.everywhere


def test_compare_table_values():
    data = compare_table("i", grid=[0.1])
    assert data.columns["strict_i_ratio_alpha"][0] == pytest.approx(0.62535, abs=1e-5)
    assert data.columns["strict_ii_ratio_alpha"][0] == pytest.approx(0.27611, abs=1e-5)


def test_strict_sensitivity_ratio_minima():
    panels = figure_data("F5", steps=81)
    for co in (0.01, 0.05, 0.1):
        d = panels[f"ratio_i_co{co:g}"]
        r = d.columns["closed_sens_ratio_beta_alpha"]
        assert r.max() < 1
        argmin = d.values[np.argmin(r)] / PI
        assert min(abs(argmin - k) for k in (0, 1, 2)) < 1e-9


def test_traditional_i_snr_below_one():
    d = figure_data("F6")["traditional_i_snr"]
    assert d.columns["snr_alpha"].max() < 1
    assert d.columns["snr_beta"].max() < 1


@pytest.mark.parametrize("fid", FIGURES)
def test_every_figure_produces_panels(fid):
    panels = figure_data(fid, steps=9)
    assert panels
    for data in panels.values():
        assert len(data) >= 9


def test_unknown_figure():
    with pytest.raises(ValueError):
        figure_data("F1")
