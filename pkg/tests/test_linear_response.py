import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from giantgyro.linear_response import (
    DegenerateEliminationError,
    SingularResponseError,
    SystemParams,
    UndefinedSigmaError,
    nonreciprocal_strength,
    phase,
    response,
    susceptibilities,
    transfer_elements_explicit,
)
from giantgyro.topology import Kind, Topology
from giantgyro.validation import representative_topologies

TOPS = representative_topologies(3)


def ids(t):
    return f"{t.label}-{t.N}-{t.M}-{t.nest_index}"


params_strategy = st.builds(
    SystemParams,
    delta1=st.floats(-5, 5),
    delta2=st.floats(-5, 5),
    kappa_a=st.floats(0.5, 50),
    kappa_b=st.floats(0.5, 50),
    gamma=st.floats(0, 5),
    gamma_x=st.floats(0, 5),
    gamma_y=st.floats(0.05, 5),
    omega_rot=st.floats(0, 3),
    tau=st.floats(1e-3, 0.5),
    drive_phase_per_tau=st.floats(0, 2 * math.pi),
)


def test_defaults_are_valid():
    SystemParams().validate()
    assert SystemParams.reference(0.1).cooperativity == pytest.approx(0.1)


@pytest.mark.parametrize("field", ["kappa_a", "gamma", "gamma_x", "gamma_y", "omega_rot"])
def test_negative_rates_flagged(field):
    p = replace(SystemParams(), **{field: -1.0})
    assert p.violations()
    with pytest.raises(ValueError):
        p.validate()


def test_cooperativity_needs_equal_ports():
    assert replace(SystemParams(), kappa_b=3.0).cooperativity is None
    with pytest.raises(ValueError):
        replace(SystemParams(), kappa_b=3.0).with_cooperativity(0.1)


def test_with_cooperativity_sets_gamma():
    p = SystemParams(kappa_a=10, kappa_b=10).with_cooperativity(0.04)
    assert p.gamma == pytest.approx(1.0)


def test_phase_shifts_with_frequency():
    p = SystemParams(tau=0.1, drive_phase_per_tau=1.0)
    assert phase(p, 2.0) == pytest.approx(0.8)


def test_susceptibilities_fold_in_by():
    p = SystemParams(delta1=0, delta2=0, kappa_a=4, kappa_b=6, gamma_x=2, gamma_y=2, omega_rot=1)
    chi1, chi2 = susceptibilities(p, 0.0)
    assert chi1 == pytest.approx(-2)
    # -(6 + 2)/2 + 1 / (-1)
    assert chi2 == pytest.approx(-5)


@pytest.mark.parametrize("top", TOPS, ids=ids)
def test_explicit_transfer_matches_solver(top):
    p = SystemParams.reference(0.2, drive_phase_per_tau=1.1, delta1=0.3, delta2=-0.4)
    for omega in (-7.0, 0.0, 2.5):
        G = response(p, top, omega).g_matrix
        assert np.abs(G - transfer_elements_explicit(p, top, omega)).max() < 1e-12


@settings(max_examples=40, deadline=None)
@given(p=params_strategy, top=st.sampled_from(TOPS), omega=st.floats(-50, 50))
def test_identities_hold_for_gainless_params(p, top, omega):
    res = response(p, top, omega)
    assert res.passivity_residual <= 1e-12 * max(1.0, np.abs(res.a_matrix).max())
    assert res.unitarity_residual < 1e-10
    noise = 0.5 * np.sum(np.abs(res.g_matrix) ** 2, axis=1)
    assert np.allclose(noise, 0.5, atol=1e-10)


def test_gain_breaks_passivity():
    p = replace(SystemParams.reference(0.1), gamma_x=-0.5)
    res = response(p, Topology(Kind.BRAIDED, "i", 2, 2), 0.0)
    assert res.passivity_residual > 0.5


def test_degenerate_elimination():
    p = replace(SystemParams.reference(0.1), gamma_y=0.0)
    with pytest.raises(DegenerateEliminationError):
        response(p, Topology(Kind.COINCIDENT), 0.0)


def test_singular_response():
    p = SystemParams(kappa_a=0, kappa_b=1, gamma=0, gamma_x=0, omega_rot=0)
    with pytest.raises(SingularResponseError):
        response(p, Topology(Kind.SEPARATED, "i", 1, 1), 0.0)


def test_sigma_undefined_without_coupling():
    with pytest.raises(UndefinedSigmaError):
        nonreciprocal_strength(SystemParams(gamma=0.0), Topology(Kind.BRAIDED, "i", 2, 2))


@pytest.mark.parametrize("kind", [Kind.COINCIDENT, Kind.DIRECT])
def test_traditional_baselines_are_reciprocal(kind):
    p = SystemParams.reference(0.1, drive_phase_per_tau=0.7)
    assert nonreciprocal_strength(p, Topology(kind)) == pytest.approx(0.0, abs=1e-14)


def test_sigma_bounded():
    p = SystemParams.reference(0.3)
    for top in TOPS:
        if top.kind in (Kind.COINCIDENT, Kind.DIRECT):
            continue
        for phi in np.linspace(0.05, 6.2, 11):
            try:
                s = nonreciprocal_strength(replace(p, drive_phase_per_tau=phi), top)
            except UndefinedSigmaError:
                continue
            assert -1 - 1e-12 <= s <= 1 + 1e-12


def test_record_round_trip():
    p = SystemParams.reference(0.05, drive_phase_per_tau=1.0)
    assert SystemParams.from_record(p.to_record()) == p
