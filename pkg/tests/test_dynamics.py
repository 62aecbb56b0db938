import io
import math

import numpy as np
import pytest

from giantgyro.dynamics import DdeConfig, DdeConfigError, integrate, steady_state, steady_state_error
from giantgyro.linear_response import SystemParams
from giantgyro.topology import Kind, Topology

TOPS = [
    Topology(Kind.COINCIDENT),
    Topology(Kind.DIRECT),
    Topology(Kind.SEPARATED, "ii", 2, 2),
    Topology(Kind.NESTED, "i", 3, 1, 1),
    Topology(Kind.BRAIDED, "i", 2, 2),
    Topology(Kind.BRAIDED, "ii", 3, 2),
]


def fast_params(**kw):
    base = dict(kappa_a=4.0, kappa_b=4.0, gamma=1.0, gamma_x=1.0, gamma_y=1.0, omega_rot=0.5,
                tau=0.05, drive_phase_per_tau=1.3)
    base.update(kw)
    return SystemParams(**base)


@pytest.mark.parametrize("top", TOPS, ids=lambda t: t.label)
def test_reaches_frequency_domain_steady_state(top):
    err = steady_state_error(fast_params(), top, DdeConfig(steps_per_tau=16, total_time=80.0, record_every=4096))
    assert err < 1e-9


def test_starts_from_rest_and_records():
    traj = integrate(fast_params(), TOPS[4], DdeConfig(steps_per_tau=8, total_time=1.0, record_every=2))
    assert np.all(traj.means[0] == 0)
    # the probe reflects straight off at t = 0
    assert traj.outputs[0, 0] == pytest.approx(1.0)
    assert np.allclose(np.diff(traj.times), 2 * fast_params().tau / 8)


def test_fourth_order_convergence():
    p = fast_params(delta1=0.4, delta2=-0.2)
    top = Topology(Kind.BRAIDED, "i", 2, 3)
    finals = [integrate(p, top, DdeConfig(steps_per_tau=K, total_time=20 * p.tau, record_every=10**6)).final_means
              for K in (8, 16, 32)]
    order = math.log2(np.linalg.norm(finals[0] - finals[1]) / np.linalg.norm(finals[1] - finals[2]))
    assert order > 3.5


def test_markovian_mode_misses_directional_coupling():
    """Dropping the delays changes the steady state of a braided system."""
    p = fast_params(tau=0.5)
    top = Topology(Kind.BRAIDED, "i", 2, 2)
    cfg = DdeConfig(steps_per_tau=16, total_time=60.0, record_every=10**6)
    exact = steady_state(p, top)
    delayed = integrate(p, top, cfg).final_means[:2]
    markov = integrate(p, top, DdeConfig(steps_per_tau=16, total_time=60.0, record_every=10**6,
                                         markovian=True)).final_means[:2]
    assert np.linalg.norm(delayed - exact) < 1e-8
    assert np.linalg.norm(markov - exact) > 1e-2 * np.linalg.norm(exact)


def test_csv_is_deterministic():
    cfg = DdeConfig(steps_per_tau=8, total_time=0.5)
    bufs = []
    for _ in range(2):
        buf = io.StringIO()
        integrate(fast_params(), TOPS[5], cfg).to_csv(buf)
        bufs.append(buf.getvalue())
    assert bufs[0] == bufs[1]
    assert bufs[0].splitlines()[0].startswith("t,re_a,im_a")


@pytest.mark.parametrize("kw", [dict(steps_per_tau=4), dict(steps_per_tau=8.5), dict(total_time=0),
                                dict(record_every=0)])
def test_config_validation(kw):
    with pytest.raises(DdeConfigError):
        DdeConfig(**kw).validate()


def test_config_round_trip():
    cfg = DdeConfig(steps_per_tau=16, drive_alpha=1 + 2j, drive_beta=0.5)
    assert DdeConfig.from_record(cfg.to_record()) == cfg
