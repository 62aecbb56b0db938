"""Invariant battery used by ``giantgyro validate``."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .linear_response import SystemParams, response, sigma_from_matrix
from .topology import (
    Kind,
    Orientation,
    Topology,
    TopologyError,
    coupling_matrix_bruteforce,
    coupling_matrix_closed,
    waveguide_vector,
)

CHECKS = ("passivity", "unitarity", "shot-noise", "oracle", "hermitian", "sigma")


@dataclass
class CheckResult:
    name: str
    residual: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual)) and self.residual <= self.tolerance

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  {self.detail}" if self.detail else ""
        return f"{status}  {self.name:<12} residual={self.residual:.3e} tol={self.tolerance:.1e}{extra}"


def representative_topologies(max_points: int = 3) -> list:
    """One or more instances of every kind and orientation."""
    tops = [Topology(Kind.COINCIDENT), Topology(Kind.DIRECT)]
    for orient in Orientation:
        for N in range(1, max_points + 1):
            for M in range(1, max_points + 1):
                tops.append(Topology(Kind.SEPARATED, orient, N, M))
                nest_max = (N if orient is Orientation.I else M) - 1
                for n in range(1, nest_max + 1):
                    tops.append(Topology(Kind.NESTED, orient, N, M, n))
                try:
                    tops.append(Topology(Kind.BRAIDED, orient, N, M))
                except TopologyError:
                    pass
    return tops


def random_params(rng: np.random.Generator) -> SystemParams:
    """Gainless parameters spread over a few decades."""
    kappa = rng.uniform(1.0, 20.0)
    return SystemParams(
        delta1=rng.normal(0, 2),
        delta2=rng.normal(0, 2),
        kappa_a=kappa,
        kappa_b=rng.uniform(1.0, 20.0),
        gamma=rng.uniform(0.0, 5.0),
        gamma_x=rng.uniform(0.0, 3.0),
        gamma_y=rng.uniform(0.1, 3.0),
        omega_rot=rng.uniform(0.0, 2.0),
        tau=rng.uniform(0.005, 0.2),
        drive_phase_per_tau=rng.uniform(0.0, 2 * np.pi),
    )


def omega_grid(params: SystemParams, span: float = 10.0, points: int = 201) -> np.ndarray:
    kappa = max(params.kappa_a, params.kappa_b, 1e-12)
    return np.linspace(-span * kappa, span * kappa, points)


def check_identities(param_sets, topologies, omegas_for):
    """Worst passivity, unitarity and shot-noise residuals over all combinations."""
    worst = {"passivity": 0.0, "unitarity": 0.0, "shot-noise": 0.0}
    where = {k: "" for k in worst}
    for p in param_sets:
        for t in topologies:
            for om in omegas_for(p):
                res = response(p, t, om)
                scale = max(1.0, float(np.abs(res.a_matrix).max()))
                values = {
                    "passivity": res.passivity_residual / scale,
                    "unitarity": res.unitarity_residual,
                    "shot-noise": float(np.abs(0.5 * np.sum(np.abs(res.g_matrix) ** 2, axis=1) - 0.5).max()),
                }
                for k, v in values.items():
                    if not v <= worst[k]:
                        worst[k] = v
                        where[k] = f"worst at {t.label} N={t.N} M={t.M} omega={om:.4g}"
    return worst, where


def check_oracle(max_points: int = 5, samples: int = 64) -> float:
    phi = np.linspace(0, 2 * np.pi, samples)
    worst = 0.0
    for t in representative_topologies(max_points):
        diff = np.abs(coupling_matrix_closed(t, phi) - coupling_matrix_bruteforce(t, phi)).max()
        worst = max(worst, diff / (t.N + t.M) ** 2)
    return float(worst)


def check_hermitian(samples: int = 64) -> float:
    phi = np.linspace(0, 2 * np.pi, samples)
    worst = 0.0
    for t in representative_topologies(4):
        if t.kind is Kind.DIRECT:
            continue
        Ag = coupling_matrix_bruteforce(t, phi)
        v = waveguide_vector(t, phi)
        lhs = Ag + np.conj(np.swapaxes(Ag, -1, -2))
        rhs = -v[..., :, None] * np.conj(v[..., None, :])
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    return worst


def check_sigma(param_sets, topologies) -> float:
    worst = 0.0
    for p in param_sets:
        for t in topologies:
            res = response(p, t, 0.0)
            A, G = res.a_matrix, res.g_matrix
            if max(abs(A[0, 1]), abs(A[1, 0])) < 1e-9 * np.abs(A).max():
                continue
            diff = abs(float(sigma_from_matrix(A[0, 1], A[1, 0])) - float(sigma_from_matrix(G[0, 1], G[1, 0])))
            worst = max(worst, diff)
    return worst


def run_battery(params: SystemParams, topology=None, checks=CHECKS, seed: int = 0,
                random_sets: int = 5, omega_span: float = 10.0, omega_points: int = 41):
    """Run the selected checks; returns a list of CheckResult."""
    rng = np.random.default_rng(seed)
    topologies = [topology] if topology is not None else representative_topologies(3)
    param_sets = [params] + [random_params(rng) for _ in range(random_sets)]

    def omegas_for(p):
        return omega_grid(p, omega_span, omega_points)

    results = []
    if any(c in checks for c in ("passivity", "unitarity", "shot-noise")):
        worst, where = check_identities(param_sets, topologies, omegas_for)
        for name in ("passivity", "unitarity", "shot-noise"):
            if name in checks:
                tol = 1e-12 if name == "passivity" else 1e-10
                results.append(CheckResult(name, worst[name], tol, where[name]))
    if "oracle" in checks:
        results.append(CheckResult("oracle", check_oracle(), 1e-12))
    if "hermitian" in checks:
        results.append(CheckResult("hermitian", check_hermitian(), 1e-12))
    if "sigma" in checks:
        results.append(CheckResult("sigma", check_sigma(param_sets, topologies), 1e-10))
    return results


def unitarity_table(params: SystemParams, topology: Topology, span: float = 10.0, points: int = 201):
    """(omega, |GG^dagger - I|_max) rows over omega in [-span kappa, span kappa]."""
    rows = []
    for om in omega_grid(params, span, points):
        rows.append((float(om), response(params, topology, om).unitarity_residual))
    return rows

