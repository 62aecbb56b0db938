"""Time-domain integration of the delayed mean-field equations of motion.

The state is x = (<a>, <b_x>, <b_y>).  Every delayed term refers back an
integer number of lattice steps tau, so a fixed step dt = tau/K puts all
delayed grid values on stored grid points.  Classical RK4 additionally
needs the delayed state at half steps; those come from the cubic Hermite
interpolant built from stored values and stored derivatives, which keeps
the scheme fourth order.  History is zero for t < 0 and the probe switches
on at t = 0.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import asdict, dataclass

import numpy as np

from .linear_response import SystemParams, response
from .topology import Kind, Topology, layout

try:  # numba is optional; the kernel is valid plain Python as well
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


class DdeConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DdeConfig:
    steps_per_tau: int = 32
    total_time: float = 60.0
    drive_alpha: complex = 1.0
    drive_beta: complex = 0.0
    record_every: int = 1
    markovian: bool = False

    def validate(self) -> None:
        if int(self.steps_per_tau) != self.steps_per_tau or self.steps_per_tau < 8:
            raise DdeConfigError(f"steps_per_tau must be an integer >= 8 (got {self.steps_per_tau})")
        if not self.total_time > 0:
            raise DdeConfigError("total_time must be positive")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise DdeConfigError("record_every must be a positive integer")

    def to_record(self) -> dict:
        rec = asdict(self)
        for key in ("drive_alpha", "drive_beta"):
            value = complex(rec[key])
            rec[key] = [value.real, value.imag]
        return rec

    @classmethod
    def from_record(cls, record: dict) -> "DdeConfig":
        rec = dict(record)
        for key in ("drive_alpha", "drive_beta"):
            if key in rec:
                value = rec[key]
                rec[key] = complex(*value) if isinstance(value, (list, tuple)) else complex(value)
        return cls(**rec)


@dataclass
class Trajectory:
    times: np.ndarray
    means: np.ndarray  # shape (T, 3): <a>, <b_x>, <b_y>
    outputs: np.ndarray  # shape (T, 2): <alpha_out>, <beta_out>
    final_means: np.ndarray  # state at the last integration step

    def to_csv(self, path_or_file) -> None:
        names = ["t"]
        for label in ("a", "bx", "by", "alpha_out", "beta_out"):
            names += [f"re_{label}", f"im_{label}"]
        close = False
        if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
            fh = open(path_or_file, "w", newline="")
            close = True
        else:
            fh = path_or_file
        try:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(names)
            data = np.hstack([self.means, self.outputs])
            for t, row in zip(self.times, data):
                cells = [format(float(t), ".17g")]
                for value in row:
                    cells += [format(value.real, ".17g"), format(value.imag, ".17g")]
                writer.writerow(cells)
        finally:
            if close:
                fh.close()


def _assemble(params: SystemParams, topology: Topology, markovian: bool):
    """Local matrix L (3x3) and the delayed couplings grouped by lattice delay."""
    p = params
    L = np.zeros((3, 3), dtype=complex)
    L[0, 0] = 1j * p.delta1 - p.kappa_a / 2
    L[1, 1] = 1j * p.delta2 - (p.kappa_b + p.gamma_x) / 2
    L[2, 2] = 1j * p.delta2 - p.gamma_y / 2
    L[1, 2] = p.omega_rot
    L[2, 1] = -p.omega_rot
    delayed = defaultdict(complex)
    if topology.kind is Kind.DIRECT:
        L[0, 1] += p.gamma
        L[1, 0] += -p.gamma
        return L, delayed
    lay = layout(topology)
    groups = (lay.a_positions, lay.b_positions)
    phase = p.drive_phase_per_tau
    for row, hs in enumerate(groups):
        for col, ss in enumerate(groups):
            for h in hs:
                for s in ss:
                    d = h - s
                    if d == 0:
                        L[row, col] += -p.gamma * 0.5
                    elif markovian:
                        L[row, col] += -p.gamma * np.exp(1j * phase * abs(d))
                    elif d > 0:
                        delayed[(d, row, col)] += -p.gamma * np.exp(1j * phase * d)
    return L, delayed


@njit(cache=True)
def _rk4_kernel(L, dsteps, rows, cols, coefs, drive, h, nsteps, stride, ring):
    nrec = nsteps // stride + 1
    rec = np.zeros((nrec, 3), dtype=np.complex128)
    xs = np.zeros((ring, 3), dtype=np.complex128)
    fs = np.zeros((ring, 3), dtype=np.complex128)
    x = np.zeros(3, dtype=np.complex128)
    nterms = dsteps.shape[0]
    k1 = np.zeros(3, dtype=np.complex128)
    k2 = np.zeros(3, dtype=np.complex128)
    k3 = np.zeros(3, dtype=np.complex128)
    k4 = np.zeros(3, dtype=np.complex128)
    tmp = np.zeros(3, dtype=np.complex128)
    for n in range(nsteps):
        # rhs at grid time n (stage 1)
        for r in range(3):
            acc = drive[r]
            for c in range(3):
                acc += L[r, c] * x[c]
            k1[r] = acc
        for q in range(nterms):
            j = n - dsteps[q]
            if j >= 0:
                k1[rows[q]] += coefs[q] * xs[j % ring, cols[q]]
        fs[n % ring, :] = k1
        xs[n % ring, :] = x
        # stages 2 and 3 at the half step
        for stage in range(2):
            kin = k1 if stage == 0 else k2
            for r in range(3):
                tmp[r] = x[r] + 0.5 * h * kin[r]
            kout = k2 if stage == 0 else k3
            for r in range(3):
                acc = drive[r]
                for c in range(3):
                    acc += L[r, c] * tmp[c]
                kout[r] = acc
            for q in range(nterms):
                j = n - dsteps[q]
                if j >= 0:
                    a0 = j % ring
                    a1 = (j + 1) % ring
                    col = cols[q]
                    mid = 0.5 * (xs[a0, col] + xs[a1, col]) + h * (fs[a0, col] - fs[a1, col]) / 8.0
                    kout[rows[q]] += coefs[q] * mid
        # stage 4 at grid time n + 1
        for r in range(3):
            tmp[r] = x[r] + h * k3[r]
        for r in range(3):
            acc = drive[r]
            for c in range(3):
                acc += L[r, c] * tmp[c]
            k4[r] = acc
        for q in range(nterms):
            j = n + 1 - dsteps[q]
            if j >= 0:
                k4[rows[q]] += coefs[q] * xs[j % ring, cols[q]]
        for r in range(3):
            x[r] = x[r] + h * (k1[r] + 2.0 * k2[r] + 2.0 * k3[r] + k4[r]) / 6.0
        if (n + 1) % stride == 0:
            rec[(n + 1) // stride, :] = x
    return rec, x


def integrate(params: SystemParams, topology: Topology, config: DdeConfig) -> Trajectory:
    """Fixed-step RK4 solution of the delayed mean equations from rest."""
    config.validate()
    K = int(config.steps_per_tau)
    h = params.tau / K
    nsteps = int(math.ceil(config.total_time / h - 1e-9))
    L, delayed = _assemble(params, topology, config.markovian)
    keys = sorted(delayed)
    dsteps = np.array([d * K for d, _, _ in keys], dtype=np.int64)
    rows = np.array([r for _, r, _ in keys], dtype=np.int64)
    cols = np.array([c for _, _, c in keys], dtype=np.int64)
    coefs = np.array([delayed[k] for k in keys], dtype=np.complex128)
    ring = int(dsteps.max()) + 2 if len(keys) else 2
    alpha, beta = complex(config.drive_alpha), complex(config.drive_beta)
    drive = np.array(
        [-math.sqrt(params.kappa_a) * alpha, -math.sqrt(params.kappa_b) * beta, 0.0], dtype=np.complex128
    )
    stride = int(config.record_every)
    rec, final = _rk4_kernel(L, dsteps, rows, cols, coefs, drive, h, nsteps, stride, ring)
    times = np.arange(rec.shape[0]) * (stride * h)
    outputs = np.empty((rec.shape[0], 2), dtype=complex)
    outputs[:, 0] = alpha + math.sqrt(params.kappa_a) * rec[:, 0]
    outputs[:, 1] = beta + math.sqrt(params.kappa_b) * rec[:, 1]
    # the recorded value at t=0 is the rest state, and the probe is already on
    return Trajectory(times=times, means=rec, outputs=outputs, final_means=final)


def steady_state(params: SystemParams, topology: Topology, drive_alpha=1.0, drive_beta=0.0) -> np.ndarray:
    """(a, b_x) from A(0)^-1 B(0) applied to the classical probe columns."""
    res = response(params, topology, 0.0)
    u = np.zeros(5, dtype=complex)
    u[0], u[1] = drive_alpha, drive_beta
    return np.linalg.solve(res.a_matrix, res.b_matrix @ u)


def steady_state_error(params: SystemParams, topology: Topology, config: DdeConfig) -> float:
    """Relative distance between the final integrated state and the frequency-domain steady state."""
    traj = integrate(params, topology, config)
    ss = steady_state(params, topology, config.drive_alpha, config.drive_beta)
    return float(np.linalg.norm(traj.final_means[:2] - ss) / np.linalg.norm(ss))
