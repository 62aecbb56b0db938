"""Frequency-domain response: matrices A(omega), B(omega) and transfer function G.

The state vector is (a, b_x); the b_y mode is adiabatically folded into the
b_x susceptibility and into the fifth input column.  Input columns are
ordered (alpha_in, beta_in, c_in, f_x, f_y).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .topology import Kind, Topology, coupling_matrix_closed, waveguide_vector


class ResponseError(ValueError):
    pass


class SingularResponseError(ResponseError):
    """A(omega) is numerically singular."""


class DegenerateEliminationError(ResponseError):
    """The b_y elimination hits its pole (gamma_y = 0 and omega = delta2)."""


class UndefinedSigmaError(ResponseError):
    """Both off-diagonal couplings vanish, so sigma is 0/0."""


DET_TOLERANCE = 1e-14


@dataclass(frozen=True)
class SystemParams:
    delta1: float = 0.0
    delta2: float = 0.0
    kappa_a: float = 10.0
    kappa_b: float = 10.0
    gamma: float = 0.0
    gamma_x: float = 1.0
    gamma_y: float = 1.0
    omega_rot: float = 0.5
    tau: float = 0.01
    drive_phase_per_tau: float = 0.0

    def violations(self) -> list:
        """Names of fields that break the physical invariants."""
        bad = []
        for name in ("kappa_a", "kappa_b", "gamma", "gamma_x", "gamma_y", "omega_rot"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                bad.append(f"{name} must be a nonnegative rate (got {value})")
        if not math.isfinite(self.tau) or self.tau <= 0:
            bad.append(f"tau must be positive (got {self.tau})")
        for name in ("delta1", "delta2", "drive_phase_per_tau"):
            if not math.isfinite(getattr(self, name)):
                bad.append(f"{name} must be finite")
        return bad

    def validate(self) -> None:
        bad = self.violations()
        if bad:
            raise ValueError("; ".join(bad))

    @property
    def cooperativity(self):
        """C_o = 4 gamma^2 / kappa^2, defined only for kappa_a == kappa_b."""
        if self.kappa_a != self.kappa_b or self.kappa_a == 0:
            return None
        return 4 * self.gamma ** 2 / self.kappa_a ** 2

    def with_cooperativity(self, co: float) -> "SystemParams":
        """Copy with gamma = (kappa/2) sqrt(C_o), kappa held fixed."""
        if self.kappa_a != self.kappa_b:
            raise ValueError("cooperativity needs kappa_a == kappa_b")
        if co < 0:
            raise ValueError("cooperativity must be nonnegative")
        return replace(self, gamma=0.5 * self.kappa_a * math.sqrt(co))

    @classmethod
    def reference(cls, co: float = 0.1, **overrides) -> "SystemParams":
        """kappa = 10 gamma_x, gamma_x = gamma_y = 1, Omega = 0.5, resonant."""
        base = cls(**overrides) if overrides else cls()
        return base.with_cooperativity(co)

    def to_record(self) -> dict:
        return asdict(self)

    @classmethod
    def from_record(cls, record: dict) -> "SystemParams":
        return cls(**{k: float(v) for k, v in record.items()})


@dataclass
class ResponseSet:
    omega: float
    phi: float
    a_matrix: np.ndarray
    b_matrix: np.ndarray
    g_matrix: np.ndarray
    passivity_residual: float
    unitarity_residual: float


def _by_denominator(params: SystemParams, omega: float) -> complex:
    den = 1j * (-omega + params.delta2) - params.gamma_y / 2
    if den == 0:
        raise DegenerateEliminationError(
            f"b_y elimination is singular at omega={omega} (gamma_y = 0 and omega = delta2)"
        )
    return den


def susceptibilities(params: SystemParams, omega: float = 0.0):
    """(chi_1, chi_2) with the b_y mode folded into chi_2."""
    den = _by_denominator(params, omega)
    chi1 = 1j * (-omega + params.delta1) - params.kappa_a / 2
    chi2 = 1j * (-omega + params.delta2) - (params.kappa_b + params.gamma_x) / 2
    chi2 = chi2 + params.omega_rot ** 2 / den
    return chi1, chi2


def phase(params: SystemParams, omega: float = 0.0) -> float:
    """phi = (omega_d - omega) tau."""
    return params.drive_phase_per_tau - omega * params.tau


def system_matrices(params: SystemParams, topology: Topology, omega: float = 0.0):
    """Return (phi, A, B) at frequency omega."""
    phi = phase(params, omega)
    chi1, chi2 = susceptibilities(params, omega)
    den = _by_denominator(params, omega)
    A = np.diag([chi1, chi2]) + coupling_matrix_closed(topology, phi, params.gamma)
    B = np.zeros((2, 5), dtype=complex)
    B[0, 0] = math.sqrt(abs(params.kappa_a))
    B[1, 1] = math.sqrt(abs(params.kappa_b))
    B[:, 2] = waveguide_vector(topology, phi, params.gamma)
    # abs() keeps gain rates (negative) finite so the identities can flag them
    B[1, 3] = math.sqrt(abs(params.gamma_x))
    B[1, 4] = -params.omega_rot * math.sqrt(abs(params.gamma_y)) / den
    return phi, A, B


def _check_det(A, omega):
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    scale = np.abs(A).max() ** 2
    if abs(det) <= DET_TOLERANCE * scale:
        raise SingularResponseError(f"A(omega) is singular at omega={omega}")
    return det


def response(params: SystemParams, topology: Topology, omega: float = 0.0) -> ResponseSet:
    phi, A, B = system_matrices(params, topology, omega)
    _check_det(A, omega)
    ports = np.diag([math.sqrt(abs(params.kappa_a)), math.sqrt(abs(params.kappa_b))])
    G = np.hstack([np.eye(2), np.zeros((2, 3))]) + ports @ np.linalg.solve(A, B)
    passivity = np.abs(A + A.conj().T + B @ B.conj().T).max()
    unitarity = np.abs(G @ G.conj().T - np.eye(2)).max()
    return ResponseSet(omega, phi, A, B, G, float(passivity), float(unitarity))


def transfer_elements_explicit(params: SystemParams, topology: Topology, omega: float = 0.0):
    """G assembled from the hand-expanded cofactor formulas (test oracle path)."""
    phi, A, B = system_matrices(params, topology, omega)
    chi1, chi2 = susceptibilities(params, omega)
    den = _by_denominator(params, omega)
    from .topology import coupling_matrix_bruteforce  # independent A_g route

    Ag = coupling_matrix_bruteforce(topology, phi, params.gamma)
    g_aa, g_ab, g_ba, g_bb = Ag[0, 0], Ag[0, 1], Ag[1, 0], Ag[1, 1]
    det = (chi1 + g_aa) * (chi2 + g_bb) - g_ab * g_ba
    if abs(det) <= DET_TOLERANCE * max(abs(chi1 + g_aa), abs(chi2 + g_bb), abs(g_ab), abs(g_ba)) ** 2:
        raise SingularResponseError(f"A(omega) is singular at omega={omega}")
    ka, kb = abs(params.kappa_a), abs(params.kappa_b)
    gx, gy = abs(params.gamma_x), abs(params.gamma_y)
    if topology.kind is Kind.DIRECT:
        sum_a = sum_b = 0.0
    else:
        from .topology import layout

        lay = layout(topology)
        sum_a = np.exp(1j * phi * np.asarray(lay.a_positions)).sum()
        sum_b = np.exp(1j * phi * np.asarray(lay.b_positions)).sum()
    rg = math.sqrt(params.gamma)
    by = params.omega_rot / den
    G = np.empty((2, 5), dtype=complex)
    G[0, 0] = 1 + ka * (chi2 + g_bb) / det
    G[0, 1] = -math.sqrt(ka * kb) * g_ab / det
    G[0, 2] = math.sqrt(ka) * rg * ((chi2 + g_bb) * sum_a - g_ab * sum_b) / det
    G[0, 3] = -math.sqrt(ka * gx) * g_ab / det
    G[0, 4] = math.sqrt(ka * gy) * g_ab * by / det
    G[1, 0] = -math.sqrt(ka * kb) * g_ba / det
    G[1, 1] = 1 + kb * (chi1 + g_aa) / det
    G[1, 2] = math.sqrt(kb) * rg * ((chi1 + g_aa) * sum_b - g_ba * sum_a) / det
    G[1, 3] = math.sqrt(kb * gx) * (chi1 + g_aa) / det
    G[1, 4] = -math.sqrt(kb * gy) * (chi1 + g_aa) * by / det
    return G


def sigma_from_matrix(a12, a21):
    """(|a21|^2 - |a12|^2) / (|a21|^2 + |a12|^2); NaN where undefined."""
    p21 = np.abs(a21) ** 2
    p12 = np.abs(a12) ** 2
    total = p21 + p12
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(total > 0, (p21 - p12) / np.where(total > 0, total, 1.0), np.nan)


def nonreciprocal_strength(params: SystemParams, topology: Topology, omega: float = 0.0) -> float:
    """sigma from the A off-diagonals, cross-checked against the G off-diagonals."""
    res = response(params, topology, omega)
    A = res.a_matrix
    scale = np.abs(A).max()
    if max(abs(A[0, 1]), abs(A[1, 0])) <= 1e-14 * scale:
        raise UndefinedSigmaError(f"both cross couplings vanish at omega={omega}")
    sigma_a = float(sigma_from_matrix(A[0, 1], A[1, 0]))
    G = res.g_matrix
    sigma_g = float(sigma_from_matrix(G[0, 1], G[1, 0]))
    if abs(sigma_a - sigma_g) > 1e-10:
        raise ResponseError(f"sigma from A ({sigma_a}) and from G ({sigma_g}) disagree")
    return sigma_a
