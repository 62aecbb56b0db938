"""Output signals, shot noise, SNR per photon and angular-velocity sensitivity.

Two routes are available: the full transfer-function pipeline (``report``,
``sensitivity_numeric``) and closed-form expressions valid on resonance
(``snr_closed``, ``sensitivity_closed``).  The closed forms are written in
terms of four coefficient functions (f_alpha, f_beta, F1, F2) of
z = exp(i phi) and sqrt(C_o):

    R_alpha = 2 |1 - (f_alpha kappa + gamma_x + 4 Omega^2/gamma_y) / D|^2
    R_beta  = 2 |1 - f_beta kappa / D|^2,   D = F1 kappa/2 + F2 X,
    X = gamma_x/2 + 2 Omega^2/gamma_y.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .linear_response import SystemParams, response
from .topology import Kind, Orientation, Topology


class ClosedFormUnavailable(ValueError):
    """No closed form exists for this case; use the transfer-function pipeline."""


@dataclass(frozen=True)
class DriveConfig:
    alpha: complex = 1.0
    r: float = 1.0
    theta: float = 0.0

    @property
    def beta(self) -> complex:
        return complex(self.alpha) * self.r * np.exp(1j * self.theta)

    @property
    def photon_number(self) -> float:
        return abs(self.alpha) ** 2 + abs(self.beta) ** 2

    def to_record(self) -> dict:
        a = complex(self.alpha)
        return {"alpha": [a.real, a.imag], "r": self.r, "theta": self.theta}

    @classmethod
    def from_record(cls, record: dict) -> "DriveConfig":
        alpha = record.get("alpha", 1.0)
        alpha = complex(*alpha) if isinstance(alpha, (list, tuple)) else complex(alpha)
        return cls(alpha=alpha, r=float(record.get("r", 1.0)), theta=float(record.get("theta", 0.0)))


@dataclass
class SensingReport:
    signal_alpha: float
    signal_beta: float
    noise_alpha: float
    noise_beta: float
    snr_alpha: float
    snr_beta: float
    sens_alpha: float
    sens_beta: float

    def as_row(self) -> dict:
        return asdict(self)


def _port_combination(G, drive: DriveConfig):
    weight = drive.r * np.exp(1j * drive.theta)
    return G[:, 0] + weight * G[:, 1]


def _outputs(params, topology, drive, omega):
    res = response(params, topology, omega)
    return complex(drive.alpha) * _port_combination(res.g_matrix, drive), res


def sensitivity_numeric(params: SystemParams, topology: Topology, drive: DriveConfig, omega: float = 0.0):
    """|N / d<out>/d(Omega^2)| by a Richardson-extrapolated central difference.

    Returns ``math.inf`` for a port whose output carries no Omega dependence.
    """
    if abs(drive.alpha) == 0:
        raise ValueError("sensitivity needs a nonzero probe amplitude alpha")
    u0 = (1e-3 * params.gamma_y) ** 2
    if u0 == 0:
        raise ValueError("sensitivity needs gamma_y > 0")

    def out_at(u):
        p = replace(params, omega_rot=math.sqrt(u))
        return _outputs(p, topology, drive, omega)[0]

    def central(step):
        return (out_at(u0 + step) - out_at(u0 - step)) / (2 * step)

    deriv = (4 * central(u0 / 4) - central(u0 / 2)) / 3
    res = response(replace(params, omega_rot=math.sqrt(u0)), topology, omega)
    noise = 0.5 * np.sum(np.abs(res.g_matrix) ** 2, axis=1)
    out = []
    for n, d in zip(noise, deriv):
        out.append(math.inf if abs(d) < 1e-300 else float(n / abs(d)))
    return tuple(out)


def report(params: SystemParams, topology: Topology, drive: DriveConfig = DriveConfig(), omega: float = 0.0) -> SensingReport:
    if abs(drive.alpha) == 0:
        raise ValueError("report needs a nonzero probe amplitude alpha")
    out, res = _outputs(params, topology, drive, omega)
    G = res.g_matrix
    noise = 0.5 * np.sum(np.abs(G) ** 2, axis=1)
    comb = _port_combination(G, drive)
    snr = 2 * np.abs(comb) ** 2
    sens = sensitivity_numeric(params, topology, drive, omega)
    return SensingReport(
        signal_alpha=float(abs(out[0]) ** 2),
        signal_beta=float(abs(out[1]) ** 2),
        noise_alpha=float(noise[0]),
        noise_beta=float(noise[1]),
        snr_alpha=float(snr[0]),
        snr_beta=float(snr[1]),
        sens_alpha=sens[0],
        sens_beta=sens[1],
    )


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def closed_form_case(topology: Topology) -> str:
    """Name of the closed-form family for this topology, or raise."""
    t = topology
    if t.kind is Kind.COINCIDENT:
        return "traditional-i"
    if t.kind is Kind.DIRECT:
        return "traditional-ii"
    if t.kind is Kind.BRAIDED:
        if t.N == t.M == 2:
            return f"strict-{t.orientation.value}"
        if (t.orientation, t.N, t.M) == (Orientation.I, 2, 3):
            return "general-i"
        if (t.orientation, t.N, t.M) == (Orientation.II, 3, 2):
            return "general-ii"
    raise ClosedFormUnavailable(
        f"no closed-form SNR/sensitivity for {t.label} N={t.N} M={t.M}; use report()"
    )


def _coefficients(case: str, phi, co, corrected=False):
    """(f_alpha, f_beta, F1, F2) for the resonant closed forms."""
    z = np.exp(1j * np.asarray(phi, dtype=float))
    c = math.sqrt(co)
    one = np.ones_like(z)
    if case.startswith("strict"):
        f1 = 1 + c * (1 - z + z ** 2)
        f2 = 1 + c * (1 - 2 * z + z ** 2 - z ** 3)
        F1 = 1 + co + 2 * c * (1 + z ** 2)
        F2 = 1 + c * (1 + z ** 2)
        return (f1, f2, F1, F2) if case == "strict-i" else (f2, f1, F1, F2)
    if case.startswith("general"):
        g1 = 1 + c * (1.5 + z ** 2 + z ** 3)
        g2 = 1 + c * (1 - 2 * z - z ** 3 - z ** 4)
        G1 = 1 + co * (1.5 + z + 0.5 * z ** 2 + z ** 3) + c * (2.5 + z + 2 * z ** 2 + z ** 3)
        G2 = 1 + c * (1 + z ** 2)
        if case == "general-i":
            return g1, g2, G1, G2
        if corrected:
            # the b-side self coupling carries three a-points in this mirror case
            G2 = 1 + c * (1.5 + z + z ** 2 + z ** 3)
        return g2, g1, G1, G2
    if case == "traditional-i":
        return one, one, (1 + c) * one, (1 + c / 2) * one
    if case == "traditional-ii":
        F1 = (1 + co) if corrected else (1 - co)
        return (1 + c) * one, (1 - c) * one, F1 * one, one
    raise ClosedFormUnavailable(case)


def resonant_check(params: SystemParams, drive: DriveConfig | None = None):
    """Raise ClosedFormUnavailable unless the closed-form regime applies."""
    if params.delta1 != 0 or params.delta2 != 0:
        raise ClosedFormUnavailable("closed forms hold only for delta1 = delta2 = 0")
    if params.kappa_a != params.kappa_b or params.kappa_a <= 0:
        raise ClosedFormUnavailable("closed forms need kappa_a == kappa_b > 0")
    if params.gamma_y <= 0:
        raise ClosedFormUnavailable("closed forms need gamma_y > 0")
    if drive is not None and (drive.r != 1 or drive.theta != 0):
        raise ClosedFormUnavailable("closed forms assume r = 1 and theta = 0")


def snr_closed(params: SystemParams, topology: Topology, phi=None, corrected: bool = False):
    """(R_alpha, R_beta) at omega = 0 from the resonant closed forms.

    By default the standard reference coefficients are used.  For general
    braided (ii) and direct coupling those disagree with the
    transfer-function pipeline; ``corrected=True`` swaps in coefficients
    that agree with it.
    """
    resonant_check(params)
    case = closed_form_case(topology)
    if phi is None:
        phi = params.drive_phase_per_tau
    co = params.cooperativity
    fa, fb, F1, F2 = _coefficients(case, phi, co, corrected)
    k = params.kappa_a
    X = params.gamma_x / 2 + 2 * params.omega_rot ** 2 / params.gamma_y
    residual = params.gamma_x + 4 * params.omega_rot ** 2 / params.gamma_y
    D = F1 * k / 2 + F2 * X
    r_alpha = 2 * np.abs(1 - (fa * k + residual) / D) ** 2
    r_beta = 2 * np.abs(1 - fb * k / D) ** 2
    if np.ndim(r_alpha) == 0:
        return float(r_alpha), float(r_beta)
    return r_alpha, r_beta


def sensitivity_closed(params: SystemParams, topology: Topology, phi=None, alpha=1.0, corrected: bool = False):
    """(dOmega^2_alpha, dOmega^2_beta) from the leading-order closed forms.

    Prefactor gamma_y kappa / (16 |alpha|); the rest is |F1^2/(F1 - f_alpha F2)|
    and |F1^2/(f_beta F2)|, which reduces to the familiar expressions for each
    named case.
    """
    resonant_check(params)
    case = closed_form_case(topology)
    if phi is None:
        phi = params.drive_phase_per_tau
    co = params.cooperativity
    c = math.sqrt(co)
    pre = params.gamma_y * params.kappa_a / (16 * abs(alpha))
    if case == "traditional-ii":
        # the reference form carries (1 + C_o), unlike the reference SNR
        s_alpha = pre * abs((1 + co) ** 2 / (co - c)) if co not in (0.0, 1.0) else math.inf
        s_beta = pre * abs((1 + co) ** 2 / (1 - c)) if co != 1.0 else math.inf
        shape = np.shape(phi)
        if shape:
            return np.full(shape, s_alpha), np.full(shape, s_beta)
        return s_alpha, s_beta
    fa, fb, F1, F2 = _coefficients(case, phi, co, corrected)
    with np.errstate(divide="ignore", invalid="ignore"):
        s_alpha = pre * np.abs(F1 ** 2 / (F1 - fa * F2))
        s_beta = pre * np.abs(F1 ** 2 / (fb * F2))
    s_alpha = np.where(np.isfinite(s_alpha), s_alpha, math.inf)
    s_beta = np.where(np.isfinite(s_beta), s_beta, math.inf)
    if np.ndim(s_alpha) == 0:
        return float(s_alpha), float(s_beta)
    return s_alpha, s_beta
