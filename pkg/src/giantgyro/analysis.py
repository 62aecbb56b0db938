"""Parameter sweeps, reciprocal-point search and figure data."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace

import mpmath
import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .linear_response import ResponseError, SystemParams, response, sigma_from_matrix
from .sensing import (
    ClosedFormUnavailable,
    DriveConfig,
    closed_form_case,
    resonant_check,
    sensitivity_closed,
    sensitivity_numeric,
    snr_closed,
)
from .topology import Kind, Orientation, Topology, coupling_matrix_bruteforce, coupling_matrix_closed, layout

TWO_PI = 2 * math.pi
VARIABLES = ("phi", "omega", "cooperativity")


@dataclass
class SweepSpec:
    variable: str
    grid: np.ndarray
    params: SystemParams
    topology: Topology
    drive: DriveConfig = DriveConfig()
    sensitivity: bool = True
    closed: bool = True

    def validate(self) -> None:
        if self.variable not in VARIABLES:
            raise ValueError(f"variable must be one of {VARIABLES}, got {self.variable!r}")
        grid = np.asarray(self.grid, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("grid needs at least two points")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if self.variable == "phi" and (grid[0] < 0 or grid[-1] > TWO_PI + 1e-12):
            raise ValueError("phi grid must lie in [0, 2pi]")
        if self.variable == "cooperativity" and grid[0] <= 0:
            raise ValueError("cooperativity grid must be positive")


@dataclass
class CurveData:
    variable: str
    values: np.ndarray
    columns: dict = field(default_factory=dict)
    snapshot: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.values)

    def to_csv(self, path_or_file=None) -> str:
        """Write (or return) CSV text: one comment line, a header, one row per point."""
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.snapshot, sort_keys=True) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        names = [self.variable] + list(self.columns)
        writer.writerow(names)
        cols = [self.values] + [self.columns[k] for k in self.columns]
        for i in range(len(self.values)):
            writer.writerow([format(float(c[i]), ".17g") for c in cols])
        text = buf.getvalue()
        if path_or_file is not None:
            if hasattr(path_or_file, "write"):
                path_or_file.write(text)
            else:
                with open(path_or_file, "w", newline="") as fh:
                    fh.write(text)
        return text


def _point_params(spec: SweepSpec, value: float):
    if spec.variable == "phi":
        return replace(spec.params, drive_phase_per_tau=value), 0.0
    if spec.variable == "omega":
        return spec.params, value
    return spec.params.with_cooperativity(value), 0.0


def sweep(spec: SweepSpec) -> CurveData:
    """Evaluate sigma, SNR, sensitivity and identity residuals along the grid."""
    spec.validate()
    grid = np.asarray(spec.grid, dtype=float)
    names = ["sigma", "snr_alpha", "snr_beta", "noise_alpha", "noise_beta"]
    if spec.sensitivity:
        names += ["sens_alpha", "sens_beta"]
    closed_ok = spec.closed and spec.variable != "omega"
    if closed_ok:
        try:
            closed_form_case(spec.topology)
            resonant_check(spec.params, spec.drive)
        except ClosedFormUnavailable:
            closed_ok = False
    if closed_ok:
        names += ["closed_snr_alpha", "closed_snr_beta", "closed_sens_alpha", "closed_sens_beta"]
    names += ["passivity_residual", "unitarity_residual"]
    cols = {k: np.empty(grid.size) for k in names}
    weight = spec.drive.r * np.exp(1j * spec.drive.theta)
    for i, value in enumerate(grid):
        params, omega = _point_params(spec, value)
        try:
            res = response(params, spec.topology, omega)
        except ResponseError as exc:
            raise ResponseError(f"{exc} (grid {spec.variable}={value!r})") from exc
        A, G = res.a_matrix, res.g_matrix
        cols["sigma"][i] = sigma_from_matrix(A[0, 1], A[1, 0])
        comb = G[:, 0] + weight * G[:, 1]
        cols["snr_alpha"][i], cols["snr_beta"][i] = 2 * np.abs(comb) ** 2
        cols["noise_alpha"][i], cols["noise_beta"][i] = 0.5 * np.sum(np.abs(G) ** 2, axis=1)
        if spec.sensitivity:
            cols["sens_alpha"][i], cols["sens_beta"][i] = sensitivity_numeric(params, spec.topology, spec.drive, omega)
        if closed_ok:
            cols["closed_snr_alpha"][i], cols["closed_snr_beta"][i] = snr_closed(params, spec.topology)
            cols["closed_sens_alpha"][i], cols["closed_sens_beta"][i] = sensitivity_closed(
                params, spec.topology, alpha=spec.drive.alpha
            )
        cols["passivity_residual"][i] = res.passivity_residual
        cols["unitarity_residual"][i] = res.unitarity_residual
    return CurveData(spec.variable, grid, cols, snapshot(spec.params, spec.topology, spec.drive))


def snapshot(params: SystemParams, topology: Topology, drive: DriveConfig | None = None) -> dict:
    snap = {"params": params.to_record(), "topology": topology.to_record()}
    if drive is not None:
        snap["drive"] = drive.to_record()
    return snap


# ---------------------------------------------------------------------------
# reciprocal points
# ---------------------------------------------------------------------------

@dataclass
class ReciprocalPoints:
    roots: np.ndarray
    everywhere: bool = False  # sigma vanishes identically

    def __len__(self):
        return len(self.roots)


def _sigma_curve(topology: Topology, phi, builder=coupling_matrix_bruteforce):
    """sigma(phi) at omega = 0 from A_g alone; removable 0/0 points are bridged."""
    phi = np.asarray(phi, dtype=float)
    Ag = builder(topology, phi, 1.0)
    a12, a21 = Ag[..., 0, 1], Ag[..., 1, 0]
    tiny = (np.abs(a12) ** 2 + np.abs(a21) ** 2) < 1e-20
    sig = sigma_from_matrix(a12, a21)
    if np.any(tiny):
        eps = 1e-6
        left = sigma_from_matrix(*_offdiag(builder(topology, phi - eps, 1.0)))
        right = sigma_from_matrix(*_offdiag(builder(topology, phi + eps, 1.0)))
        sig = np.where(tiny, 0.5 * (left + right), sig)
    return sig


def _offdiag(Ag):
    return Ag[..., 0, 1], Ag[..., 1, 0]


def _identically_reciprocal(topology: Topology) -> bool:
    t = topology
    if t.kind in (Kind.COINCIDENT, Kind.DIRECT):
        return True
    if t.kind is Kind.NESTED:
        total = t.N if t.orientation is Orientation.I else t.M
        return total == 2 * t.nest_index
    return False


def _dedupe(roots, tol=1e-6):
    out = []
    for r in sorted(roots):
        if not out or r - out[-1] > tol:
            out.append(r)
    return np.array(out)


def _numeric_roots(f, f_precise=None, samples=10_000, tangential_tol=1e-8):
    """Zeros of f on (0, 2pi): sign changes plus touching zeros.

    ``f`` is evaluated on the scan grid; refinement uses ``f_precise`` when
    given, which matters for roots sitting on removable 0/0 points where
    double precision loses most digits.
    """
    g = f_precise if f_precise is not None else (lambda x: float(f(x)))
    grid = (np.arange(samples) + 0.5) * (TWO_PI / samples)
    vals = f(grid)
    roots = []
    for i in range(samples - 1):
        v0, v1 = vals[i], vals[i + 1]
        if not (np.isfinite(v0) and np.isfinite(v1)):
            continue
        if v0 == 0:
            roots.append(grid[i])
        elif v0 * v1 < 0:
            lo, hi = grid[i], grid[i + 1]
            if g(lo) * g(hi) < 0:
                roots.append(brentq(g, lo, hi, xtol=1e-13))
    mag = np.abs(vals)
    for i in range(1, samples - 1):
        if mag[i] <= mag[i - 1] and mag[i] <= mag[i + 1] and vals[i - 1] * vals[i + 1] > 0:
            lo, hi = grid[i - 1], grid[i + 1]
            opt = minimize_scalar(lambda x: abs(g(x)), bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-12})
            if opt.fun < tangential_tol:
                roots.append(opt.x)
    return _dedupe(roots)


def _sigma_precise(topology: Topology):
    """Scalar sigma(phi) from the pair sums in 40-digit arithmetic."""
    lay = layout(topology)
    a, b = lay.a_positions, lay.b_positions

    def pair_sum(hs, ss, phi):
        total = mpmath.mpc(0)
        for h in hs:
            for s in ss:
                d = h - s
                if d > 0:
                    total += mpmath.expj(phi * d)
                elif d == 0:
                    total += mpmath.mpf(0.5)
        return total

    def sigma(phi):
        with mpmath.workdps(40):
            x = mpmath.mpf(float(phi))
            p12 = abs(pair_sum(a, b, x)) ** 2
            p21 = abs(pair_sum(b, a, x)) ** 2
            if p12 + p21 == 0:
                return float("nan")
            return float((p21 - p12) / (p21 + p12))

    return sigma


def _general_condition(topology: Topology, precise: bool = False):
    """Trigonometric reciprocity condition for general braided topologies.

    P and Q are the smaller and larger point counts.  Vectorised over phi,
    or a 40-digit scalar version for root refinement.
    """
    t = topology
    P, Q = (t.N, t.M) if t.orientation is Orientation.I else (t.M, t.N)
    L = Q - P

    def value(phi, sin, cos):
        first = P * sin(phi) * (cos((P - 1) * phi) + cos(P * phi) - cos(Q * phi) - cos((Q + 1) * phi))
        second = sin(P * phi) * (1 + cos(phi) - cos(L * phi) - cos((L + 1) * phi))
        return first + second

    if precise:
        def cond_precise(phi):
            with mpmath.workdps(40):
                return float(value(mpmath.mpf(float(phi)), mpmath.sin, mpmath.cos))

        return cond_precise

    def cond(phi):
        return value(np.asarray(phi, dtype=float), np.sin, np.cos)

    return cond


def reciprocal_points(topology: Topology, method: str = "numeric") -> ReciprocalPoints:
    """Phases phi in (0, 2pi) where sigma(0) = 0.

    ``closed`` uses the analytic conditions (candidates filtered by sigma = 0,
    which removes roots introduced by clearing denominators); ``numeric``
    scans sigma directly.
    """
    if method not in ("closed", "numeric"):
        raise ValueError("method must be 'closed' or 'numeric'")
    t = topology
    if _identically_reciprocal(t):
        return ReciprocalPoints(np.array([]), everywhere=True)
    if t.kind is Kind.SEPARATED:
        return ReciprocalPoints(np.array([]))
    if method == "numeric":
        return ReciprocalPoints(_numeric_roots(lambda x: _sigma_curve(t, x), _sigma_precise(t)))

    def is_root(phi):
        return abs(float(_sigma_curve(t, phi, coupling_matrix_closed))) < 1e-9

    if t.kind is Kind.NESTED:
        total = t.N if t.orientation is Orientation.I else t.M
        n = t.nest_index
        cands = [TWO_PI * k / total for k in range(1, total)]
        diff = abs(total - 2 * n)
        cands += [TWO_PI * k / diff for k in range(1, diff)]
        keep = []
        for phi in cands:
            z = np.exp(1j * phi)
            # both factors vanish together: sigma is 0/0 even after reduction
            if abs(1 - z ** n) < 1e-9 and abs(1 - z ** (total - n)) < 1e-9:
                continue
            keep.append(phi)
        return ReciprocalPoints(_dedupe(keep))
    if t.N == t.M:
        N = t.N
        cands = [math.pi * k / N for k in range(1, 2 * N)] + [math.pi]
        return ReciprocalPoints(_dedupe([p for p in cands if is_root(p)]))
    cond = _general_condition(t)
    cands = _numeric_roots(cond, _general_condition(t, precise=True))
    return ReciprocalPoints(_dedupe([p for p in cands if is_root(p)]))


# ---------------------------------------------------------------------------
# figure data
# ---------------------------------------------------------------------------

FIGURES = ("F3", "F4", "F5", "F6", "F7", "F8", "F9", "F10", "F11", "F12")
PANEL_COOPERATIVITIES = (0.01, 0.05, 0.1)

STRICT = {"i": Topology(Kind.BRAIDED, Orientation.I, 2, 2), "ii": Topology(Kind.BRAIDED, Orientation.II, 2, 2)}
GENERAL = {"i": Topology(Kind.BRAIDED, Orientation.I, 2, 3), "ii": Topology(Kind.BRAIDED, Orientation.II, 3, 2)}
TRADITIONAL = {"i": Topology(Kind.COINCIDENT), "ii": Topology(Kind.DIRECT)}


def reference_params(co: float = 0.1, phi: float = math.pi) -> SystemParams:
    return SystemParams.reference(co, drive_phase_per_tau=phi)


def _phi_grid(steps=401):
    return np.linspace(0.0, TWO_PI, steps)


def _phi_sweep(topology, co, steps, sensitivity):
    spec = SweepSpec("phi", _phi_grid(steps), reference_params(co), topology, sensitivity=sensitivity)
    return sweep(spec)


def compare_table(baseline: str = "i", phi: float = math.pi, grid=None) -> CurveData:
    """Closed-form sensitivity ratios of strict braided (i)/(ii) against a traditional baseline."""
    if grid is None:
        grid = np.round(np.linspace(0.01, 0.5, 50), 12)
    grid = np.asarray(grid, dtype=float)
    base = TRADITIONAL[baseline]
    cols = {}
    for orient, topo in STRICT.items():
        ra, rb = np.empty(grid.size), np.empty(grid.size)
        for i, co in enumerate(grid):
            p = reference_params(co, phi)
            ga, gb = sensitivity_closed(p, topo)
            ta, tb = sensitivity_closed(p, base)
            ra[i], rb[i] = ga / ta, gb / tb
        cols[f"strict_{orient}_ratio_alpha"] = ra
        cols[f"strict_{orient}_ratio_beta"] = rb
    snap = {"baseline": base.to_record(), "params": reference_params(0.1, phi).to_record(), "phi": phi}
    return CurveData("cooperativity", grid, cols, snap)


def _ratio_panel(topology, co, steps):
    data = _phi_sweep(topology, co, steps, sensitivity=False)
    a = data.columns["closed_sens_alpha"]
    b = data.columns["closed_sens_beta"]
    data.columns["closed_sens_ratio_beta_alpha"] = b / a
    return data


def _traditional_snr(which):
    grid = np.round(np.linspace(0.05, 0.5, 46), 12)
    spec = SweepSpec("cooperativity", grid, reference_params(0.1), TRADITIONAL[which], sensitivity=False)
    return sweep(spec)


def figure_data(figure_id: str, steps: int = 401) -> dict:
    """Panel name -> CurveData for one figure (reference scenario)."""
    fid = figure_id.upper()
    if fid not in FIGURES:
        raise ValueError(f"unknown figure {figure_id!r}; choose from {FIGURES}")
    out = {}
    if fid in ("F3", "F10"):
        family = STRICT if fid == "F3" else GENERAL
        for orient, topo in family.items():
            out[f"sigma_{orient}"] = _phi_sweep(topo, 0.1, steps, sensitivity=False)
    elif fid in ("F4", "F11"):
        family = STRICT if fid == "F4" else GENERAL
        for co in PANEL_COOPERATIVITIES:
            for orient, topo in family.items():
                out[f"snr_{orient}_co{co:g}"] = _phi_sweep(topo, co, steps, sensitivity=False)
    elif fid in ("F5", "F12"):
        family = STRICT if fid == "F5" else GENERAL
        for co in PANEL_COOPERATIVITIES:
            for orient, topo in family.items():
                out[f"ratio_{orient}_co{co:g}"] = _ratio_panel(topo, co, steps)
    elif fid == "F6":
        out["traditional_i_snr"] = _traditional_snr("i")
    elif fid == "F8":
        out["traditional_ii_snr"] = _traditional_snr("ii")
    elif fid == "F7":
        out["compare_traditional_i"] = compare_table("i")
    elif fid == "F9":
        out["compare_traditional_ii"] = compare_table("ii")
    return out
