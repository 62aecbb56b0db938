"""Coupling-point topologies and the waveguide-mediated coupling matrix A_g.

Positions live on an integer lattice in units of the nearest-neighbour delay
tau, and ``phi`` is the propagation phase accumulated per lattice step.  Two
independent routes to A_g are provided: a brute-force double sum over point
pairs and the closed forms (finite sums near the removable singularities,
geometric-series forms elsewhere).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from math import ceil, floor
from typing import Optional

import numpy as np


class Kind(str, enum.Enum):
    SEPARATED = "separated"
    NESTED = "nested"
    BRAIDED = "braided"
    COINCIDENT = "coincident"
    # Direct (non-waveguide) exchange coupling between the two modes; the
    # traditional single-point baseline with a beam-splitter coupling.
    DIRECT = "direct"


class Orientation(str, enum.Enum):
    I = "i"
    II = "ii"


class TopologyError(ValueError):
    """Raised when a topology violates one of its structural constraints."""


# Switch to the finite-sum branch when |1 - e^{i phi}| (or |1 - e^{2i phi}|)
# drops below this value.  The geometric forms lose roughly eps/delta^2 of
# accuracy near their removable singularities, so the cut sits well away.
SINGULAR_THRESHOLD = 1e-2


@dataclass(frozen=True)
class Topology:
    """Arrangement of the coupling points of mode a (N points) and b_x (M)."""

    kind: Kind
    orientation: Orientation = Orientation.I
    N: int = 1
    M: int = 1
    nest_index: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "orientation", Orientation(self.orientation))
        self.validate()

    def validate(self) -> None:
        N, M = self.N, self.M
        if int(N) != N or int(M) != M or N < 1 or M < 1:
            raise TopologyError(f"N and M must be positive integers (got N={N}, M={M})")
        if self.kind in (Kind.COINCIDENT, Kind.DIRECT):
            if N != 1 or M != 1:
                raise TopologyError(f"{self.kind.value} topology forces N = M = 1")
            return
        if self.kind is Kind.NESTED:
            upper = N - 1 if self.orientation is Orientation.I else M - 1
            label = "N-1" if self.orientation is Orientation.I else "M-1"
            n = self.nest_index
            if n is None or not 1 <= n <= upper:
                raise TopologyError(
                    f"nested({self.orientation.value}) needs 1 <= nest_index <= {label} = {upper}, got {n}"
                )
        elif self.nest_index is not None:
            raise TopologyError("nest_index is only meaningful for nested topologies")
        if self.kind is Kind.BRAIDED:
            if self.orientation is Orientation.I:
                if M < N:
                    raise TopologyError("braided(i) requires M >= N")
                if M > N and N < 2:
                    raise TopologyError("general braided(i) requires N >= 2")
            else:
                if N < M:
                    raise TopologyError("braided(ii) requires N >= M")
                if N > M and M < 2:
                    raise TopologyError("general braided(ii) requires M >= 2")

    @property
    def is_strict_braided(self) -> bool:
        return self.kind is Kind.BRAIDED and self.N == self.M

    @property
    def label(self) -> str:
        if self.kind in (Kind.COINCIDENT, Kind.DIRECT):
            return self.kind.value
        return f"{self.kind.value}-{self.orientation.value}"

    def to_record(self) -> dict:
        return {
            "kind": self.kind.value,
            "orientation": self.orientation.value,
            "N": int(self.N),
            "M": int(self.M),
            "nest_index": self.nest_index,
        }

    @classmethod
    def from_record(cls, record: dict) -> "Topology":
        return cls(
            kind=Kind(record["kind"]),
            orientation=Orientation(record.get("orientation", "i")),
            N=int(record.get("N", 1)),
            M=int(record.get("M", 1)),
            nest_index=record.get("nest_index"),
        )

    @classmethod
    def from_label(cls, label: str, N: int = 1, M: int = 1, nest_index=None) -> "Topology":
        """Build from a CLI-style label such as ``braided-i`` or ``coincident``."""
        label = label.lower()
        if label in ("coincident", "direct"):
            return cls(Kind(label))
        kind, _, orient = label.rpartition("-")
        return cls(Kind(kind), Orientation(orient), N, M, nest_index)


@dataclass(frozen=True)
class PointLayout:
    a_positions: tuple
    b_positions: tuple

    def __post_init__(self):
        for name in ("a_positions", "b_positions"):
            pos = tuple(int(p) for p in getattr(self, name))
            object.__setattr__(self, name, pos)
            if any(p < 0 for p in pos) or any(q <= p for p, q in zip(pos, pos[1:])):
                raise TopologyError(f"{name} must be nonnegative and strictly increasing")


def layout(topology: Topology) -> PointLayout:
    """Canonical integer-lattice positions for the coupling points."""
    t = topology
    N, M = t.N, t.M
    first = t.orientation is Orientation.I
    if t.kind is Kind.DIRECT:
        raise TopologyError("direct coupling has no waveguide coupling points")
    if t.kind is Kind.COINCIDENT:
        return PointLayout((0,), (0,))
    if t.kind is Kind.SEPARATED:
        if first:
            return PointLayout(range(N), range(N, N + M))
        return PointLayout(range(M, M + N), range(M))
    if t.kind is Kind.NESTED:
        n = t.nest_index
        if first:
            a = list(range(n)) + list(range(n + M, N + M))
            return PointLayout(a, range(n, n + M))
        b = list(range(n)) + list(range(n + N, N + M))
        return PointLayout(range(n, n + N), b)
    # braided
    if first:
        a = range(0, 2 * N, 2)
        b = list(range(1, 2 * N, 2)) + list(range(2 * N, N + M))
        return PointLayout(a, b)
    b = range(0, 2 * M, 2)
    a = list(range(1, 2 * M, 2)) + list(range(2 * M, N + M))
    return PointLayout(a, b)


def _theta(d):
    return np.where(d > 0, 1.0, np.where(d == 0, 0.5, 0.0))


def gamma_sum(h_positions, s_positions, phi, gamma=1.0):
    """-gamma * sum_ij Theta(h_i - s_j) exp(i phi (h_i - s_j)) with Theta(0) = 1/2.

    ``phi`` may be a scalar or an array; the result has the shape of ``phi``.
    """
    h = np.asarray(h_positions, dtype=float).reshape(-1, 1)
    s = np.asarray(s_positions, dtype=float).reshape(1, -1)
    d = (h - s).ravel()
    weights = _theta(d)
    keep = weights > 0
    d, weights = d[keep], weights[keep]
    phi_arr = np.asarray(phi, dtype=float)
    terms = weights * np.exp(1j * phi_arr[..., None] * d)
    return -gamma * terms.sum(axis=-1)


def _direct_block(phi, gamma):
    phi_arr = np.asarray(phi, dtype=float)
    out = np.zeros(phi_arr.shape + (2, 2), dtype=complex)
    out[..., 0, 1] = gamma
    out[..., 1, 0] = -gamma
    return out


def coupling_matrix_bruteforce(topology: Topology, phi, gamma=1.0):
    """A_g by direct enumeration of all point pairs.

    Returns a (2, 2) matrix for scalar ``phi`` or an array of shape
    ``phi.shape + (2, 2)``.
    """
    if topology.kind is Kind.DIRECT:
        return _direct_block(phi, gamma)
    lay = layout(topology)
    a, b = lay.a_positions, lay.b_positions
    entries = [
        [gamma_sum(a, a, phi, gamma), gamma_sum(a, b, phi, gamma)],
        [gamma_sum(b, a, phi, gamma), gamma_sum(b, b, phi, gamma)],
    ]
    return np.moveaxis(np.array(entries), (0, 1), (-2, -1))


def waveguide_vector(topology: Topology, phi, gamma=1.0):
    """v = sqrt(gamma) (sum_n e^{i phi a_n}, sum_m e^{i phi b_m}); zero for direct coupling."""
    phi_arr = np.asarray(phi, dtype=float)
    if topology.kind is Kind.DIRECT:
        return np.zeros(phi_arr.shape + (2,), dtype=complex)
    lay = layout(topology)
    root = np.sqrt(gamma)
    va = np.exp(1j * phi_arr[..., None] * np.asarray(lay.a_positions)).sum(axis=-1)
    vb = np.exp(1j * phi_arr[..., None] * np.asarray(lay.b_positions)).sum(axis=-1)
    return root * np.stack([va, vb], axis=-1)


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def _E(k, z):
    return z ** k


def _S(lo, hi, f, like):
    total = np.zeros_like(like, dtype=complex)
    for s in range(lo, hi + 1):
        total = total + f(s)
    return total


def _ramp(L, z, step=1):
    """sum_{s=1}^{L} (L - s) z^{step*s}."""
    return _S(1, L, lambda s: (L - s) * z ** (step * s), z)


def _ramp_geo(L, w):
    return w * (L * (1 - w) - (1 - w ** L)) / (1 - w) ** 2


def _block_sum(count, width, z, shift=0, step=1, offset=0):
    """sum_{k=1}^{count} sum_{s=k}^{k+width-1} z^{step*s + offset + shift}."""
    return _S(1, count, lambda k: _S(k, k + width - 1, lambda s: z ** (step * s + offset + shift), z), z)


def _separated_summed(z, N, M, first):
    d1 = N / 2 + _ramp(N, z)
    d2 = M / 2 + _ramp(M, z)
    if first:
        x = _block_sum(M, N, z)
        return d1, 0 * z, x, d2
    x = _block_sum(N, M, z)
    return d1, x, 0 * z, d2


def _separated_geo(z, N, M, first):
    d = (1 - z) ** 2
    d1 = N / 2 + _ramp_geo(N, z)
    d2 = M / 2 + _ramp_geo(M, z)
    x = z * (1 - z ** M) * (1 - z ** N) / d
    if first:
        return d1, 0 * z, x, d2
    return d1, x, 0 * z, d2


def _nested_summed(z, N, M, n, first):
    if first:
        e1 = _ramp(n, z) + _ramp(N - n, z) + _block_sum(N - n, n, z, shift=M)
        return (N / 2 + e1, _block_sum(N - n, M, z), _block_sum(M, n, z), M / 2 + _ramp(M, z))
    m = n
    e2 = _ramp(m, z) + _ramp(M - m, z) + _block_sum(M - m, m, z, shift=N)
    return (N / 2 + _ramp(N, z), _block_sum(N, m, z), _block_sum(M - m, N, z), M / 2 + e2)


def _nested_geo(z, N, M, n, first):
    d = (1 - z) ** 2
    if first:
        d1 = N / 2 + z * (N * (1 - z) - (1 - z ** n) + (z ** M * (1 - z ** n) - 1) * (1 - z ** (N - n))) / d
        a12 = z * (1 - z ** (N - n)) * (1 - z ** M) / d
        a21 = z * (1 - z ** n) * (1 - z ** M) / d
        return d1, a12, a21, M / 2 + _ramp_geo(M, z)
    m = n
    d2 = M / 2 + z * (M * (1 - z) - (1 - z ** m) + (z ** N * (1 - z ** m) - 1) * (1 - z ** (M - m))) / d
    a12 = z * (1 - z ** N) * (1 - z ** m) / d
    a21 = z * (1 - z ** N) * (1 - z ** (M - m)) / d
    return N / 2 + _ramp_geo(N, z), a12, a21, d2


def _strict_summed(z, N, first):
    diag = N / 2 + _ramp(N, z, step=2)
    short = _S(1, N - 1, lambda s: (N - s) * z ** (2 * s - 1), z)
    long_ = _S(1, N, lambda s: (N + 1 - s) * z ** (2 * s - 1), z)
    if first:
        return diag, short, long_, diag
    return diag, long_, short, diag


def _strict_geo(z, N, first):
    w = z * z
    d = (1 - w) ** 2
    diag = N / 2 + _ramp_geo(N, w)
    short = z * ((N - 1) * (1 - w) - w * (1 - w ** (N - 1))) / d
    long_ = z * (N * (1 - w) - w * (1 - w ** N)) / d
    if first:
        return diag, short, long_, diag
    return diag, long_, short, diag


def _general_summed(z, N, M, first):
    """General braided: strict core of the smaller count plus leftover terms."""
    if first:
        P, Q = N, M
    else:
        P, Q = M, N
    L = Q - P
    core_small = P / 2 + _ramp(P, z, step=2)
    short = _S(1, P - 1, lambda s: (P - s) * z ** (2 * s - 1), z)
    long_ = _S(1, P, lambda s: (P + 1 - s) * z ** (2 * s - 1), z)
    # leftover points of the larger mode seen by the smaller mode
    cross = _block_sum(ceil(L / 2), P, z, step=2) + _block_sum(floor(L / 2), P, z, step=2, offset=1)
    big = (
        Q / 2
        + _ramp(P, z, step=2)
        + _ramp(L, z)
        + _block_sum(floor(L / 2), P, z, step=2)
        + _block_sum(ceil(L / 2), P, z, step=2, offset=-1)
    )
    if first:
        return core_small, short, long_ + cross, big
    return big, long_ + cross, short, core_small


def _general_geo(z, N, M, first):
    if first:
        P, Q = N, M
    else:
        P, Q = M, N
    L = Q - P
    w = z * z
    d = (1 - w) ** 2
    core_small = P / 2 + _ramp_geo(P, w)
    short = z * ((P - 1) * (1 - w) - w * (1 - w ** (P - 1))) / d
    long_cross = z * (P * (1 - w) + z * (1 - w ** P) * (1 - z ** L - z ** (L + 1))) / d
    big = (
        Q / 2
        + _ramp_geo(P, w)
        + _ramp_geo(L, z)
        + z * (1 - z ** L) * (1 - w ** P) / ((1 - z) * (1 - w))
    )
    if first:
        return core_small, short, long_cross, big
    return big, long_cross, short, core_small


def coupling_matrix_closed(topology: Topology, phi, gamma=1.0):
    """A_g from the closed-form expressions.

    Near phi values where the geometric-series denominators vanish the
    finite-sum branch is used; both branches are exact in exact arithmetic.
    """
    t = topology
    if t.kind in (Kind.COINCIDENT, Kind.DIRECT):
        return coupling_matrix_bruteforce(t, phi, gamma)
    phi_arr = np.asarray(phi, dtype=float)
    z = np.exp(1j * phi_arr)
    first = t.orientation is Orientation.I
    N, M = t.N, t.M
    if t.kind is Kind.SEPARATED:
        summed = _separated_summed(z, N, M, first)
        geo_fn, near = (lambda zz: _separated_geo(zz, N, M, first)), np.abs(1 - z)
    elif t.kind is Kind.NESTED:
        summed = _nested_summed(z, N, M, t.nest_index, first)
        geo_fn, near = (lambda zz: _nested_geo(zz, N, M, t.nest_index, first)), np.abs(1 - z)
    elif N == M:
        summed = _strict_summed(z, N, first)
        geo_fn, near = (lambda zz: _strict_geo(zz, N, first)), np.abs(1 - z * z)
    else:
        summed = _general_summed(z, N, M, first)
        geo_fn, near = (lambda zz: _general_geo(zz, N, M, first)), np.abs(1 - z * z)
    use_sum = near < SINGULAR_THRESHOLD
    # evaluate the geometric branch only where it is well conditioned
    z_safe = np.where(use_sum, np.exp(1j * 1.0), z)
    geo = geo_fn(z_safe)
    entries = [np.where(use_sum, s, g) for s, g in zip(summed, geo)]
    out = -gamma * np.stack(
        [np.stack(entries[:2], axis=-1), np.stack(entries[2:], axis=-1)], axis=-2
    )
    return out
