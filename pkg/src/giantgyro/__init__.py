"""Giant-cavity quantum gyroscope: topology-dependent nonreciprocity and sensing."""

from .topology import (
    Kind,
    Orientation,
    PointLayout,
    Topology,
    TopologyError,
    coupling_matrix_bruteforce,
    coupling_matrix_closed,
    gamma_sum,
    layout,
    waveguide_vector,
)
from .linear_response import (
    DegenerateEliminationError,
    ResponseError,
    ResponseSet,
    SingularResponseError,
    SystemParams,
    UndefinedSigmaError,
    nonreciprocal_strength,
    response,
    susceptibilities,
    transfer_elements_explicit,
)
from .dynamics import DdeConfig, Trajectory, integrate, steady_state
from .sensing import (
    ClosedFormUnavailable,
    DriveConfig,
    SensingReport,
    report,
    sensitivity_closed,
    sensitivity_numeric,
    snr_closed,
)
from .analysis import CurveData, ReciprocalPoints, SweepSpec, figure_data, reciprocal_points, sweep

__version__ = "0.1.0"
