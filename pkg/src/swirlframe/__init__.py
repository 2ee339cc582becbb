"""Lagrangian diagnostics for pulsatile axisymmetric flow: fields, trajectories,
streamline maps, Frenet frames and moving-frame pressure identities."""

from __future__ import annotations

from .atlas import (
    StreamlineMap,
    annulus_flux,
    build_streamline_map,
    flux_conservation,
    inflow_propagation,
    invert_radial_map,
    laminar_rate_t,
    laminar_rate_x,
    reconstruct_velocity,
    swirl_transport,
    trace_streamline,
)
from .errors import (
    AmbiguityError,
    ConfigError,
    DomainError,
    FrameUndefinedError,
    NumericError,
    RangeError,
    StagnationError,
    StructuralError,
    SwirlframeError,
    UncertifiedFieldError,
    UnilateralViolation,
)
from .fields import (
    AxisymmetricField,
    InflowProfile,
    divergence,
    eval_field,
    material_acceleration,
    nozzle_field,
    poiseuille_field,
    pressure_gradient_certify,
    rigid_rotation_axial_field,
    rigid_swirl_pulsatile_field,
    stream_function_field,
    swirl_nozzle_field,
    uniform_field,
    womersley_number,
)
from .frenet import FrenetSample, frenet_apparatus, moving_frame_matrices, normal_coordinates
from .identities import (
    IdentityReport,
    ScanParams,
    check_pressure_identities,
    instability_scan,
    key_inequalities,
    rotation_balance,
)
from .trajectory import (
    ArcLengthTrajectory,
    Trajectory,
    axis_length_view,
    integrate_trajectory,
    reparametrize_arclength,
)
from .womersley import WomersleyParams, womersley_field

__version__ = "0.1.0"
