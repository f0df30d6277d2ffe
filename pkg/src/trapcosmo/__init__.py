"""Detector-picture simulation of quantum fields in FLRW spacetimes with a trapped-ion chain.

The ion chain stays static; expansion of the simulated universe is encoded in
the laser that couples one ion's electronic levels to the chain's phonons.
"""

__version__ = "0.1.0"

from .cosmo import (  # noqa: E402
    ConformalMap,
    ScaleFactorModel,
    WindowSpec,
    build_conformal_map,
    detuning_schedule,
    lamb_dicke_drift,
    laser_frequency_schedule,
    window_transform,
)
from .detector import (  # noqa: E402
    DetectorSpec,
    ResponseResult,
    gibbons_hawking_temperature,
    ratio_signature,
    response_desitter_finite,
    response_desitter_infinite,
    response_numeric,
    thermal_integral,
)
from .ionchain import (  # noqa: E402
    IonChainConfig,
    NormalModes,
    coupling_matrix,
    equilibrium_positions,
    lamb_dicke,
    normal_modes,
    two_point_function,
)
from .specfun import gamma, regularized_q, upper_incomplete_gamma  # noqa: E402
