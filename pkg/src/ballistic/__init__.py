"""Three-speed ballistic annihilation: simulation, exact enumeration and bounds."""

from .model import (
    Configuration,
    ContractError,
    EndpointSemantics,
    InputError,
    Model,
    ModelParams,
    ParameterError,
    ResourceError,
    RngStream,
    Velocity,
    from_arrays,
    sample,
)

__version__ = "0.1.0"
