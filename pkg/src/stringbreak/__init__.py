"""String breaking in quantum Ising chains with static boundary charges."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    ChainSpec,
    DynamicalExternal,
    Exponential,
    FieldProfile,
    HamiltonianSpec,
    PowerLaw,
    ResourceError,
    SolverError,
    StaticExternal,
    StringBreakError,
    assemble_operator,
    coupling_strength,
    diagonal_energy,
    effective_field,
    field_profile,
    vacuum_field,
    zeta_fn,
)
