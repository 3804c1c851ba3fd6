"""Grover adaptive search maximum-likelihood decoding of polar codes."""

from .errors import (
    ConfigurationError,
    GasPolarError,
    InvalidInput,
    InvalidParameter,
    RegisterOverflow,
    ResourceLimit,
)
from .polar import (
    PolarCode,
    cnot_schedule,
    enumerate_valid_codewords,
    generator_matrix,
    polar_encode,
    polar_invert,
)
from .modem import (
    ChannelModel,
    ModulationScheme,
    awgn_transmit,
    binary_to_gray,
    gray_pam_map,
    gray_to_binary,
    natural_pam_map,
    scaling_factor,
)
from .objective import (
    MultilinearPolynomial,
    ValueRegisterSpec,
    bpsk_full_objective,
    bpsk_simplified_objective,
    gray_hubo_objective,
    kasi_qubo,
    natural_qubo_objective,
    value_register_spec,
)
from .instance import ProblemInstance
from .baselines import kasi_bruteforce_min, ml_decode_bruteforce, search_space_report
from .gas import GasConfig, gas_decode

__version__ = "0.1.0"
