"""Finite probabilistic and quantum sequential machines, paired into
Bell-test arrangements, with exact CHSH evaluation, Monte Carlo runs, and a
plain-text machine format."""

from .belltest import (
    ALGEBRAIC_BOUND,
    CLASSICAL_BOUND,
    CHSH_TOL,
    TSIRELSON_BOUND,
    BellFpsm,
    BellFqsm,
    BellInputs,
    BellStats,
    ChshReport,
    InternalContradictionError,
    as_machine_under_test,
    classify_chsh,
    corner_oracle,
    default_inputs,
    empirical_chsh,
    exact_chsh,
    exact_chsh_via_locals,
    exact_conditional_expectation,
    exact_q,
    max_factorization_residual,
    random_variable_oracle,
    run_protocol,
    theorem_witness,
)
from .compose import (
    CompoundFpsm,
    CompoundFqsm,
    EntangledAmplitude,
    HalfFpsm,
    HalfFqsm,
    JointInit,
    ProductAmplitude,
    ProductInit,
    check_remote_independence,
    compose_fpsm,
    compose_fqsm,
    is_product_init,
)
from .core import (
    Alphabet,
    BellsimError,
    Distribution,
    NORM_TOL,
    RngStream,
    substream,
)
from .fpsm import Dsm, Fpsm, from_dsm, is_deterministic, step, to_dsm, validate_fpsm
from .fqsm import Fqsm, outcome_probability, step_q, validate_fqsm
from .mdf import MdfDocument, parse, parse_init_fragment, serialize
from . import zoo

__version__ = "0.1.0"

__all__ = [
    "ALGEBRAIC_BOUND",
    "CLASSICAL_BOUND",
    "CHSH_TOL",
    "NORM_TOL",
    "TSIRELSON_BOUND",
    "Alphabet",
    "BellFpsm",
    "BellFqsm",
    "BellInputs",
    "BellStats",
    "BellsimError",
    "ChshReport",
    "CompoundFpsm",
    "CompoundFqsm",
    "Distribution",
    "Dsm",
    "EntangledAmplitude",
    "Fpsm",
    "Fqsm",
    "HalfFpsm",
    "HalfFqsm",
    "InternalContradictionError",
    "JointInit",
    "MdfDocument",
    "ProductAmplitude",
    "ProductInit",
    "RngStream",
    "as_machine_under_test",
    "check_remote_independence",
    "classify_chsh",
    "compose_fpsm",
    "compose_fqsm",
    "corner_oracle",
    "default_inputs",
    "empirical_chsh",
    "exact_chsh",
    "exact_chsh_via_locals",
    "exact_conditional_expectation",
    "exact_q",
    "from_dsm",
    "is_deterministic",
    "is_product_init",
    "max_factorization_residual",
    "outcome_probability",
    "parse",
    "parse_init_fragment",
    "random_variable_oracle",
    "run_protocol",
    "serialize",
    "step",
    "step_q",
    "substream",
    "theorem_witness",
    "to_dsm",
    "validate_fpsm",
    "validate_fqsm",
    "zoo",
    "__version__",
]
