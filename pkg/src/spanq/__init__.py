"""Exact simulation of span program quantum query algorithms.

Function evaluation doubles the witness-size guess ``alpha`` and decides with
Phase Checking; state conversion probes with amplitude estimation before a
single Phase Reflection. All phase-estimation statistics are computed in the
eigenbasis of the walk operator.
"""
from .catalog import GRAPHS, GraphSpec, build_and, build_or, build_stconn, catalog_program, effective_resistance
from .func_eval import EvalConfig, EvalResult, check_phase_bound, evaluate
from .kernels import BACKEND
from .linalg import InvalidInputError, Tolerance, UnitaryEigensystem, eig_unitary
from .qpe import QpeConfig, QueryLedger, checking_probability, plan_qpe, reflection_distance
from .span_program import (
    SpanProgram,
    Witness,
    algorithm_unitary,
    max_witness_size,
    negate,
    negative_witness,
    positive_witness,
    scale_normalize,
    witness,
)
from .state_conversion import (
    ConvertingVectorSet,
    GramPair,
    complement,
    conversion_bounds,
    conversion_unitary,
    convert,
    cvs_from_span_program,
    mu_nu,
    normalize_cvs,
    validate_cvs,
)

__version__ = "0.1.0"
