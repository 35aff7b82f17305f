"""Exact classical simulation of Deutsch-Jozsa applied to the guessing-secrets game."""

from .adversary import (
    Biased,
    FullStar,
    MajorityTable,
    Minority,
    OracleTable,
    RawTable,
    Subgroup,
    Triangle,
    compile_spec,
    enumerate_valid_tables,
    promise_holds,
    spec_from_json,
    spec_to_json,
)
from .census import census, p_k, reconstruct_coefficients, subgroup_success, symmetry_counts
from .engine import AmplitudeSpectrum, amplitudes, sample, success_probability, wht_reference
from .gf2 import BitVec, Subspace, dot, is_independent, orthocomplement, separating_question
from .recovery import build_graph, classify, reduce_graph, run_experiment, stopping_rule

__all__ = [
    "AmplitudeSpectrum",
    "Biased",
    "BitVec",
    "FullStar",
    "MajorityTable",
    "Minority",
    "OracleTable",
    "RawTable",
    "Subgroup",
    "Subspace",
    "Triangle",
    "amplitudes",
    "build_graph",
    "census",
    "classify",
    "compile_spec",
    "dot",
    "enumerate_valid_tables",
    "is_independent",
    "orthocomplement",
    "p_k",
    "promise_holds",
    "reconstruct_coefficients",
    "reduce_graph",
    "run_experiment",
    "sample",
    "separating_question",
    "spec_from_json",
    "spec_to_json",
    "stopping_rule",
    "subgroup_success",
    "success_probability",
    "symmetry_counts",
    "wht_reference",
]
