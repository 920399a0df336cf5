"""Correlation spreading in disordered transverse-field Ising and hopping chains."""

__version__ = "0.1.0"

from lrchain._backend import BACKEND
from lrchain.analysis import (
    extract_lightcone,
    fit_front_velocity,
    front_velocity,
    hss_fit,
    localization_length,
    quasiparticle_energy,
    stationarity_check,
)
from lrchain.disorder import DisorderModel, ensemble_average, tb_ensemble_average
from lrchain.opw import ChainSpec, CorrelationField, build_walk_matrix, correlation_field, pauli_string_labels
from lrchain.oracle import ExactOracle
from lrchain.tight_binding import TbChainSpec, TbPropagator, tb_fields

__all__ = [
    "BACKEND",
    "ChainSpec",
    "CorrelationField",
    "DisorderModel",
    "ExactOracle",
    "TbChainSpec",
    "TbPropagator",
    "build_walk_matrix",
    "correlation_field",
    "ensemble_average",
    "extract_lightcone",
    "fit_front_velocity",
    "front_velocity",
    "hss_fit",
    "localization_length",
    "pauli_string_labels",
    "quasiparticle_energy",
    "stationarity_check",
    "tb_ensemble_average",
    "tb_fields",
]
