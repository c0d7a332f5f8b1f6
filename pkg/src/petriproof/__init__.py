"""Petri-net models, simulation and SMT checks for ECDSA* and location proofs."""

from .catalog import catalog, fuse_nets, instantiate, parse_model_id
from .client import PetriProof
from .constants import CurveConstants, curve_constants
from .defaults import RUN_DEFAULTS

__version__ = "0.1.0"
__all__ = [
    "PetriProof",
    "CurveConstants",
    "curve_constants",
    "RUN_DEFAULTS",
    "catalog",
    "fuse_nets",
    "instantiate",
    "parse_model_id",
]
