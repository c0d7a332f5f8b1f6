"""Pydantic models for nets, scheme payloads and analysis results."""

from .cpn import CpnEvent, CpnModel, CpnRunResult, MonitorStats, TimedToken
from .incidence import IncidenceMatrices
from .net import Arc, ModelId, Net, NetDefinition, PetriStructure, Place, Rule, TokenType, Transition
from .scheme import (
    BatchItem,
    BatchResult,
    BenchmarkReport,
    CloneReport,
    ContextInfo,
    DomainParams,
    KeyPair,
    LbsStore,
    LocationProof,
    Point,
    PointPlacement,
    ProofRequest,
    Signature,
    VerifyOutcome,
)
from .sim import ExplorationResult, PlaceSummary, SimConfig, SimReport, TraceResult
from .smt import Declaration, SmtScript, SolverVerdict, VerdictRow

__all__ = [
    "Arc",
    "BatchItem",
    "BatchResult",
    "BenchmarkReport",
    "CloneReport",
    "ContextInfo",
    "CpnEvent",
    "CpnModel",
    "CpnRunResult",
    "Declaration",
    "DomainParams",
    "ExplorationResult",
    "IncidenceMatrices",
    "KeyPair",
    "LbsStore",
    "LocationProof",
    "ModelId",
    "MonitorStats",
    "Net",
    "NetDefinition",
    "PetriStructure",
    "Place",
    "PlaceSummary",
    "Point",
    "PointPlacement",
    "ProofRequest",
    "Rule",
    "Signature",
    "SimConfig",
    "SimReport",
    "SmtScript",
    "SolverVerdict",
    "TimedToken",
    "TokenType",
    "TraceResult",
    "Transition",
    "VerdictRow",
    "VerifyOutcome",
]
