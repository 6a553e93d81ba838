"""Pydantic schemas for command requests and JSON reports"""
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, Field

SCHEMA_VERSION = "1.0"


# ============================================================================
# REPORT ENVELOPES
# ============================================================================

class Report(BaseModel):
    """Successful command output"""
    schema_version: str = Field(SCHEMA_VERSION, description="Bumped on any breaking change")
    command: str = Field(..., description="Command name")
    input: Dict[str, Any] = Field(..., description="Validated arguments echoed back")
    result: Dict[str, Any] = Field(..., description="Command payload")
    timing: Dict[str, float] = Field(default_factory=dict, description="Wall-clock seconds")
    seed: Optional[int] = Field(None, description="Seed used by randomized steps")


class ErrorReport(BaseModel):
    """Machine-readable error written to stderr"""
    schema_version: str = Field(SCHEMA_VERSION)
    command: Optional[str] = Field(None, description="Command that failed")
    error: Dict[str, Any] = Field(..., description="type, message, exit_code and extra fields")


# ============================================================================
# COMMAND REQUESTS
# ============================================================================

class ClassifyRequest(BaseModel):
    expr: str = Field(..., description="Polynomial expression, e.g. 'x1^3 + x2'")
    variables: Optional[List[str]] = Field(None, description="Variable order; inferred from expr when omitted")


class ConnectRequest(BaseModel):
    expr: str = Field(..., description="Polynomial expression")
    variables: Optional[List[str]] = Field(None, description="Variable order")
    target: Optional[List[List[str]]] = Field(
        None, description="Symmetric target Hessian as expression strings; zero when omitted"
    )
    seed: Optional[int] = Field(None, ge=0, description="Seed for sampled verification of floating connections")


class HolonomyRequest(BaseModel):
    connection: Optional[Dict[str, Any]] = Field(None, description="Serialized connection")
    expr: Optional[str] = Field(None, description="Build the connection from this polynomial instead")
    variables: Optional[List[str]] = Field(None, description="Variable order for expr")
    point: List[Union[str, int, float]] = Field(..., description="Evaluation point, rationals as 'p/q'")
    seed: Optional[int] = Field(None, ge=0, description="Seed for the non-degenerate search")


class GeodesicRequest(BaseModel):
    expr: str = Field(..., description="Function tested along geodesics")
    variables: Optional[List[str]] = Field(None, description="Variable order")
    connection: Optional[Dict[str, Any]] = Field(None, description="Serialized connection; zero when omitted")
    construct: bool = Field(False, description="Use the connection constructed for expr")
    x0: Optional[List[float]] = Field(None, description="Initial point; origin when omitted")
    v0: Optional[List[float]] = Field(None, description="Initial velocity; all ones when omitted")
    T: Optional[float] = Field(None, description="Horizon")
    steps: Optional[int] = Field(None, description="RK4 steps")
    tol: Optional[float] = Field(None, description="Relative convexity tolerance")
    checks: int = Field(0, ge=0, description="Number of extra seeded random geodesics")
    hessian_samples: int = Field(0, description="Number of sampled Hessian PSD checks")
    seed: Optional[int] = Field(None, ge=0, description="Seed for random geodesics and samples")


class DensityRequest(BaseModel):
    family: str = Field(..., description="univariate | quadratic | monomial | separable | psdball")
    n: int = Field(1, description="Number of variables")
    d: int = Field(2, description="Degree")
    r: float = Field(1.0, description="Coefficient radius")
    trials: Optional[int] = Field(None, description="Monte Carlo trials")
    seed: Optional[int] = Field(None, ge=0, description="Base seed")
    sweep: Optional[str] = Field(None, description="Parameter sweep such as 'd=3..63' or 'n=1,2,3'")
    workers: Optional[int] = Field(None, description="Worker processes")


# ============================================================================
# HEALTH CHECK
# ============================================================================

class HealthResponse(BaseModel):
    status: str
    version: str
    registered_commands: int
