"""
Configuration settings for the elastica knot library.
"""

from pydantic import Field
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Numerical settings. Every field can be overridden with an ELASTICA_* variable."""

    # Parallelism
    threads: int = Field(4, ge=1, description="Worker cap for sweeps (ELASTICA_THREADS)")

    # Elliptic kernel
    pole_tolerance: float = Field(1e-8, gt=0)
    degenerate_tolerance: float = Field(1e-12, gt=0)
    theta_terms: int = Field(12, ge=4)  # nome is at most exp(-pi) after rotation
    strip_tolerance: float = Field(1e-9, gt=0)

    # Root solving and gates
    root_tolerance: float = Field(1e-12, gt=0)
    equivalence_tolerance: float = Field(1e-8, gt=0)
    closure_tolerance: float = Field(1e-6, gt=0)  # relative to R
    q0_closure_tolerance: float = Field(1e-9, gt=0)
    scan_points: int = Field(200, ge=8)

    # Sampling and derivative checks
    samples_per_period: int = Field(512, ge=16)
    fd_divisions: int = Field(4096, ge=64)
    quadrature_nodes: int = Field(64, ge=8)
    theta_refine_depth: int = Field(14, ge=1)

    # Units
    k0: float = Field(1.0, gt=0)

    class Config:
        env_prefix = "ELASTICA_"


settings = Settings()
