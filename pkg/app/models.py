"""
Data models for the elastica knot library.
"""

import math
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field

Vector3 = tuple[float, float, float]


class Strip(str, Enum):
    """Lines of the fundamental cell on which the Weierstrass function is real."""

    REAL_AXIS = "real_axis"  # (0, w1]: values >= e1
    OMEGA1 = "omega1"  # w1 + iy: values in [e2, e1]
    OMEGA3 = "omega3"  # x + w3: values in [e3, e2]
    IMAG_AXIS = "imag_axis"  # iy: values <= e3


class Branch(str, Enum):
    """Branches of the closed-knot chart."""

    CLASSICAL = "classical"  # 0 < m <= m0-, lambda < lambda_delta
    EXTENDED = "extended"  # m0+ < m < 0, lambda > lambda_delta


class CurvatureForm(str, Enum):
    WEIERSTRASS_LS = "weierstrass_ls"
    JACOBI_UNIFIED = "jacobi_unified"
    WEIERSTRASS_TWO_PARAM = "weierstrass_two_param"


class Chart(str, Enum):
    """Table a sweep produces."""

    MODULUS = "modulus"  # closed-knot quantities against m, q0 = Q0(m)
    ROOTS = "roots"  # normalized cubic roots against lambda at fixed nu
    LINES = "lines"  # (nu^2, lambda) along m at fixed q0


class EllipticContext(BaseModel):
    """Cubic roots, invariants, moduli and half-periods of a real-root lattice.

    omega1 is math.inf (and omega2, eta1, eta2 are None) when e1 = e2.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    e1: float
    e2: float
    e3: float
    g2: float
    g3: float
    delta: float = Field(..., ge=0.0, description="Modular discriminant g2^3 - 27 g3^2")
    p: float = Field(..., ge=0.0, le=1.0, description="Jacobi modulus (e2 - e3)/(e1 - e3)")
    p_prime: float = Field(..., ge=0.0, le=1.0)
    omega1: float = Field(..., description="Real half-period")
    omega3_abs: float = Field(..., description="omega3 = i * omega3_abs")
    omega2: complex | None = None
    eta1: complex | None = None
    eta2: complex | None = None
    eta3: complex
    g3_sign: int = Field(..., description="Sign of g3, the +/- attached to omega3")

    @property
    def omega3(self) -> complex:
        return complex(0.0, self.omega3_abs)

    @property
    def roots(self) -> tuple[float, float, float]:
        return (self.e1, self.e2, self.e3)

    @property
    def degenerate(self) -> bool:
        """True when e1 = e2 and the real period is infinite."""
        return math.isinf(self.omega1)


class CurvatureParams(BaseModel):
    """Physical curvature parameters (lambda, nu) and the initial curvature k0."""

    model_config = ConfigDict(frozen=True)

    lam: float = Field(..., description="Integration constant lambda")
    nu: float = Field(..., description="Torsion parameter nu = 2 tau0 / k0")
    k0: float = Field(1.0, gt=0.0, description="Initial curvature kappa(0)")

    @property
    def lambda_delta(self) -> float:
        return 1.0 - 0.5 * self.nu**2

    @property
    def delta(self) -> float:
        return math.sqrt((1.0 - 2.0 * self.lam) ** 2 + 4.0 * self.nu**2)

    @property
    def classical(self) -> bool:
        """lambda <= lambda_delta; the tie goes to the classical branch."""
        return self.lam <= self.lambda_delta


class LangerSingerParams(BaseModel):
    """Langer-Singer chart (m, q0) with m <= q0 <= 1."""

    model_config = ConfigDict(frozen=True)

    m: float
    q0: float = Field(..., gt=0.0, le=1.0)


class CurvatureSolution(BaseModel):
    """Squared-curvature solution on the Langer-Singer chart."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    params: LangerSingerParams
    k0: float = Field(1.0, gt=0.0)
    ctx: EllipticContext | None = Field(None, description="None only at the degenerate m = 0")
    period_S: float = Field(..., gt=0.0, description="Arclength period 4 sqrt(q0) |omega3| / k0")
    form: CurvatureForm = CurvatureForm.JACOBI_UNIFIED
    lam: float
    nu: float

    @property
    def m(self) -> float:
        return self.params.m

    @property
    def q0(self) -> float:
        return self.params.q0

    @property
    def tau0(self) -> float:
        return 0.5 * self.nu * self.k0

    @property
    def lambda_delta(self) -> float:
        return 1.0 - 0.5 * self.nu**2

    @property
    def classical(self) -> bool:
        return self.params.m >= 0.0


class OdeResiduals(BaseModel):
    """Residuals of the curvature equations on a sample grid."""

    kappa_pp: float = Field(..., description="Max relative residual of the second-order equation")
    kappa_prime2: float = Field(..., description="Max residual of the squared-curvature equation")
    kappa_pp_at_zero: float
    expected_sign: int = Field(..., description="sign(lambda - lambda_delta)")

    @property
    def sign_matches(self) -> bool:
        value = self.kappa_pp_at_zero
        observed = 0 if abs(value) < 1e-8 else int(math.copysign(1, value))
        return observed == self.expected_sign


class FrameCoeffs(BaseModel):
    """Components of z-hat on the Frenet triad, with the scales R and mu."""

    alpha: float
    beta: float
    gamma: float
    R: float
    mu: float


class OmegaParam(BaseModel):
    """Omega with wp(Omega + omega3) = q0 (mu^2 - 2 lambda / 3)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    Omega: float = Field(..., ge=0.0)
    v: complex = Field(..., description="Signed Omega + omega3 used by the azimuth integral")
    orientation: int = Field(1, description="+1 when wp'(Omega + omega3) has the expected sign")
    identity_residual: float = 0.0


class CurveSample(BaseModel):
    """One arclength sample of a reconstructed knot."""

    s: float
    kappa: float
    tau: float
    rho: float
    theta: float
    z: float
    position: Vector3
    t_hat: Vector3
    n_hat: Vector3
    b_hat: Vector3
    theta_darboux: float


class DarbouxQuantities(BaseModel):
    Theta: float
    kappa_g: float
    kappa_n: float
    tau_r: float
    kappa_g_closed_form: float


class FunctionalSet(BaseModel):
    """Curvature functional, averaged torsion and total torsion at one modulus."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    F_hat: float = Field(..., description="Normalized curvature functional")
    tau_avg: float = Field(..., description="Normalized averaged torsion")
    T_total: float = Field(..., description="Total torsion in units of full turns")
    psi: complex = Field(..., description="wp(psi) = e_a - q0")
    kappa_hat2: float
    imag_residue: float = 0.0


class KnotSolution(BaseModel):
    """A solution on the closed-knot chart, optionally sampled."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    m: float
    q0: float
    k0: float = 1.0
    lam: float
    nu: float
    branch: Branch
    p_int: int | None = None
    q_int: int | None = None
    ell: int | None = None
    functionals: FunctionalSet
    R_hat: float
    R: float
    delta_theta: float
    period_S: float
    samples: list[CurveSample] = Field(default_factory=list)
    closure_error: float | None = Field(None, description="|r(l S) - r(0)| / R")
    closed: bool = Field(True, description="False for open curves with q0 != Q0(m)")
    vertical_drift: float = Field(0.0, description="Height gained per curvature period")


class EquivalenceReport(BaseModel):
    """Per-functional gaps between the two members of a pair."""

    m_minus: float
    m_plus: float
    involution_gap: float
    gaps: dict[str, float]
    tolerance: float
    passed: bool

    @property
    def max_gap(self) -> float:
        return max(self.gaps.values())


class EquivalentPair(BaseModel):
    knot_minus: KnotSolution
    knot_plus: KnotSolution
    max_functional_gap: float


class SweepRow(BaseModel):
    """One grid point of a modulus sweep."""

    m: float
    Q0: float
    nu: float
    lam: float
    p: float
    omega1: float
    omega3_abs: float
    F_hat: float
    tau_avg: float
    T_total: float
    R_hat: float
    mu2: float
    Omega: float
    delta_theta: float


class RootRow(BaseModel):
    """Cubic roots e_k / q0 at one (lambda, nu), with the Jacobi modulus they select."""

    lam: float
    nu: float
    e1: float
    e2: float
    e3: float
    p: float
    lambda_delta: float


class ChartLineRow(BaseModel):
    """One point of the constant-q0 line lambda(nu^2), parametrized by m <= q0."""

    q0: float
    m: float
    nu2: float
    lam: float
    mu2: float


TableRow = SweepRow | RootRow | ChartLineRow


class RunConfig(BaseModel):
    """Command-line parameters after parsing."""

    command: str
    m: float | None = None
    q0: float | None = None
    k0: float = Field(1.0, gt=0.0)
    p: int | None = Field(None, ge=1)
    q: int | None = Field(None, ge=1)
    branch: Branch = Branch.CLASSICAL
    chart: Chart = Chart.MODULUS
    nu: float | None = Field(None, ge=0.0)
    lam_min: float | None = None
    lam_max: float | None = None
    target_f: float | None = None
    m_min: float | None = None
    m_max: float | None = None
    points: int = Field(101, ge=1)
    samples: int = Field(512, ge=16)
    tol_root: float = Field(1e-12, gt=0.0)
    tol_equiv: float = Field(1e-8, gt=0.0)
    closure: bool = True
    format: str = Field("csv", pattern="^(csv|json|obj)$")
    json_summary: bool = False
    out: str | None = None


class InvariantReport(BaseModel):
    """Largest deviations of a reconstructed curve from its analytic invariants."""

    unit_speed: float = Field(..., description="max ||r'| - 1|")
    orthonormality: float = Field(..., description="max |F F^T - I| over Frenet triads")
    z_constancy: float = Field(..., description="max |alpha t + beta n + gamma b - z_hat|")
    tangent: float = Field(..., description="max |r' - t_hat|")
    kappa_relative: float
    tau_relative: float

    def passed(self, tolerance: float = 1e-6, frame_tolerance: float = 1e-10) -> bool:
        return (
            self.unit_speed < tolerance
            and self.tangent < tolerance
            and self.orthonormality < frame_tolerance
            and self.z_constancy < 1e-8
            and self.kappa_relative < 1e-5
            and self.tau_relative < 1e-4
        )


class SweepResult(BaseModel):
    """Rows of a modulus sweep, in grid order."""

    rows: list[TableRow]
    failed: int = 0
    duration_seconds: float


class ConstantValue(BaseModel):
    """A derived constant and where it comes from."""

    name: str
    value: float
    provenance: str
