"""Characteristic analysis of the 30-variable first-order system.

Assembles the principal matrices, evaluates the causality conditions and the
squared characteristic speeds (beta values), verifies the closed-form
determinant factorizations against brute-force determinants, and numerically
diagonalizes the symbol.  State-vector ordering (30 components):

    (energy_rate | energy_gradient(4) | acceleration(4) |
     velocity_gradient rows 0..3 (4x4) | eps | u(4))
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .eos import CoefficientSample
from .errors import (
    CoefficientError,
    DegenerateDirectionError,
    DegenerateStateError,
    NonCausalInputError,
    NormalizationError,
    SingularSampleError,
    PreconditionError,
)
from .kinematics import METRIC, lower

__all__ = [
    "STATE_DIM",
    "BetaSet",
    "CausalityReport",
    "PrincipalMatrix",
    "SecondOrderSymbol",
    "SpectrumReport",
    "betas",
    "max_squared_speed",
    "causality_report",
    "assemble_A",
    "contract_principal",
    "det_factorization_check",
    "characteristic_speeds",
    "eigenstructure",
    "assemble_m",
    "second_order_det_check",
    "rank_one_det_identity_check",
]

STATE_DIM = 30

# Column/row offsets of the state-vector blocks.
_OFF_ENERGY_RATE = 0
_OFF_ENERGY_GRAD = 1
_OFF_ACCEL = 5
_OFF_VGRAD = 9          # four 4-blocks, one per derivative row
_OFF_EPS = 25
_OFF_U = 26

# Multiplicities of the determinant factors, first- and second-order forms.
FIRST_ORDER_MULTIPLICITIES = {"beta1": 10, "beta2": 3, "beta_minus": 1, "beta_plus": 1}
SECOND_ORDER_MULTIPLICITIES = {"beta1": 1, "beta2": 2, "beta_minus": 1, "beta_plus": 1}


@dataclass(frozen=True)
class BetaSet:
    """Squared characteristic speeds {0, eta/lam, beta-, beta+}.

    When the discriminant is negative the pair beta+- is a complex-conjugate
    pair; ``pm_real`` is False and the values are None.
    """

    beta1: float
    beta2: float
    beta_minus: float | None
    beta_plus: float | None
    delta: float
    pm_real: bool

    def values(self):
        """Mapping of named beta values (real entries only)."""
        out = {"beta1": self.beta1, "beta2": self.beta2}
        if self.pm_real:
            out["beta_minus"] = self.beta_minus
            out["beta_plus"] = self.beta_plus
        return out


def _beta_terms(lam, chi1, chi2, chi3, chi4, eta, cs2):
    """Root discriminant and midpoint of the quadratic for beta+-.

    Works elementwise on arrays; shared by the scalar and grid paths.
    """
    delta = (
        9.0 * lam**2 * chi2**2 * cs2**2
        + 6.0 * lam * cs2 * (
            chi1 * (4.0 * eta - 3.0 * chi4) * (2.0 * lam + chi2)
            + 3.0 * chi2 * chi3 * (lam + chi2)
        )
        + (chi1 * (4.0 * eta - 3.0 * chi4) + 3.0 * chi3 * (lam + chi2)) ** 2
    )
    core = 3.0 * lam * chi2 * cs2 + chi1 * (4.0 * eta - 3.0 * chi4) + 3.0 * chi3 * (lam + chi2)
    return delta, core


def max_squared_speed(coeffs: CoefficientSample):
    """Largest squared characteristic speed, elementwise over array samples.

    Equals max(beta2, beta_plus); used for CFL bounds on grids.  Raises
    NonCausalInputError anywhere the root discriminant is negative.
    """
    delta, core = _beta_terms(coeffs.lam, coeffs.chi1, coeffs.chi2, coeffs.chi3,
                              coeffs.chi4, coeffs.eta, coeffs.cs2)
    if np.any(np.asarray(delta) < 0.0):
        raise NonCausalInputError("negative discriminant: beta+- are complex")
    beta_plus = (core + np.sqrt(delta)) / (6.0 * coeffs.lam * coeffs.chi1)
    return np.maximum(coeffs.eta / coeffs.lam, beta_plus)


def betas(coeffs: CoefficientSample) -> BetaSet:
    """Discriminant and squared speeds from the transport coefficients."""
    lam, chi1, chi2, chi3, chi4 = coeffs.lam, coeffs.chi1, coeffs.chi2, coeffs.chi3, coeffs.chi4
    eta, cs2 = coeffs.eta, coeffs.cs2
    if lam * chi1 == 0.0:
        raise CoefficientError("lam * chi1 must be nonzero")
    delta, core = _beta_terms(lam, chi1, chi2, chi3, chi4, eta, cs2)
    beta2 = eta / lam
    if delta < 0.0:
        return BetaSet(beta1=0.0, beta2=beta2, beta_minus=None, beta_plus=None,
                       delta=delta, pm_real=False)
    root = np.sqrt(delta)
    return BetaSet(
        beta1=0.0,
        beta2=beta2,
        beta_minus=(core - root) / (6.0 * lam * chi1),
        beta_plus=(core + root) / (6.0 * lam * chi1),
        delta=delta,
        pm_real=True,
    )


@dataclass(frozen=True)
class CausalityReport:
    """Pass/fail record of every causality condition plus the beta values."""

    positive_lam: bool
    positive_chi1: bool
    positive_eta: bool
    delta_positive: bool          # discriminant > 0 (strict)
    shear_bounded: bool           # lam >= eta
    bulk_vs_shear: bool           # 3 chi4 > 4 eta (strict)
    composite_upper: bool         # 2 lam chi1 >= ...
    composite_mid: bool           # lam chi1 + cs2 lam (chi4 - 4 eta/3) >= rhs
    composite_lower: bool         # rhs >= 0
    beta_in_range: dict = field(default_factory=dict)
    betas: BetaSet = None
    verdict: bool = False

    def as_dict(self):
        """Plain-Python dictionary form (JSON-serializable)."""
        b = self.betas
        return {
            "conditions": {
                "positive_lam": bool(self.positive_lam),
                "positive_chi1": bool(self.positive_chi1),
                "positive_eta": bool(self.positive_eta),
                "delta_positive": bool(self.delta_positive),
                "shear_bounded": bool(self.shear_bounded),
                "bulk_vs_shear": bool(self.bulk_vs_shear),
                "composite_upper": bool(self.composite_upper),
                "composite_mid": bool(self.composite_mid),
                "composite_lower": bool(self.composite_lower),
            },
            "beta_in_range": {k: bool(v) for k, v in self.beta_in_range.items()},
            "betas": {
                "beta1": float(b.beta1),
                "beta2": float(b.beta2),
                "beta_minus": None if b.beta_minus is None else float(b.beta_minus),
                "beta_plus": None if b.beta_plus is None else float(b.beta_plus),
                "delta": float(b.delta),
                "pm_real": bool(b.pm_real),
            },
            "verdict": bool(self.verdict),
        }


def causality_report(coeffs: CoefficientSample) -> CausalityReport:
    """Evaluate every causality inequality exactly as stated (strict vs not)."""
    lam, chi1, chi2, chi3, chi4 = coeffs.lam, coeffs.chi1, coeffs.chi2, coeffs.chi3, coeffs.chi4
    eta, cs2 = coeffs.eta, coeffs.cs2
    b = betas(coeffs)
    gap = chi4 - 4.0 * eta / 3.0
    mid_rhs = cs2 * lam * chi2 + lam * chi3 + chi2 * chi3 - chi1 * gap
    in_range = {"beta1": True, "beta2": 0.0 <= b.beta2 <= 1.0}
    if b.pm_real:
        in_range["beta_minus"] = 0.0 <= b.beta_minus <= 1.0
        in_range["beta_plus"] = 0.0 <= b.beta_plus <= 1.0
    else:
        in_range["beta_minus"] = False
        in_range["beta_plus"] = False
    report = CausalityReport(
        positive_lam=lam > 0.0,
        positive_chi1=chi1 > 0.0,
        positive_eta=eta > 0.0,
        delta_positive=b.delta > 0.0,
        shear_bounded=lam >= eta,
        bulk_vs_shear=3.0 * chi4 > 4.0 * eta,
        composite_upper=2.0 * lam * chi1 >= lam * chi2 * cs2 - chi1 * gap + lam * chi3 + chi3 * chi2,
        composite_mid=lam * chi1 + cs2 * lam * gap >= mid_rhs,
        composite_lower=mid_rhs >= 0.0,
        beta_in_range=in_range,
        betas=b,
    )
    verdict = (
        report.positive_lam and report.positive_chi1 and report.positive_eta
        and report.delta_positive and report.shear_bounded and report.bulk_vs_shear
        and report.composite_upper and report.composite_mid and report.composite_lower
        and all(in_range.values())
    )
    object.__setattr__(report, "verdict", verdict)
    return report


# ---------------------------------------------------------------------------
# First-order principal matrix (30x30).
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PrincipalMatrix:
    """One directional slice of the first-order principal part."""

    matrix: np.ndarray
    coeffs: CoefficientSample
    u: np.ndarray
    direction: int


def _check_unit(u):
    u = np.asarray(u, dtype=float)
    norm = u @ METRIC @ u
    if abs(norm + 1.0) > 1e-8:
        raise NormalizationError(f"g(u,u) = {norm}, expected -1")
    return u


def assemble_A(coeffs: CoefficientSample, u, direction: int) -> PrincipalMatrix:
    """The 30x30 coefficient matrix of derivatives along one coordinate axis."""
    u = _check_unit(u)
    if direction not in (0, 1, 2, 3):
        raise ValueError("direction must be a spacetime axis index 0..3")
    a = direction
    lam, cs2, eta = coeffs.lam, coeffs.cs2, coeffs.eta
    pi_up = METRIC + np.outer(u, u)            # Pi^{mn}
    pi_mixed = np.eye(4) + np.outer(u, lower(u))  # Pi^m_n
    ua = u[a]
    m = np.zeros((STATE_DIM, STATE_DIM))

    # scalar equation for the comoving energy rate
    m[0, 0] = coeffs.chi1 * ua
    m[0, _OFF_ENERGY_GRAD + a] = lam * cs2
    m[0, _OFF_ACCEL + a] = lam
    for lam_idx in range(4):
        m[0, _OFF_VGRAD + 4 * lam_idx + lam_idx] = coeffs.chi2 * ua

    # momentum-type equations (rows mu)
    for mu in range(4):
        row = 1 + mu
        m[row, 0] = coeffs.chi3 * pi_up[mu, a]
        m[row, _OFF_ENERGY_GRAD + mu] = lam * cs2 * ua
        m[row, _OFF_ACCEL + mu] = lam * ua
        for lam_idx in range(4):
            for nu in range(4):
                b = (coeffs.chi4 + 2.0 * eta / 3.0) * pi_up[mu, a] * (1.0 if nu == lam_idx else 0.0)
                b -= eta * (pi_up[a, lam_idx] * (1.0 if mu == nu else 0.0)
                            + pi_up[mu, lam_idx] * (1.0 if nu == a else 0.0))
                m[row, _OFF_VGRAD + 4 * lam_idx + nu] = b

    # gradient-commutation equations for the orthogonal energy gradient
    for mu in range(4):
        row = _OFF_ACCEL + mu
        m[row, 0] = -pi_up[mu, a]
        m[row, _OFF_ENERGY_GRAD + mu] = ua

    # gradient-commutation equations for the projected velocity gradient
    for lam_idx in range(4):
        for nu in range(4):
            row = _OFF_VGRAD + 4 * lam_idx + nu
            m[row, _OFF_ACCEL + nu] = -pi_mixed[a, lam_idx]
            m[row, _OFF_VGRAD + 4 * lam_idx + nu] = ua

    # transport equations for eps and u themselves
    m[_OFF_EPS, _OFF_EPS] = ua
    for nu in range(4):
        m[_OFF_U + nu, _OFF_U + nu] = ua
    return PrincipalMatrix(matrix=m, coeffs=coeffs, u=u, direction=a)


def contract_principal(coeffs: CoefficientSample, u, xi) -> np.ndarray:
    """Sum of the directional principal matrices weighted by a covector."""
    xi = np.asarray(xi, dtype=float)
    out = np.zeros((STATE_DIM, STATE_DIM))
    for a in range(4):
        if xi[a] != 0.0:
            out += xi[a] * assemble_A(coeffs, u, a).matrix
    return out


def _factored_product(coeffs, u, xi, multiplicities, prefactor):
    """prefactor * prod_a ((u.xi)^2 - beta_a Pi(xi,xi))^n_a."""
    b = betas(coeffs)
    if not b.pm_real:
        raise CoefficientError("discriminant negative: beta+- are complex")
    u = np.asarray(u, dtype=float)
    xi = np.asarray(xi, dtype=float)
    a2 = float(u @ xi) ** 2
    pixx = float(xi @ (METRIC + np.outer(u, u)) @ xi)
    vals = {"beta1": 0.0, "beta2": b.beta2,
            "beta_minus": b.beta_minus, "beta_plus": b.beta_plus}
    out = prefactor
    for name, n in multiplicities.items():
        out *= (a2 - vals[name] * pixx) ** n
    return out


def det_factorization_check(coeffs: CoefficientSample, u, xi) -> float:
    """Relative error between det of the contracted 30x30 matrix and its
    closed factored form.

    ``xi`` is normalized to unit Euclidean length first.  Raises
    SingularSampleError when both sides numerically vanish.
    """
    xi = np.asarray(xi, dtype=float)
    norm = np.linalg.norm(xi)
    if norm == 0.0:
        raise ValueError("xi must be nonzero")
    xi = xi / norm
    u = _check_unit(u)
    brute = float(np.linalg.det(contract_principal(coeffs, u, xi)))
    closed = _factored_product(
        coeffs, u, xi, FIRST_ORDER_MULTIPLICITIES,
        prefactor=coeffs.lam**4 * coeffs.chi1,
    )
    scale = max(abs(brute), abs(closed))
    if scale < 1e-300:
        raise SingularSampleError("both determinants numerically vanish")
    return abs(brute - closed) / scale


# ---------------------------------------------------------------------------
# Characteristic speeds.
# ---------------------------------------------------------------------------


def characteristic_speeds(beta: float, u, xi, zeta):
    """Roots Lambda of (u.Xi)^2 - beta Pi(Xi,Xi) = 0 along Xi = zeta + Lambda xi.

    ``xi`` must be timelike and ``zeta`` spacelike (covectors).  Returns
    (Lambda_minus, Lambda_plus); both coincide when beta = 0.
    """
    if not 0.0 <= beta <= 1.0:
        raise NonCausalInputError(f"beta = {beta} outside [0, 1]")
    u = _check_unit(u)
    xi = np.asarray(xi, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    if float(xi @ METRIC @ xi) >= 0.0:
        raise ValueError("xi must be timelike")
    if float(zeta @ METRIC @ zeta) <= 0.0:
        raise ValueError("zeta must be spacelike")
    pi_up = METRIC + np.outer(u, u)
    uxi = float(u @ xi)
    uze = float(u @ zeta)
    pxx = float(xi @ pi_up @ xi)
    pzz = float(zeta @ pi_up @ zeta)
    pxz = float(xi @ pi_up @ zeta)
    xixi = float(xi @ METRIC @ xi)
    denom = uxi**2 * (1.0 - beta) - beta * xixi
    if abs(denom) < 1e-14 * max(1.0, uxi**2):
        raise DegenerateDirectionError("vanishing quadratic coefficient")
    # Discriminant of the quadratic in Lambda; equals num^2 - a*c where
    # a, c are the quadratic and constant coefficients.  (The middle square
    # must carry a minus sign; the roots below satisfy the quadratic exactly
    # for arbitrary boosted u, which pins the sign.)
    w = beta * (
        (uxi**2 - pxx) * (pzz - uze**2)
        + (uxi * uze - pxz) ** 2
        + (1.0 - beta) * (pxx * pzz - pxz**2)
    )
    if w < 0.0:
        raise NonCausalInputError(f"negative discriminant W = {w}")
    root = np.sqrt(w)
    num = -uze * uxi + beta * pxz
    return ((num - root) / denom, (num + root) / denom)


# ---------------------------------------------------------------------------
# Eigenstructure of the reduced symbol.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumReport:
    """Numerical diagonalization of (A^0)^-1 A^i zeta_i."""

    eigenvalues: np.ndarray
    clusters: tuple            # ((value, geometric multiplicity), ...)
    multiplicities: tuple      # geometric multiplicities, descending
    total_multiplicity: int
    max_imag: float
    spectral_radius: float
    all_real: bool
    diagonalizer: np.ndarray   # S with S A = D S
    diagonal: np.ndarray       # D (diagonal matrix of eigenvalues)
    residual_max: float        # max-norm of S A - D S
    condition_number: float    # of the right-eigenvector matrix
    degenerate: bool           # beta values collide; pattern may differ


def eigenstructure(
    coeffs: CoefficientSample,
    u,
    zeta,
    cluster_rel_gap: float = 1e-6,
    rank_rel_tol: float = 1e-8,
) -> SpectrumReport:
    """Diagonalize the reduced symbol along a spatial direction.

    ``zeta`` gives the three spatial covector components.  Under passing
    causality conditions the spectrum is real with geometric multiplicities
    {20, 3, 3, 1, 1, 1, 1} whenever the beta values are pairwise distinct.
    """
    u = _check_unit(u)
    zeta = np.asarray(zeta, dtype=float)
    if zeta.shape == (4,):
        if zeta[0] != 0.0:
            raise ValueError("zeta must be spatial (zero time component)")
        zeta = zeta[1:]
    if zeta.shape != (3,):
        raise ValueError("zeta must have 3 spatial components")
    a0 = assemble_A(coeffs, u, 0).matrix
    ai = np.zeros((STATE_DIM, STATE_DIM))
    for i in range(3):
        if zeta[i] != 0.0:
            ai += zeta[i] * assemble_A(coeffs, u, i + 1).matrix
    a_tilde = np.linalg.solve(a0, ai)
    eigvals, right = np.linalg.eig(a_tilde)
    rho = float(np.max(np.abs(eigvals))) or 1.0
    max_imag = float(np.max(np.abs(eigvals.imag)))
    all_real = max_imag <= 1e-8 * rho

    # Cluster eigenvalues along the real axis, then count geometric
    # multiplicities by singular-value rank of (A - center I).
    order = np.argsort(eigvals.real)
    gap = cluster_rel_gap * rho
    clusters = []
    start = 0
    for k in range(1, len(order) + 1):
        if k == len(order) or eigvals.real[order[k]] - eigvals.real[order[k - 1]] > gap:
            members = eigvals[order[start:k]]
            center = members.mean()
            sv = np.linalg.svd(a_tilde - center.real * np.eye(STATE_DIM), compute_uv=False)
            rank = int(np.sum(sv > rank_rel_tol * sv[0]))
            clusters.append((float(center.real), STATE_DIM - rank))
            start = k
    mults = tuple(sorted((m for _, m in clusters), reverse=True))

    s = np.linalg.inv(right)
    d = np.diag(eigvals)
    residual = float(np.max(np.abs(s @ a_tilde - d @ s)))

    b = betas(coeffs)
    named = [0.0, b.beta2]
    if b.pm_real:
        named += [b.beta_minus, b.beta_plus]
    degenerate = (not b.pm_real) or any(
        abs(x - y) <= 1e-6 * max(1.0, abs(x), abs(y))
        for i, x in enumerate(named) for y in named[i + 1:]
    )

    return SpectrumReport(
        eigenvalues=eigvals,
        clusters=tuple(clusters),
        multiplicities=mults,
        total_multiplicity=int(sum(m for _, m in clusters)),
        max_imag=max_imag,
        spectral_radius=rho,
        all_real=all_real,
        diagonalizer=s,
        diagonal=d,
        residual_max=residual,
        condition_number=float(np.linalg.cond(right)),
        degenerate=degenerate,
    )


# ---------------------------------------------------------------------------
# Second-order (5x5) symbol.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SecondOrderSymbol:
    """5x5 symbol of the second-order evolution system along a covector."""

    matrix: np.ndarray
    a: float              # u . xi
    b: np.ndarray         # orthogonal part of xi, index raised
    bb: float             # Pi(xi, xi)
    coeffs: CoefficientSample
    u: np.ndarray
    xi: np.ndarray


def assemble_m(coeffs: CoefficientSample, u, xi) -> SecondOrderSymbol:
    """Contract the second-order principal coefficients with xi twice.

    Row/column 0 pairs with the velocity-normalization constraint; the top-left
    entry is identically zero.
    """
    w = coeffs.eps + coeffs.P
    if w <= 0.0:
        raise DegenerateStateError(f"eps + P = {w} must be positive")
    u = _check_unit(u)
    xi = np.asarray(xi, dtype=float)
    lam, cs2, eta = coeffs.lam, coeffs.cs2, coeffs.eta
    pi_up = METRIC + np.outer(u, u)
    a = float(u @ xi)
    bvec = pi_up @ xi
    bb = float(xi @ pi_up @ xi)
    ul = lower(u)
    c = np.zeros((5, 5))
    c[0, 1:] = a**2 * ul
    bmu = (coeffs.chi1 * u * a**2 + (coeffs.chi3 + lam * cs2) * a * bvec
           + lam * cs2 * u * bb) / w
    c[1:, 0] = bmu
    c[1:, 1:] = (
        np.outer(a * (coeffs.chi2 + lam) * u + (coeffs.chi4 - eta / 3.0) * bvec, xi)
        + (lam * a**2 - eta * bb) * np.eye(4)
    )
    return SecondOrderSymbol(matrix=c, a=a, b=bvec, bb=bb, coeffs=coeffs, u=u, xi=xi)


def second_order_det_check(coeffs: CoefficientSample, u, xi) -> float:
    """Relative error between brute-force det of the 5x5 symbol and the
    factored closed form with multiplicities (1, 2, 1, 1)."""
    xi = np.asarray(xi, dtype=float)
    norm = np.linalg.norm(xi)
    if norm == 0.0:
        raise ValueError("xi must be nonzero")
    xi = xi / norm
    sym = assemble_m(coeffs, u, xi)
    brute = float(np.linalg.det(sym.matrix))
    closed = _factored_product(
        coeffs, sym.u, xi, SECOND_ORDER_MULTIPLICITIES,
        prefactor=coeffs.lam**3 * coeffs.chi1 / (coeffs.eps + coeffs.P),
    )
    scale = max(abs(brute), abs(closed))
    if scale < 1e-300:
        raise SingularSampleError("both determinants numerically vanish")
    return abs(brute - closed) / scale


def rank_one_det_identity_check(a_scalar: float, b_scalar: float, c_scalar: float,
                                bvec, xi) -> float:
    """Relative error of det(a I + b bvec (x) bvec_low + c bvec (x) xi)
    against the closed form a^3 (a + (b + c) bvec.bvec_low).

    Valid only under the constraint bvec.xi = bvec.bvec_low, which holds when
    ``bvec`` is the orthogonal projection of ``xi``.
    """
    bvec = np.asarray(bvec, dtype=float)
    xi = np.asarray(xi, dtype=float)
    blow = lower(bvec)
    bb = float(bvec @ blow)
    bxi = float(bvec @ xi)
    if abs(bxi - bb) > 1e-8:
        raise PreconditionError(f"bvec.xi = {bxi} differs from bvec.bvec = {bb}")
    mat = a_scalar * np.eye(4) + b_scalar * np.outer(bvec, blow) + c_scalar * np.outer(bvec, xi)
    brute = float(np.linalg.det(mat))
    closed = a_scalar**3 * (a_scalar + (b_scalar + c_scalar) * bb)
    scale = max(abs(brute), abs(closed), 1e-30)
    return abs(brute - closed) / scale
