"""Method-of-lines evolution of the second-order system on a periodic torus.

Evolved unknowns per grid point: (eps, u^i, dt_eps, dt_u^i) with the time
components u^0 = sqrt(1 + |u|^2) and dt_u^0 = u^i dt_u^i / u^0 reconstructed
from the normalization constraint, so g(u, u) = -1 holds to round-off by
construction.  Each step solves a pointwise 5x5 linear system for the second
time derivatives: the system matrix is obtained by forward-mode
differentiation of the constitutive map (it equals the second-order symbol
contracted with the time covector), and the remaining residual combines the
known drift of the map with spatial finite differences of the stress grids.
Spatial derivatives are centered periodic differences of order 4 (or 2).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .eos import TransportModel, evaluate, evaluate_derivatives
from .errors import (
    BlowupError,
    CFLError,
    DomainError,
    FloorError,
    NonCausalInputError,
    SingularPrincipalError,
)
from .forward import Dual
from .kinematics import METRIC
from .symbol import causality_report, max_squared_speed

__all__ = [
    "Grid",
    "Fields",
    "SecondDerivatives",
    "MonitorSeries",
    "EvolveResult",
    "diff1",
    "diff2",
    "stress_grids",
    "second_time_derivatives",
    "rk4_step",
    "max_signal_speed",
    "evolve",
    "initial_fields",
    "write_snapshot",
    "read_snapshot",
    "MONITOR_HEADER",
    "SNAPSHOT_MAGIC",
    "SNAPSHOT_FIELD_NAMES",
]

_G_DIAG = np.array([-1.0, 1.0, 1.0, 1.0])


# ---------------------------------------------------------------------------
# Grid and field containers.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Grid:
    """Uniform periodic lattice on a d-torus, d in {1, 2, 3}.

    Points sit at x_j = j h with h = L / N per axis; x = L wraps to x = 0.
    """

    dim: int
    shape: tuple
    lengths: tuple
    spacing: tuple

    @classmethod
    def make(cls, dim: int, n, length) -> "Grid":
        if dim not in (1, 2, 3):
            raise ValueError("dimension must be 1, 2, or 3")
        shape = tuple(np.broadcast_to(n, (dim,)).astype(int))
        lengths = tuple(float(x) for x in np.broadcast_to(length, (dim,)))
        if any(s < 8 for s in shape):
            raise ValueError("need at least 8 points per axis")
        if any(x <= 0.0 for x in lengths):
            raise ValueError("box lengths must be positive")
        spacing = tuple(x / s for x, s in zip(lengths, shape))
        return cls(dim=dim, shape=shape, lengths=lengths, spacing=spacing)

    def coordinate(self, axis: int):
        """1D coordinate array along one axis."""
        return self.spacing[axis] * np.arange(self.shape[axis])

    def mesh(self):
        """Broadcastable coordinate arrays, one per axis."""
        return np.meshgrid(*(self.coordinate(a) for a in range(self.dim)),
                           indexing="ij")


@dataclass
class Fields:
    """Evolved unknowns on a grid; time components of u are derived."""

    eps: np.ndarray      # grid shape
    u: np.ndarray        # (3,) + grid shape, spatial four-velocity u^i
    dt_eps: np.ndarray
    dt_u: np.ndarray     # (3,) + grid shape

    def u0(self):
        return np.sqrt(1.0 + np.sum(self.u**2, axis=0))

    def u4(self):
        """Full four-velocity (4,) + shape with u^0 reconstructed."""
        return np.concatenate((self.u0()[None], self.u), axis=0)

    def dt_u4(self):
        """Full dt_u with dt_u^0 from u_a dt_u^a = 0."""
        dt0 = np.sum(self.u * self.dt_u, axis=0) / self.u0()
        return np.concatenate((dt0[None], self.dt_u), axis=0)

    def copy(self):
        return Fields(self.eps.copy(), self.u.copy(),
                      self.dt_eps.copy(), self.dt_u.copy())

    def pack(self):
        return np.concatenate((self.eps[None], self.u,
                               self.dt_eps[None], self.dt_u), axis=0)

    @classmethod
    def unpack(cls, y):
        return cls(eps=y[0], u=y[1:4], dt_eps=y[4], dt_u=y[5:8])

    @classmethod
    def constant(cls, grid: Grid, eps0: float):
        shape = grid.shape
        return cls(eps=np.full(shape, float(eps0)), u=np.zeros((3,) + shape),
                   dt_eps=np.zeros(shape), dt_u=np.zeros((3,) + shape))


# ---------------------------------------------------------------------------
# Periodic centered finite differences.
# ---------------------------------------------------------------------------


def diff1(f, axis: int, h: float, order: int = 4):
    """First derivative, centered periodic stencil of the given order."""
    if order == 2:
        return (np.roll(f, -1, axis) - np.roll(f, 1, axis)) / (2.0 * h)
    if order == 4:
        return (-np.roll(f, -2, axis) + 8.0 * np.roll(f, -1, axis)
                - 8.0 * np.roll(f, 1, axis) + np.roll(f, 2, axis)) / (12.0 * h)
    raise ValueError("order must be 2 or 4")


def diff2(f, axis: int, h: float, order: int = 4):
    """Second derivative, centered periodic stencil of the given order."""
    if order == 2:
        return (np.roll(f, -1, axis) - 2.0 * f + np.roll(f, 1, axis)) / h**2
    if order == 4:
        return (-np.roll(f, -2, axis) + 16.0 * np.roll(f, -1, axis) - 30.0 * f
                + 16.0 * np.roll(f, 1, axis) - np.roll(f, 2, axis)) / (12.0 * h**2)
    raise ValueError("order must be 2 or 4")


# ---------------------------------------------------------------------------
# Dual-number constitutive map on grids.
# ---------------------------------------------------------------------------


def _coeff_duals(model, eps_d):
    """Transport coefficients as duals of the energy-density dual."""
    vals = evaluate(model, eps_d.val)
    ders = evaluate_derivatives(model, eps_d.val)
    def lift(v, d):
        return Dual(v, d * eps_d.der)
    return {
        "P": lift(vals.P, ders.dP),
        "cs2": lift(vals.cs2, ders.dcs2),
        "eta": lift(vals.eta, ders.deta),
        "chi1": lift(vals.chi1, ders.dchi1),
        "chi2": lift(vals.chi2, ders.dchi2),
        "chi3": lift(vals.chi3, ders.dchi3),
        "chi4": lift(vals.chi4, ders.dchi4),
        "lam": lift(vals.lam, ders.dlam),
    }


def _stress_upper_dual(model, eps_d, u_d, deps_d, du_d):
    """T^{ab} as a 4x4 nested list of duals.

    ``u_d[a]`` is u^a, ``deps_d[a]`` is d_a eps, ``du_d[a][m]`` is d_a u^m.
    Mirrors kinematics.stress_energy_upper, propagating seed derivatives.
    """
    c = _coeff_duals(model, eps_d)
    w = eps_d + c["P"]
    pi = [[METRIC[a, b] + u_d[a] * u_d[b] for b in range(4)] for a in range(4)]
    theta = du_d[0][0] + du_d[1][1] + du_d[2][2] + du_d[3][3]
    vdot = sum(u_d[a] * deps_d[a] for a in range(4)) / w
    a1 = c["chi1"] * vdot + c["chi2"] * theta
    a2 = c["chi3"] * vdot + c["chi4"] * theta
    q = [c["lam"] * (c["cs2"] / w * sum(pi[a][m] * deps_d[m] for m in range(4))
                     + sum(u_d[m] * du_d[m][a] for m in range(4)))
         for a in range(4)]
    grad = [[sum(pi[a][m] * du_d[m][b] for m in range(4)) for b in range(4)]
            for a in range(4)]
    t = [[None] * 4 for _ in range(4)]
    for a in range(4):
        for b in range(a, 4):
            sigma = 0.5 * (grad[a][b] + grad[b][a]) - (theta * (1.0 / 3.0)) * pi[a][b]
            t[a][b] = ((eps_d + a1) * (u_d[a] * u_d[b]) + (c["P"] + a2) * pi[a][b]
                       - 2.0 * c["eta"] * sigma + u_d[a] * q[b] + u_d[b] * q[a])
            t[b][a] = t[a][b]
    return t


def _dual_inputs(fields: Fields, grid: Grid, order: int, nseed: int):
    """Seeded duals for (eps, u, d eps, d u) on the grid.

    With nseed = 6: seeds 0..4 mark the unknown second time derivatives
    (d2_eps, d2_u^0..3) inside the time-derivative slots, and seed 5 carries
    the known time drift of every input.  With nseed = 0 the duals are plain
    values (cheap path for stress grids).
    """
    shape = grid.shape
    u4 = fields.u4()
    dtu4 = fields.dt_u4()

    def dx(f, i):
        if i < grid.dim:
            return diff1(f, i, grid.spacing[i], order)
        return np.zeros(shape)

    def dual(value, drift=None, seed=None):
        der = np.zeros((nseed,) + shape)
        if nseed:
            if drift is not None:
                der[5] = drift
            if seed is not None:
                der[seed] = 1.0
        return Dual(value, der)

    # Spatial derivatives of u^0 come from the chain rule through the
    # normalization constraint (keeps u_m d_a u^m = 0 exact discretely).
    dxu = []
    for i in range(3):
        row = [None] + [dx(u4[m], i) for m in range(1, 4)]
        row[0] = sum(u4[m] * row[m] for m in range(1, 4)) / u4[0]
        dxu.append(row)

    eps_d = dual(fields.eps, drift=fields.dt_eps)
    u_d = [dual(u4[a], drift=dtu4[a]) for a in range(4)]
    deps_d = [dual(fields.dt_eps, seed=0)]
    deps_d += [dual(dx(fields.eps, i), drift=dx(fields.dt_eps, i)) for i in range(3)]
    du_d = [[dual(dtu4[m], seed=1 + m) for m in range(4)]]
    du_d += [[dual(dxu[i][m], drift=dx(dtu4[m], i)) for m in range(4)]
             for i in range(3)]
    return eps_d, u_d, deps_d, du_d


def stress_grids(fields: Fields, model: TransportModel, grid: Grid, order: int = 4):
    """T^{ab} values on the grid, shape (4, 4) + grid shape."""
    eps_d, u_d, deps_d, du_d = _dual_inputs(fields, grid, order, nseed=0)
    t = _stress_upper_dual(model, eps_d, u_d, deps_d, du_d)
    out = np.empty((4, 4) + grid.shape)
    for a in range(4):
        for b in range(4):
            out[a, b] = t[a][b].val
    return out


# ---------------------------------------------------------------------------
# Pointwise 5x5 solve for the second time derivatives.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SecondDerivatives:
    """Solved second time derivatives plus the per-point system."""

    d2_eps: np.ndarray       # grid shape
    d2_u4: np.ndarray        # (4,) + grid shape (time component included)
    matrix: np.ndarray       # grid shape + (5, 5)
    rhs: np.ndarray          # grid shape + (5,)  (the residual with d2 = 0)
    t_upper: np.ndarray      # (4, 4) + grid shape, stress values
    condition_max: float


def second_time_derivatives(
    fields: Fields,
    model: TransportModel,
    grid: Grid,
    order: int = 4,
    eps_floor: float | None = None,
    condition_limit: float = 1e12,
) -> SecondDerivatives:
    """Solve m . (d2_eps, d2_u^nu) = -R0 at every grid point.

    Four rows express vanishing divergence of the stress tensor, with
    dt T^{0 mu} split into the known drift (seed 5) plus its dependence on
    the unknowns (seeds 0..4); the fifth row is the twice-time-differentiated
    normalization constraint.  Mixed dt-dx derivatives come from spatial
    differences of the evolved time derivatives.
    """
    shape = grid.shape
    if eps_floor is not None and float(fields.eps.min()) < eps_floor:
        raise FloorError(
            f"min eps = {fields.eps.min():.6e} below floor {eps_floor:.6e}")
    eps_d, u_d, deps_d, du_d = _dual_inputs(fields, grid, order, nseed=6)
    t = _stress_upper_dual(model, eps_d, u_d, deps_d, du_d)

    def dx(f, i):
        if i < grid.dim:
            return diff1(f, i, grid.spacing[i], order)
        return np.zeros(shape)

    u4 = fields.u4()
    dtu4 = fields.dt_u4()
    u0 = u4[0]
    ul = _G_DIAG.reshape((4,) + (1,) * grid.dim) * u4

    m = np.zeros(shape + (5, 5))
    r = np.zeros(shape + (5,))

    # Constraint row: u_nu u^a u^b d_a d_b u^nu + u^a u^b (d_a u_nu)(d_b u^nu) = 0
    du4_spatial = [[dx(u4[nu], i) for nu in range(4)] for i in range(grid.dim)]
    for nu in range(4):
        m[..., 0, 1 + nu] = u0**2 * ul[nu]
        mixed = sum(u4[1 + i] * dx(dtu4[nu], i) for i in range(grid.dim))
        spat = sum(u4[1 + i] * u4[1 + j]
                   * (diff2(u4[nu], i, grid.spacing[i], order) if i == j
                      else diff1(du4_spatial[j][nu], i, grid.spacing[i], order))
                   for i in range(grid.dim) for j in range(grid.dim))
        acc = u0 * dtu4[nu] + sum(u4[1 + i] * du4_spatial[i][nu]
                                  for i in range(grid.dim))
        r[..., 0] += ul[nu] * (2.0 * u0 * mixed + spat) + _G_DIAG[nu] * acc**2

    # Divergence rows: dt T^{0 mu} + dx_i T^{i mu} = 0.
    for mu in range(4):
        t0 = t[0][mu]
        m[..., 1 + mu, 0] = t0.der[0]
        for nu in range(4):
            m[..., 1 + mu, 1 + nu] = t0.der[1 + nu]
        r[..., 1 + mu] = t0.der[5] + sum(dx(t[1 + i][mu].val, i)
                                         for i in range(grid.dim))

    cond = float(np.max(np.linalg.cond(m)))
    if not np.isfinite(cond) or cond > condition_limit:
        raise SingularPrincipalError(
            f"pointwise 5x5 system condition number {cond:.3e} exceeds limit")
    x = np.linalg.solve(m, -r[..., None])[..., 0]

    t_vals = np.empty((4, 4) + shape)
    for a in range(4):
        for b in range(4):
            t_vals[a, b] = t[a][b].val
    return SecondDerivatives(
        d2_eps=x[..., 0],
        d2_u4=np.moveaxis(x[..., 1:], -1, 0),
        matrix=m,
        rhs=r,
        t_upper=t_vals,
        condition_max=cond,
    )


def max_signal_speed(model: TransportModel, eps) -> float:
    """Fastest characteristic speed max_a sqrt(beta_a) over the given eps."""
    beta = max_squared_speed(evaluate(model, np.asarray(eps, dtype=float)))
    return float(np.sqrt(np.max(beta)))


# ---------------------------------------------------------------------------
# Time stepping.
# ---------------------------------------------------------------------------


def _rhs(y, model, grid, order, eps_floor):
    fields = Fields.unpack(y)
    sd = second_time_derivatives(fields, model, grid, order=order,
                                 eps_floor=eps_floor)
    out = np.empty_like(y)
    out[0] = y[4]
    out[1:4] = y[5:8]
    out[4] = sd.d2_eps
    out[5:8] = sd.d2_u4[1:4]
    return out


def rk4_step(
    fields: Fields,
    model: TransportModel,
    grid: Grid,
    dt: float,
    order: int = 4,
    cfl: float = 0.25,
    eps_floor: float | None = None,
    enforce_cfl: bool = True,
) -> Fields:
    """One classical four-stage step of the first-order-in-time system.

    The time components of u and dt_u are re-derived from the spatial ones
    after every stage by construction of the Fields container.
    """
    if enforce_cfl:
        vmax = max_signal_speed(model, fields.eps)
        bound = cfl * min(grid.spacing) / vmax
        if dt > bound * (1.0 + 1e-12):
            raise CFLError(f"dt = {dt:.6e} exceeds CFL bound {bound:.6e}")
    y0 = fields.pack()
    k1 = _rhs(y0, model, grid, order, eps_floor)
    k2 = _rhs(y0 + 0.5 * dt * k1, model, grid, order, eps_floor)
    k3 = _rhs(y0 + 0.5 * dt * k2, model, grid, order, eps_floor)
    k4 = _rhs(y0 + dt * k3, model, grid, order, eps_floor)
    return Fields.unpack(y0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))


# ---------------------------------------------------------------------------
# Monitors.
# ---------------------------------------------------------------------------

MONITOR_HEADER = "time,max_norm_violation,div_residual_l2,constraint4a_l2,min_eps,cfl"

# Backward-difference weights for a first time derivative at the newest of
# k+1 stored levels (newest first).
_BD1 = {
    1: (1.0, -1.0),
    2: (1.5, -2.0, 0.5),
    3: (11.0 / 6.0, -3.0, 1.5, -1.0 / 3.0),
    4: (25.0 / 12.0, -4.0, 3.0, -4.0 / 3.0, 0.25),
}


def _backward_dt(history, dt):
    """Backward FD of the newest entry; history is newest first."""
    k = min(len(history) - 1, 4)
    w = _BD1[k]
    return sum(c * h for c, h in zip(w, history[:k + 1])) / dt


@dataclass
class MonitorSeries:
    """Time series of run diagnostics; one row per recorded step."""

    time: list = field(default_factory=list)
    max_norm_violation: list = field(default_factory=list)
    div_residual_l2: list = field(default_factory=list)
    constraint4a_l2: list = field(default_factory=list)
    min_eps: list = field(default_factory=list)
    cfl: list = field(default_factory=list)

    def append(self, t, norm_v, div_l2, con_l2, mineps, cfl):
        for v in (t, norm_v, div_l2, con_l2, mineps, cfl):
            if not np.isfinite(v):
                raise BlowupError(f"non-finite monitor value at t = {t}")
        if self.time and t <= self.time[-1]:
            raise ValueError("monitor time stamps must increase")
        self.time.append(float(t))
        self.max_norm_violation.append(float(norm_v))
        self.div_residual_l2.append(float(div_l2))
        self.constraint4a_l2.append(float(con_l2))
        self.min_eps.append(float(mineps))
        self.cfl.append(float(cfl))

    def rows(self):
        return list(zip(self.time, self.max_norm_violation, self.div_residual_l2,
                        self.constraint4a_l2, self.min_eps, self.cfl))

    def to_csv(self, path):
        with open(path, "w", encoding="ascii") as fh:
            fh.write(MONITOR_HEADER + "\n")
            for row in self.rows():
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def _rms(arr):
    return float(np.sqrt(np.mean(np.asarray(arr) ** 2)))


def _monitor_values(fields, grid, order, dt, t0mu_hist, dtu4_hist):
    """Scheme-consistency residuals from stored time levels.

    Time derivatives use backward differences of the history (newest first);
    with fewer than two levels the residuals are zero by convention.
    """
    shape = grid.shape
    u4 = fields.u4()
    norm_v = float(np.max(np.abs(np.einsum("a...,a...->...",
                                           _G_DIAG.reshape((4,) + (1,) * grid.dim) * u4,
                                           u4) + 1.0)))
    if len(t0mu_hist) < 2:
        return norm_v, 0.0, 0.0

    def dx(f, i):
        return diff1(f, i, grid.spacing[i], order)

    # Divergence residual: backward-dt of T^{0 mu} plus spatial divergence.
    t_cur = t0mu_hist[0]                 # (4, 4) + shape: full stress values
    dt_t0 = _backward_dt([h[0] for h in t0mu_hist], dt)   # (4,) + shape
    div = np.stack([dt_t0[mu] + sum(dx(t_cur[1 + i, mu], i)
                                    for i in range(grid.dim))
                    for mu in range(4)])
    div_l2 = _rms(div)

    # Constraint residual: u_nu u^a u^b d_a d_b u^nu + u^a u^b d_a u_nu d_b u^nu
    dtu4 = fields.dt_u4()
    d2t_u4 = _backward_dt(list(dtu4_hist), dt)            # (4,) + shape
    u0 = u4[0]
    ul = _G_DIAG.reshape((4,) + (1,) * grid.dim) * u4
    con = np.zeros(shape)
    for nu in range(4):
        dspat = [dx(u4[nu], i) for i in range(grid.dim)]
        mixed = sum(u4[1 + i] * dx(dtu4[nu], i) for i in range(grid.dim))
        spat = sum(u4[1 + i] * u4[1 + j]
                   * (diff2(u4[nu], i, grid.spacing[i], order) if i == j
                      else dx(dspat[j], i))
                   for i in range(grid.dim) for j in range(grid.dim))
        acc = u0 * dtu4[nu] + sum(u4[1 + i] * dspat[i] for i in range(grid.dim))
        con += ul[nu] * (u0**2 * d2t_u4[nu] + 2.0 * u0 * mixed + spat)
        con += _G_DIAG[nu] * acc**2
    con_l2 = _rms(con)
    return norm_v, div_l2, con_l2


# ---------------------------------------------------------------------------
# Snapshot files.
# ---------------------------------------------------------------------------

SNAPSHOT_MAGIC = b"BDNK1"
SNAPSHOT_FIELD_NAMES = ("eps", "u1", "u2", "u3",
                        "dt_eps", "dt_u1", "dt_u2", "dt_u3")


def write_snapshot(path, grid: Grid, fields: Fields, time: float):
    """Binary snapshot: header then float64 little-endian fields, x-fastest."""
    arrays = [fields.eps, fields.u[0], fields.u[1], fields.u[2],
              fields.dt_eps, fields.dt_u[0], fields.dt_u[1], fields.dt_u[2]]
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<i", grid.dim))
        fh.write(np.asarray(grid.shape, dtype="<i4").tobytes())
        fh.write(np.asarray(grid.lengths, dtype="<f8").tobytes())
        fh.write(struct.pack("<d", float(time)))
        fh.write(struct.pack("<i", len(arrays)))
        for name in SNAPSHOT_FIELD_NAMES:
            raw = name.encode("ascii")
            fh.write(struct.pack("B", len(raw)))
            fh.write(raw)
        for arr in arrays:
            fh.write(np.asarray(arr, dtype="<f8").tobytes(order="F"))


def read_snapshot(path):
    """Inverse of write_snapshot; returns (grid, fields, time)."""
    with open(path, "rb") as fh:
        if fh.read(len(SNAPSHOT_MAGIC)) != SNAPSHOT_MAGIC:
            raise ValueError(f"{path}: bad snapshot magic")
        dim = struct.unpack("<i", fh.read(4))[0]
        shape = tuple(np.frombuffer(fh.read(4 * dim), dtype="<i4").tolist())
        lengths = tuple(np.frombuffer(fh.read(8 * dim), dtype="<f8").tolist())
        time = struct.unpack("<d", fh.read(8))[0]
        nfields = struct.unpack("<i", fh.read(4))[0]
        names = []
        for _ in range(nfields):
            n = struct.unpack("B", fh.read(1))[0]
            names.append(fh.read(n).decode("ascii"))
        count = int(np.prod(shape))
        data = {}
        for name in names:
            flat = np.frombuffer(fh.read(8 * count), dtype="<f8")
            data[name] = flat.reshape(shape, order="F")
    grid = Grid.make(dim, shape, lengths)
    fields = Fields(
        eps=data["eps"].copy(),
        u=np.stack([data["u1"], data["u2"], data["u3"]]),
        dt_eps=data["dt_eps"].copy(),
        dt_u=np.stack([data["dt_u1"], data["dt_u2"], data["dt_u3"]]),
    )
    return grid, fields, time


# ---------------------------------------------------------------------------
# Initial data profiles.
# ---------------------------------------------------------------------------


def initial_fields(grid: Grid, profile: str, **params) -> Fields:
    """Named initial data profiles on a grid, all initially at rest.

    * equilibrium: constant eps0.
    * sinusoid: eps0 (1 + amplitude sin(2 pi k x / L)) along the first axis.
    * gaussian-pulse: eps0 (1 + amplitude exp(-r^2 / (2 width^2))), centered.
    * bump-pulse: compactly supported bump of the given width, centered;
      exactly equilibrium outside radius ``width`` (front-speed studies).
    """
    eps0 = float(params.pop("eps0", 1.0))
    fields = Fields.constant(grid, eps0)
    if profile == "equilibrium":
        extra = params
    elif profile == "sinusoid":
        amp = float(params.pop("amplitude", 1e-3))
        k = int(params.pop("wavenumber", 1))
        extra = params
        x = grid.mesh()[0]
        fields.eps = eps0 * (1.0 + amp * np.sin(2.0 * np.pi * k * x / grid.lengths[0]))
    elif profile in ("gaussian-pulse", "bump-pulse"):
        amp = float(params.pop("amplitude", 1e-3))
        width = float(params.pop("width", grid.lengths[0] / 10.0))
        extra = params
        mesh = grid.mesh()
        r2 = sum((m - 0.5 * L) ** 2 for m, L in zip(mesh, grid.lengths))
        if profile == "gaussian-pulse":
            bump = np.exp(-r2 / (2.0 * width**2))
        else:
            s2 = np.minimum(r2 / width**2, 1.0)
            with np.errstate(divide="ignore", over="ignore"):
                bump = np.where(s2 < 1.0, np.exp(1.0 - 1.0 / (1.0 - s2)), 0.0)
        fields.eps = eps0 * (1.0 + amp * bump)
    else:
        raise ValueError(f"unknown initial profile {profile!r}")
    if extra:
        raise ValueError(f"unused profile parameters: {sorted(extra)}")
    return fields


# ---------------------------------------------------------------------------
# Run orchestration.
# ---------------------------------------------------------------------------


@dataclass
class EvolveResult:
    """Artifacts of one run."""

    fields: Fields
    time: float
    steps: int
    monitors: MonitorSeries
    snapshot_paths: list
    stop_reason: str


def evolve(
    model: TransportModel,
    grid: Grid,
    fields: Fields,
    t_end: float,
    cfl: float = 0.25,
    order: int = 4,
    output_dir=None,
    output_every: int = 0,
    eps_floor: float | None = None,
    magnitude_cap: float = 1e6,
    max_steps: int = 100000,
) -> EvolveResult:
    """Advance to t_end with RK4, recording monitors and optional snapshots.

    The time step is uniform: cfl * h_min / v_max from the initial maximum
    characteristic speed, rounded down so an integer number of steps lands on
    t_end exactly (uniform steps keep the backward-difference monitor
    residuals at full order).  If the signal speed later grows past a 10%
    headroom the run aborts with CFLError.  On a step error the monitors
    collected so far are still written before the error propagates.
    """
    eps0 = fields.eps
    if not np.all(np.isfinite(eps0)) or float(eps0.min()) <= 0.0:
        raise DomainError("initial energy density must be positive and finite")
    for probe in (float(eps0.min()), float(np.median(eps0)), float(eps0.max())):
        if not causality_report(evaluate(model, probe)).verdict:
            raise NonCausalInputError(
                f"causality conditions fail at initial eps = {probe:.6e}")
    if eps_floor is None:
        eps_floor = 1e-8 * float(eps0.min())

    monitors = MonitorSeries()
    snapshot_paths = []
    t0mu_hist = []   # newest first, each (4, 4) + shape
    dtu4_hist = []   # newest first, each (4,) + shape
    hmin = min(grid.spacing)
    fields = fields.copy()

    vmax0 = max_signal_speed(model, eps0)
    nsteps = max(1, int(np.ceil(t_end * vmax0 / (cfl * hmin) - 1e-12)))
    if nsteps > max_steps:
        nsteps = max_steps
    dt = t_end / nsteps
    step = 0
    t = 0.0
    stop_reason = "t_end" if nsteps * dt >= t_end else "max_steps"

    def record():
        nonlocal t0mu_hist, dtu4_hist
        t0mu_hist = [stress_grids(fields, model, grid, order)] + t0mu_hist[:4]
        dtu4_hist = [fields.dt_u4()] + dtu4_hist[:4]
        norm_v, div_l2, con_l2 = _monitor_values(
            fields, grid, order, dt, t0mu_hist, dtu4_hist)
        monitors.append(t, norm_v, div_l2, con_l2,
                        float(fields.eps.min()), dt * vmax / hmin)
        if output_dir is not None and output_every > 0 and step % output_every == 0:
            path = f"{output_dir}/snapshot_{step:06d}.bin"
            write_snapshot(path, grid, fields, t)
            snapshot_paths.append(path)

    try:
        while True:
            cap = float(np.max(np.abs(fields.pack())))
            if cap > magnitude_cap:
                raise BlowupError(f"field magnitude {cap:.3e} exceeds cap")
            vmax = max_signal_speed(model, fields.eps)
            if dt > 1.1 * cfl * hmin / vmax:
                raise CFLError(
                    f"signal speed grew to {vmax:.4f}; dt = {dt:.6e} "
                    "violates the CFL bound with 10% headroom")
            record()
            if step >= nsteps:
                break
            fields = rk4_step(fields, model, grid, dt, order=order, cfl=cfl,
                              eps_floor=eps_floor, enforce_cfl=False)
            step += 1
            t = step * dt
    finally:
        if output_dir is not None:
            monitors.to_csv(f"{output_dir}/monitors.csv")
    return EvolveResult(fields=fields, time=t, steps=step, monitors=monitors,
                        snapshot_paths=snapshot_paths, stop_reason=stop_reason)
