"""Minkowski tensor algebra, fluid point states, and the constitutive map.

Everything here is pointwise and pure.  The metric is fixed globally to
diag(-1, 1, 1, 1); the four-velocity is future-pointing and unit timelike.
Derivative layout conventions:

* ``deps[a]``  = d_a eps                (covector index a)
* ``du[a, m]`` = d_a u^m                (row = derivative index, col = component)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eos import CoefficientSample, TransportModel, evaluate
from .errors import (
    DegenerateStateError,
    NormalizationError,
    StencilError,
)

__all__ = [
    "METRIC",
    "lower",
    "raise_index",
    "normalize_velocity",
    "projector",
    "projector_upper",
    "projector_mixed",
    "FluidPointState",
    "DerivedGradients",
    "derived_gradients",
    "shear",
    "stress_energy",
    "stress_energy_upper",
    "FieldPatch",
    "divergence_residual",
]

# Minkowski metric, signature (-,+,+,+).  g and its inverse coincide.
METRIC = np.diag([-1.0, 1.0, 1.0, 1.0])

NORMALIZATION_TOL = 1e-8


def lower(vector):
    """Lower a vector index: v_a = g_ab v^b."""
    return METRIC @ np.asarray(vector, dtype=float)


def raise_index(covector):
    """Raise a covector index: w^a = g^ab w_b."""
    return METRIC @ np.asarray(covector, dtype=float)


def normalize_velocity(v):
    """Four-velocity from spatial components: u = (sqrt(1+|v|^2), v).

    Total on finite input; satisfies g(u, u) = -1 exactly up to round-off
    and u^0 >= 1.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError("expected 3 spatial components")
    return np.concatenate(([np.sqrt(1.0 + v @ v)], v))


def _check_unit(u):
    u = np.asarray(u, dtype=float)
    norm = u @ METRIC @ u
    if abs(norm + 1.0) > NORMALIZATION_TOL:
        raise NormalizationError(f"g(u,u) = {norm}, expected -1")
    if u[0] <= 0.0:
        raise NormalizationError("four-velocity must be future-pointing (u^0 > 0)")
    return u


def projector(u):
    """Orthogonal projector with lower indices: Pi_ab = g_ab + u_a u_b."""
    u = _check_unit(u)
    ul = lower(u)
    return METRIC + np.outer(ul, ul)


def projector_upper(u):
    """Pi^ab = g^ab + u^a u^b."""
    u = _check_unit(u)
    return METRIC + np.outer(u, u)


def projector_mixed(u):
    """Pi^a_b = delta^a_b + u^a u_b."""
    u = _check_unit(u)
    return np.eye(4) + np.outer(u, lower(u))


@dataclass(frozen=True)
class FluidPointState:
    """Pointwise fluid data: (eps, u^m) and their first derivatives."""

    eps: float
    u: np.ndarray        # (4,)  four-velocity u^m
    deps: np.ndarray     # (4,)  d_a eps
    du: np.ndarray       # (4,4) du[a, m] = d_a u^m

    @classmethod
    def from_spatial(cls, eps, v, deps, dv):
        """Build a valid state from spatial velocity data.

        ``v`` are the spatial four-velocity components u^i and ``dv[a, i]``
        their derivatives; u^0 and d_a u^0 are reconstructed from the
        normalization constraint, so u.du orthogonality holds by construction.
        """
        u = normalize_velocity(v)
        dv = np.asarray(dv, dtype=float)
        if dv.shape != (4, 3):
            raise ValueError("dv must have shape (4, 3)")
        du = np.empty((4, 4))
        du[:, 1:] = dv
        # u_m d_a u^m = 0  =>  d_a u^0 = (u^i d_a u^i) / u^0
        du[:, 0] = dv @ u[1:] / u[0]
        return cls(eps=float(eps), u=u, deps=np.asarray(deps, dtype=float), du=du)

    def validate(self):
        """Raise NormalizationError if the state invariants fail."""
        _check_unit(self.u)
        ortho = self.du @ lower(self.u)
        if np.max(np.abs(ortho)) > 1e-10:
            raise NormalizationError(
                f"u_m d_a u^m = {ortho} violates derivative orthogonality"
            )
        return self


@dataclass(frozen=True)
class DerivedGradients:
    """Gradient variables built from a fluid point state.

    * ``energy_rate``      -- comoving energy change u.grad(eps)/(eps+P)
    * ``energy_gradient``  -- orthogonal gradient Pi.grad(eps)/(eps+P)
    * ``acceleration``     -- four-acceleration u.grad(u)
    * ``velocity_gradient``-- orthogonally projected velocity gradient,
                              index layout [a, m] like ``du``
    """

    energy_rate: float
    energy_gradient: np.ndarray
    acceleration: np.ndarray
    velocity_gradient: np.ndarray


def derived_gradients(state: FluidPointState, coeffs: CoefficientSample) -> DerivedGradients:
    """Decompose the first derivatives along and orthogonal to u."""
    w = coeffs.eps + coeffs.P
    if w <= 0.0:
        raise DegenerateStateError(f"eps + P = {w} must be positive")
    u = _check_unit(state.u)
    # Pi_a^m = delta_a^m + u_a u^m (contracts the derivative index from above)
    pi_lowup = np.eye(4) + np.outer(lower(u), u)
    pi_up = METRIC + np.outer(u, u)
    return DerivedGradients(
        energy_rate=float(u @ state.deps) / w,
        energy_gradient=pi_up @ state.deps / w,
        acceleration=u @ state.du,
        velocity_gradient=pi_lowup @ state.du,
    )


def shear(state: FluidPointState):
    """Shear tensor sigma_ab: symmetric, traceless, orthogonal to u."""
    u = _check_unit(state.u)
    pi_lowup = np.eye(4) + np.outer(lower(u), u)
    pi_low = METRIC + np.outer(lower(u), lower(u))
    # d_m u_b with the derivative index first
    du_low = state.du @ METRIC
    grad = pi_lowup @ du_low          # Pi_a^m d_m u_b
    expansion = np.trace(state.du)    # d_m u^m
    return 0.5 * (grad + grad.T) - (expansion / 3.0) * pi_low


def _viscous_amplitudes(state, coeffs, grads):
    """Scalars A1, A2 and heat-flux-like vector Q_a of the constitutive map."""
    expansion = np.trace(state.du)
    a1 = coeffs.chi1 * grads.energy_rate + coeffs.chi2 * expansion
    a2 = coeffs.chi3 * grads.energy_rate + coeffs.chi4 * expansion
    q_low = coeffs.lam * (
        coeffs.cs2 * lower(grads.energy_gradient) + lower(grads.acceleration)
    )
    return a1, a2, q_low


def stress_energy(state: FluidPointState, coeffs: CoefficientSample):
    """Viscous stress-energy tensor T_ab (both indices lowered).

    T_ab = (eps+A1) u_a u_b + (P+A2) Pi_ab - 2 eta sigma_ab + u_a Q_b + u_b Q_a.
    Symmetric by construction; reduces to the perfect-fluid tensor when all
    transport coefficients vanish.
    """
    grads = derived_gradients(state, coeffs)
    a1, a2, q_low = _viscous_amplitudes(state, coeffs, grads)
    ul = lower(state.u)
    pi_low = METRIC + np.outer(ul, ul)
    return (
        (state.eps + a1) * np.outer(ul, ul)
        + (coeffs.P + a2) * pi_low
        - 2.0 * coeffs.eta * shear(state)
        + np.outer(ul, q_low)
        + np.outer(q_low, ul)
    )


def stress_energy_upper(state: FluidPointState, coeffs: CoefficientSample):
    """T^ab with both indices raised."""
    return METRIC @ stress_energy(state, coeffs) @ METRIC


# ---------------------------------------------------------------------------
# Numerical divergence of the stress tensor on a spacetime sample patch.
# ---------------------------------------------------------------------------

_FD1 = {
    2: ((-1, 1), (-0.5, 0.5)),
    4: ((-2, -1, 1, 2), (1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0)),
}


@dataclass(frozen=True)
class FieldPatch:
    """(eps, u^i) sampled on a uniform 4D spacetime lattice around a point.

    ``eps`` has shape (n, n, n, n) with odd n; ``u`` has shape (3, n, n, n, n).
    ``spacing`` is the lattice spacing per axis (scalar or length 4).
    """

    eps: np.ndarray
    u: np.ndarray
    spacing: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eps", np.asarray(self.eps, dtype=float))
        object.__setattr__(self, "u", np.asarray(self.u, dtype=float))
        h = np.asarray(self.spacing, dtype=float)
        if h.ndim == 0:
            h = np.full(4, float(h))
        object.__setattr__(self, "spacing", h)
        n = self.eps.shape[0]
        if self.eps.shape != (n, n, n, n) or n % 2 == 0:
            raise StencilError("patch must be cubical with odd side length")
        if self.u.shape != (3,) + self.eps.shape:
            raise StencilError("u must have shape (3,) + eps.shape")

    @property
    def half_width(self):
        return self.eps.shape[0] // 2

    @classmethod
    def from_function(cls, fn, t, x, h, half_width):
        """Sample ``fn(t, x3) -> (eps, u_spatial)`` on a lattice.

        ``x`` is the spatial position (3,), ``h`` the spacing (scalar or per
        axis), ``half_width`` the number of nodes on each side of the center.
        """
        x = np.asarray(x, dtype=float)
        h = np.asarray(h, dtype=float)
        if h.ndim == 0:
            h = np.full(4, float(h))
        n = 2 * half_width + 1
        eps = np.empty((n, n, n, n))
        u = np.empty((3, n, n, n, n))
        offs = np.arange(-half_width, half_width + 1)
        for i0, o0 in enumerate(offs):
            for i1, o1 in enumerate(offs):
                for i2, o2 in enumerate(offs):
                    for i3, o3 in enumerate(offs):
                        pt = x + h[1:] * np.array([o1, o2, o3])
                        e, v = fn(t + h[0] * o0, pt)
                        eps[i0, i1, i2, i3] = e
                        u[:, i0, i1, i2, i3] = v
        return cls(eps=eps, u=u, spacing=h)


def _patch_state(patch: FieldPatch, idx, order) -> FluidPointState:
    """Fluid state at lattice node ``idx`` with FD first derivatives."""
    offsets, weights = _FD1[order]
    idx = tuple(idx)
    n = patch.eps.shape[0]
    reach = max(abs(o) for o in offsets)
    if any(i - reach < 0 or i + reach >= n for i in idx):
        raise StencilError("node too close to the patch boundary for FD")
    deps = np.zeros(4)
    dv = np.zeros((4, 3))
    for axis in range(4):
        for off, wgt in zip(offsets, weights):
            j = list(idx)
            j[axis] += off
            j = tuple(j)
            deps[axis] += wgt * patch.eps[j]
            dv[axis] += wgt * patch.u[(slice(None),) + j]
        deps[axis] /= patch.spacing[axis]
        dv[axis] /= patch.spacing[axis]
    v = patch.u[(slice(None),) + idx]
    return FluidPointState.from_spatial(patch.eps[idx], v, deps, dv)


def divergence_residual(patch: FieldPatch, model: TransportModel, order: int = 4):
    """Numerical div(T)_b = d_a T^a_b at the patch center (lowered index).

    The stress tensor is evaluated on an inner stencil (each evaluation uses
    its own FD first derivatives) and then differenced.  Converges to zero at
    the FD order on exact solutions.
    """
    if order not in _FD1:
        raise ValueError("order must be 2 or 4")
    offsets, weights = _FD1[order]
    reach = max(abs(o) for o in offsets)
    if patch.half_width < 2 * reach:
        raise StencilError(
            f"patch half-width {patch.half_width} < {2 * reach} required for order {order}"
        )
    center = [patch.half_width] * 4
    residual = np.zeros(4)
    for axis in range(4):
        for off, wgt in zip(offsets, weights):
            idx = list(center)
            idx[axis] += off
            state = _patch_state(patch, idx, order)
            coeffs = evaluate(model, state.eps)
            t_mixed = METRIC @ stress_energy(state, coeffs)  # T^a_b
            residual += wgt * t_mixed[axis] / patch.spacing[axis]
    return residual
