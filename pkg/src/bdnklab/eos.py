"""Barotropic equations of state and transport-coefficient models.

A model bundles seven strictly positive scalar functions of the energy
density eps > 0 -- the pressure P and the six transport coefficients
(eta, chi1..chi4, lam) -- each paired with its analytic first derivative.
The squared sound speed is cs2 = dP/deps.  The pressure additionally
carries its second derivative so that chain rules through cs2(eps) stay
exact in the evolution module.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DomainError

__all__ = [
    "ScalarFunction",
    "TransportModel",
    "CoefficientSample",
    "CoefficientDerivatives",
    "evaluate",
    "evaluate_derivatives",
    "constant_transport_model",
    "power_law_transport_model",
    "tabulated_transport_model",
]


@dataclass(frozen=True)
class ScalarFunction:
    """A scalar function of eps with its analytic first derivative.

    ``d2f`` is only consulted for the pressure (curvature of P feeds the
    derivative of cs2).
    """

    f: Callable
    df: Callable
    d2f: Callable | None = None

    def __call__(self, eps):
        return self.f(eps)


@dataclass(frozen=True)
class TransportModel:
    """Pressure plus transport coefficients as functions of eps.

    Immutable after construction; evaluation is pure and thread-safe.
    """

    pressure: ScalarFunction
    eta: ScalarFunction
    chi1: ScalarFunction
    chi2: ScalarFunction
    chi3: ScalarFunction
    chi4: ScalarFunction
    lam: ScalarFunction

    def cs2(self, eps):
        """Squared sound speed dP/deps."""
        return self.pressure.df(eps)

    def dcs2(self, eps):
        """Derivative of the squared sound speed, d2P/deps2."""
        if self.pressure.d2f is None:
            raise CoefficientFunctionsIncomplete(
                "pressure has no second derivative; required for dcs2"
            )
        return self.pressure.d2f(eps)


class CoefficientFunctionsIncomplete(DomainError):
    """A derivative required by the caller is not available on this model."""


@dataclass(frozen=True)
class CoefficientSample:
    """All coefficients evaluated at a single energy density."""

    eps: float
    P: float
    cs2: float
    eta: float
    chi1: float
    chi2: float
    chi3: float
    chi4: float
    lam: float

    @property
    def enthalpy(self):
        """eps + P, the enthalpy density."""
        return self.eps + self.P


@dataclass(frozen=True)
class CoefficientDerivatives:
    """d/deps of every coefficient at a single energy density."""

    dP: float
    dcs2: float
    deta: float
    dchi1: float
    dchi2: float
    dchi3: float
    dchi4: float
    dlam: float


def evaluate(model: TransportModel, eps) -> CoefficientSample:
    """Evaluate all coefficients at ``eps``.

    Raises DomainError for eps <= 0 (vacuum/degenerate states are outside
    the model domain) and for non-finite or non-positive outputs.
    """
    eps = np.asarray(eps, dtype=float)
    if not np.all(np.isfinite(eps)) or np.any(eps <= 0.0):
        raise DomainError(f"energy density must be positive and finite, got {eps}")
    sample = CoefficientSample(
        eps=_item(eps),
        P=_item(model.pressure(eps)),
        cs2=_item(model.cs2(eps)),
        eta=_item(model.eta(eps)),
        chi1=_item(model.chi1(eps)),
        chi2=_item(model.chi2(eps)),
        chi3=_item(model.chi3(eps)),
        chi4=_item(model.chi4(eps)),
        lam=_item(model.lam(eps)),
    )
    for name in ("P", "cs2", "eta", "chi1", "chi2", "chi3", "chi4", "lam"):
        value = getattr(sample, name)
        if not np.all(np.isfinite(value)) or np.any(np.asarray(value) <= 0.0):
            raise DomainError(f"coefficient {name} not positive/finite at eps={eps}")
    return sample


def evaluate_derivatives(model: TransportModel, eps) -> CoefficientDerivatives:
    """d/deps of every coefficient at ``eps`` (analytic, not differenced)."""
    eps = np.asarray(eps, dtype=float)
    if not np.all(np.isfinite(eps)) or np.any(eps <= 0.0):
        raise DomainError(f"energy density must be positive and finite, got {eps}")
    return CoefficientDerivatives(
        dP=_item(model.pressure.df(eps)),
        dcs2=_item(model.dcs2(eps)),
        deta=_item(model.eta.df(eps)),
        dchi1=_item(model.chi1.df(eps)),
        dchi2=_item(model.chi2.df(eps)),
        dchi3=_item(model.chi3.df(eps)),
        dchi4=_item(model.chi4.df(eps)),
        dlam=_item(model.lam.df(eps)),
    )


def _item(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def _constant(value: float) -> ScalarFunction:
    v = float(value)
    return ScalarFunction(
        f=lambda eps, v=v: np.full_like(np.asarray(eps, dtype=float), v),
        df=lambda eps: np.zeros_like(np.asarray(eps, dtype=float)),
        d2f=lambda eps: np.zeros_like(np.asarray(eps, dtype=float)),
    )


def _power_law(coef: float, exponent: float) -> ScalarFunction:
    c, p = float(coef), float(exponent)
    return ScalarFunction(
        f=lambda eps: c * np.asarray(eps, dtype=float) ** p,
        df=lambda eps: c * p * np.asarray(eps, dtype=float) ** (p - 1.0),
        d2f=lambda eps: c * p * (p - 1.0) * np.asarray(eps, dtype=float) ** (p - 2.0),
    )


def _as_scalar_function(spec) -> ScalarFunction:
    if isinstance(spec, ScalarFunction):
        return spec
    if isinstance(spec, (tuple, list)) and len(spec) == 2:
        return _power_law(spec[0], spec[1])
    return _constant(spec)


def constant_transport_model(
    cs2: float = 1.0 / 3.0,
    eta: float = 0.5,
    chi1: float = 1.0,
    chi2: float = 1.0,
    chi3: float = 0.3,
    chi4: float = 2.0 / 3.0 + 0.01,
    lam: float = 1.0,
) -> TransportModel:
    """Linear equation of state P = cs2 * eps with constant transport values.

    Defaults form a coefficient set that satisfies every causality condition.
    """
    return TransportModel(
        pressure=_power_law(cs2, 1.0),
        eta=_constant(eta),
        chi1=_constant(chi1),
        chi2=_constant(chi2),
        chi3=_constant(chi3),
        chi4=_constant(chi4),
        lam=_constant(lam),
    )


def power_law_transport_model(
    kappa: float,
    gamma: float,
    eta=0.5,
    chi1=1.0,
    chi2=1.0,
    chi3=0.3,
    chi4=2.0 / 3.0 + 0.01,
    lam=1.0,
) -> TransportModel:
    """P = kappa * eps**gamma; transports constant or (coef, exponent) power laws."""
    return TransportModel(
        pressure=_power_law(kappa, gamma),
        eta=_as_scalar_function(eta),
        chi1=_as_scalar_function(chi1),
        chi2=_as_scalar_function(chi2),
        chi3=_as_scalar_function(chi3),
        chi4=_as_scalar_function(chi4),
        lam=_as_scalar_function(lam),
    )


def _tabulated(eps_table, values) -> ScalarFunction:
    eps_table = np.asarray(eps_table, dtype=float)
    values = np.asarray(values, dtype=float)
    if eps_table.ndim != 1 or eps_table.shape != values.shape:
        raise DomainError("table columns must be one-dimensional and equal length")
    if np.any(np.diff(eps_table) <= 0.0):
        raise DomainError("table eps column must be strictly increasing")
    interp = PchipInterpolator(eps_table, values)
    return ScalarFunction(
        f=interp,
        df=interp.derivative(1),
        d2f=interp.derivative(2),
    )


def tabulated_transport_model(eps_table, pressure_table, **transports) -> TransportModel:
    """Monotone-cubic interpolated model from a two-column (eps, P) table.

    Transport coefficients may be constants or ``(eps_table, value_table)``
    pairs.  Derivatives are derivatives of the interpolant, not of the data,
    and the interpolant is only piecewise smooth (outside the analyticity
    hypotheses of the causality theory; flagged, not rejected).
    """
    kwargs = {}
    for name in ("eta", "chi1", "chi2", "chi3", "chi4", "lam"):
        spec = transports.get(name)
        if spec is None:
            raise DomainError(f"tabulated model needs a value or table for {name}")
        if isinstance(spec, (tuple, list)) and len(spec) == 2 and np.ndim(spec[0]) == 1:
            kwargs[name] = _tabulated(spec[0], spec[1])
        else:
            kwargs[name] = _as_scalar_function(spec)
    return TransportModel(pressure=_tabulated(eps_table, pressure_table), **kwargs)
