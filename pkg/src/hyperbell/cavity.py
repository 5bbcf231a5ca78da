"""Reflection coefficients of the single-sided quantum-dot microcavity.

All rates are expressed in units of kappa and all frequencies as
detunings in units of kappa. The hot-cavity coefficient comes from the
steady-state weak-excitation solution of the input-output relations;
the cold-cavity coefficient is its g = 0 reduction. The raw complex
values are applied directly (no inserted minus signs): at resonance r_o
is negative and r_h positive, so the pi phase difference between cold
and hot reflection emerges automatically.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NumericDomainError


@dataclass(frozen=True)
class CavityParams:
    """Physical cavity parameters (rates in units of kappa)."""

    g: float                 # QD-cavity coupling strength
    kappa: float = 1.0       # cavity decay rate (reference unit)
    kappa_s: float = 0.0     # side-leakage rate
    gamma: float = 0.0       # exciton decay rate
    omega: float = 0.0       # input photon frequency (as detuning)
    omega_c: float = 0.0     # cavity frequency
    omega_x: float = 0.0     # trion transition frequency

    def __post_init__(self):
        if not self.kappa > 0:
            raise ConfigurationError("kappa must be positive")
        if self.kappa_s < 0 or self.gamma < 0 or self.g < 0:
            raise ConfigurationError("kappa_s, gamma and g must be non-negative")


@dataclass(frozen=True)
class ReflectionPair:
    """Cold (r_o) and hot (r_h) complex reflection coefficients."""

    r_o: complex
    r_h: complex

    @property
    def phi_o(self) -> float:
        return cmath.phase(self.r_o)

    @property
    def phi_h(self) -> float:
        return cmath.phase(self.r_h)

    @property
    def success_amplitude(self) -> complex:
        """Per-passage amplitude of the transmitted (spin-flipping) component."""
        return (self.r_o - self.r_h) / 2

    @property
    def herald_amplitude(self) -> complex:
        """Per-passage amplitude of the unchanged (error) component."""
        return (self.r_o + self.r_h) / 2


#: Lossless strong-coupling limit: full cold reflection with a pi phase,
#: full hot reflection without one.
IDEAL_PAIR = ReflectionPair(r_o=-1.0 + 0.0j, r_h=1.0 + 0.0j)


@dataclass(frozen=True)
class DephasingParams:
    """Cavity photon lifetime tau and trion coherence time Gamma (picoseconds)."""

    tau: float
    big_gamma: float

    def __post_init__(self):
        if not (self.tau >= 0 and self.big_gamma > 0):
            raise ConfigurationError("tau must be >= 0 and Gamma > 0")


def reflection_coefficients(params: CavityParams) -> ReflectionPair:
    """Evaluate the cold and hot reflection coefficients for a parameter set.

    Raises NumericDomainError if the hot-cavity denominator vanishes
    exactly. At g = 0 the hot coefficient reduces to the cold one and is
    returned bit-identically.
    """
    y = 1j * (params.omega_c - params.omega) + (params.kappa + params.kappa_s) / 2
    r_o = (1j * (params.omega_c - params.omega)
           - params.kappa / 2 + params.kappa_s / 2) / y
    if params.g == 0:
        return ReflectionPair(r_o=r_o, r_h=r_o)
    x = 1j * (params.omega_x - params.omega) + params.gamma / 2
    denom = x * y + params.g ** 2
    if denom == 0:
        raise NumericDomainError(
            f"hot-cavity denominator vanishes for parameters {params}")
    r_h = 1 - params.kappa * x / denom
    return ReflectionPair(r_o=r_o, r_h=r_h)


def reflection_operator(pair: ReflectionPair) -> np.ndarray:
    """Spin-selective reflection map on {R up, R down, L up, L down}.

    The uncoupled transitions (R, up) and (L, down) pick up r_o; the
    coupled ones (R, down) and (L, up) pick up r_h.
    """
    return np.diag([pair.r_o, pair.r_h, pair.r_h, pair.r_o]).astype(complex)


def dephasing_penalty(d: DephasingParams) -> float:
    """Fidelity reduction 1 - exp(-tau/Gamma) from exciton dephasing."""
    return float(1.0 - np.exp(-d.tau / d.big_gamma))
