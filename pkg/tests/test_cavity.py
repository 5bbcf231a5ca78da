import cmath
import math

import mpmath
import numpy as np
import pytest

from hyperbell.cavity import (
    CavityParams,
    DephasingParams,
    IDEAL_PAIR,
    ReflectionPair,
    dephasing_penalty,
    reflection_coefficients,
    reflection_operator,
)
from hyperbell.errors import ConfigurationError


def mp_reflection(g, kappa, kappa_s, gamma, omega, omega_c, omega_x):
    """High-precision evaluation of the steady-state reflection coefficient."""
    with mpmath.workdps(50):
        x = mpmath.mpc(gamma / 2, omega_x - omega)
        y = mpmath.mpc((kappa + kappa_s) / 2, omega_c - omega)
        r = 1 - kappa * x / (x * y + g ** 2)
        return complex(r)


class TestReflectionCoefficients:
    def test_cold_cavity_at_resonance_is_minus_one(self):
        pair = reflection_coefficients(CavityParams(g=0.0))
        assert pair.r_o == -1.0 + 0.0j
        assert pair.r_h == -1.0 + 0.0j

    def test_hot_cavity_example(self):
        # g = kappa, gamma = 0.1 kappa, no leakage, resonance: r_h = 39/41
        pair = reflection_coefficients(CavityParams(g=1.0, gamma=0.1))
        oracle = mp_reflection(1.0, 1.0, 0.0, 0.1, 0.0, 0.0, 0.0)
        assert abs(pair.r_h - oracle) < 1e-15
        assert abs(pair.r_h - 39 / 41) < 1e-15
        assert abs(pair.r_h.real - 0.951220) < 1e-6

    def test_oracle_agreement_off_resonance(self):
        params = CavityParams(g=0.7, kappa_s=0.3, gamma=0.2,
                              omega=0.4, omega_c=-0.1, omega_x=0.25)
        pair = reflection_coefficients(params)
        oracle = mp_reflection(0.7, 1.0, 0.3, 0.2, 0.4, -0.1, 0.25)
        assert abs(pair.r_h - oracle) < 1e-14

    def test_strong_coupling_phase_difference_is_pi(self):
        pair = reflection_coefficients(CavityParams(g=5.0, gamma=0.1))
        assert abs(pair.r_o) > 0.999
        assert abs(pair.r_h) > 0.99
        diff = (pair.phi_h - pair.phi_o) % (2 * math.pi)
        assert abs(diff - math.pi) < 1e-12

    def test_invalid_params_rejected(self):
        with pytest.raises(ConfigurationError):
            CavityParams(g=1.0, kappa=0.0)
        with pytest.raises(ConfigurationError):
            CavityParams(g=-1.0)
        with pytest.raises(ConfigurationError):
            CavityParams(g=1.0, gamma=-0.1)

    def test_moduli_bounded_over_random_physical_parameters(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            params = CavityParams(
                g=float(rng.uniform(0, 5)),
                kappa_s=float(rng.uniform(0, 3)),
                gamma=float(rng.uniform(0, 2)),
                omega=float(rng.uniform(-5, 5)),
                omega_c=float(rng.uniform(-5, 5)),
                omega_x=float(rng.uniform(-5, 5)),
            )
            pair = reflection_coefficients(params)
            assert abs(pair.r_o) <= 1 + 1e-12
            assert abs(pair.r_h) <= 1 + 1e-12

    def test_uncoupled_equals_cold_bit_for_bit(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            params = CavityParams(
                g=0.0,
                kappa_s=float(rng.uniform(0, 2)),
                gamma=float(rng.uniform(0, 2)),
                omega=float(rng.uniform(-5, 5)),
                omega_c=float(rng.uniform(-5, 5)),
                omega_x=float(rng.uniform(-5, 5)),
            )
            pair = reflection_coefficients(params)
            assert pair.r_h == pair.r_o

    def test_resonant_coefficients_are_real(self):
        rng = np.random.default_rng(13)
        for _ in range(200):
            pair = reflection_coefficients(CavityParams(
                g=float(rng.uniform(0, 4)),
                kappa_s=float(rng.uniform(0, 2)),
                gamma=float(rng.uniform(0, 2)),
            ))
            assert pair.r_o.imag == 0.0
            assert pair.r_h.imag == 0.0

    def test_lossless_moduli_are_unity(self):
        pair = reflection_coefficients(CavityParams(g=2.0, kappa_s=0.0, gamma=0.0,
                                                    omega=0.7))
        assert abs(abs(pair.r_o) - 1) < 1e-12
        assert abs(abs(pair.r_h) - 1) < 1e-12


class TestReflectionOperator:
    def test_ideal_operator_action(self):
        op = reflection_operator(IDEAL_PAIR)
        np.testing.assert_allclose(op, np.diag([-1, 1, 1, -1]), atol=1e-15)

    def test_equal_pair_gives_identity(self):
        op = reflection_operator(ReflectionPair(r_o=1.0, r_h=1.0))
        np.testing.assert_allclose(op, np.eye(4), atol=1e-15)

    def test_example_pair_matrix(self):
        # oracle: direct substitution of the resonance example values
        pair = reflection_coefficients(CavityParams(g=1.0, gamma=0.1))
        op = reflection_operator(pair)
        np.testing.assert_allclose(
            op, np.diag([-1.0, 0.9512195121951219, 0.9512195121951219, -1.0]),
            atol=1e-12)

    def test_amplitude_split_reconstructs_operator(self):
        pair = reflection_coefficients(CavityParams(g=0.8, kappa_s=0.4, gamma=0.3,
                                                    omega=0.2))
        s, h = pair.success_amplitude, pair.herald_amplitude
        rebuilt = h * np.eye(4) + s * np.diag([1, -1, -1, 1])
        np.testing.assert_allclose(reflection_operator(pair), rebuilt, atol=1e-15)


class TestDephasingPenalty:
    def test_zero_lifetime_means_zero_penalty(self):
        assert dephasing_penalty(DephasingParams(tau=0.0, big_gamma=100.0)) == 0.0

    def test_twenty_over_three_hundred(self):
        # scalar oracle: 1 - exp(-1/15)
        penalty = dephasing_penalty(DephasingParams(tau=20.0, big_gamma=300.0))
        assert abs(penalty - (1.0 - math.exp(-20.0 / 300.0))) < 1e-15
        assert abs(penalty - 0.06449) < 1e-4
        assert penalty < 0.10

    def test_equal_times(self):
        penalty = dephasing_penalty(DephasingParams(tau=300.0, big_gamma=300.0))
        assert abs(penalty - (1.0 - 1.0 / math.e)) < 1e-15

    def test_invalid_rejected(self):
        with pytest.raises(ConfigurationError):
            DephasingParams(tau=1.0, big_gamma=0.0)


class TestPhases:
    def test_phases_follow_complex_arguments(self):
        pair = ReflectionPair(r_o=-0.5 + 0.5j, r_h=0.25 - 0.1j)
        assert pair.phi_o == cmath.phase(-0.5 + 0.5j)
        assert pair.phi_h == cmath.phase(0.25 - 0.1j)
