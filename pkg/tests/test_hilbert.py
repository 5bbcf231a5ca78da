import numpy as np
import pytest

from conftest import random_state
from hyperbell.errors import ConfigurationError
from hyperbell.hilbert import (
    POL_H,
    POL_L,
    POL_R,
    POL_V,
    Detector,
    HybridState,
    ProjectorSet,
    SpinX,
    StateLayout,
    apply_single_photon_op,
    apply_spin_conditional_op,
    format_state,
    measure,
    overlap,
    product_state,
    zero_state,
)

SQ2 = np.sqrt(2.0)


class TestPolarizationBasis:
    def test_linear_basis_from_circular(self):
        np.testing.assert_allclose(POL_H, (POL_R + POL_L) / SQ2)
        np.testing.assert_allclose(POL_V, (POL_R - POL_L) / SQ2)

    def test_round_trip_is_identity(self):
        # circular -> linear -> circular
        h = np.array([[1, 1], [1, -1]]) / SQ2
        np.testing.assert_allclose(h @ h, np.eye(2), atol=1e-15)

    def test_linear_basis_orthonormal(self):
        assert abs(np.vdot(POL_H, POL_V)) < 1e-15
        assert abs(np.vdot(POL_H, POL_H) - 1) < 1e-15


class TestLayout:
    def test_shape(self, small_layout):
        assert small_layout.shape == (2, 2, 2, 2, 2, 2)
        assert small_layout.dim == 64

    def test_unknown_path_rejected(self, small_layout):
        with pytest.raises(ConfigurationError):
            small_layout.path_index("A", "zz")
        with pytest.raises(ConfigurationError):
            small_layout.path_index("C", "a1")

    def test_duplicate_paths_rejected(self):
        with pytest.raises(ConfigurationError):
            StateLayout(photons=("A", "B"), paths=(("a1", "a1"), ("b1",)))


class TestApplySinglePhotonOp:
    def test_identity_is_bit_identical(self, small_layout, rng):
        state = random_state(small_layout, rng)
        out = apply_single_photon_op(state, "A", np.eye(4, dtype=complex))
        assert np.array_equal(out.amps, state.amps)

    def test_polarization_bit_flip(self, small_layout):
        # Z = |R><L| + |L><R| on every path of photon A
        state = product_state(small_layout, "R", "a1", "R", "b1")
        z = np.kron(np.array([[0, 1], [1, 0]]), np.eye(2)).astype(complex)
        out = apply_single_photon_op(state, "A", z)
        expected = product_state(small_layout, "L", "a1", "R", "b1")
        np.testing.assert_allclose(out.amps, expected.amps, atol=1e-15)

    def test_contraction_never_grows_norm(self, small_layout, rng):
        # brute-force oracle: embed the op in the full space and compare
        for _ in range(50):
            state = random_state(small_layout, rng)
            m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            u, s, vh = np.linalg.svd(m)
            op = u @ np.diag(np.minimum(s, 1.0)) @ vh
            out = apply_single_photon_op(state, "A", op)
            assert out.norm2 <= 1 + 1e-12
            full = np.kron(op, np.eye(16, dtype=complex))
            oracle = full @ state.amps.reshape(-1)
            np.testing.assert_allclose(out.amps.reshape(-1), oracle, atol=1e-12)

    def test_photon_b_oracle(self, small_layout, rng):
        # same embedding oracle for the second photon slot
        state = random_state(small_layout, rng)
        m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        out = apply_single_photon_op(state, "B", m)
        moved = np.moveaxis(state.amps, (2, 3), (0, 1)).reshape(4, -1)
        oracle = np.moveaxis((m @ moved).reshape(2, 2, 2, 2, 2, 2), (0, 1), (2, 3))
        np.testing.assert_allclose(out.amps, oracle, atol=1e-12)

    def test_wrong_shape_rejected(self, small_layout, rng):
        with pytest.raises(ConfigurationError):
            apply_single_photon_op(random_state(small_layout, rng), "A", np.eye(6))

    def test_linearity(self, small_layout, rng):
        for _ in range(20):
            x = random_state(small_layout, rng)
            y = random_state(small_layout, rng)
            a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
            op = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            lhs = apply_single_photon_op(
                HybridState(small_layout, a * x.amps + b * y.amps), "A", op)
            rhs = (a * apply_single_photon_op(x, "A", op).amps
                   + b * apply_single_photon_op(y, "A", op).amps)
            np.testing.assert_allclose(lhs.amps, rhs, atol=1e-12)


class TestApplySpinConditionalOp:
    def test_diagonal_reflection_on_r_up(self, small_layout):
        r_o, r_h = -0.8 + 0.1j, 0.9 - 0.2j
        op = np.diag([r_o, r_h, r_h, r_o])
        state = product_state(small_layout, "R", "a1", "R", "b1", "up", "up")
        out = apply_spin_conditional_op(state, "A", 1, op, "a1")
        np.testing.assert_allclose(out.amps, r_o * state.amps, atol=1e-15)

    def test_disjoint_path_untouched(self, small_layout):
        op = np.diag([-1.0, 1.0, 1.0, -1.0]).astype(complex)
        state = product_state(small_layout, "R", "a2", "R", "b1", "up", "up")
        out = apply_spin_conditional_op(state, "A", 1, op, "a1")
        assert np.array_equal(out.amps, state.amps)

    def test_ideal_reflection_squares_to_identity(self, small_layout, rng):
        # oracle: the matrix square, computed independently
        op = np.diag([-1.0, 1.0, 1.0, -1.0]).astype(complex)
        np.testing.assert_allclose(op @ op, np.eye(4), atol=1e-15)
        state = random_state(small_layout, rng)
        out = apply_spin_conditional_op(
            apply_spin_conditional_op(state, "A", 1, op, "a1"), "A", 1, op, "a1")
        np.testing.assert_allclose(out.amps, state.amps, atol=1e-12)

    def test_acts_on_chosen_spin(self, small_layout):
        op = np.diag([1.0, -1.0, -1.0, 1.0]).astype(complex)  # pol_z (x) spin_z
        state = product_state(small_layout, "R", "a1", "R", "b1", "+", "+")
        out = apply_spin_conditional_op(state, "A", 2, op, "a1")
        expected = product_state(small_layout, "R", "a1", "R", "b1", "+", "-")
        np.testing.assert_allclose(out.amps, expected.amps, atol=1e-15)


class TestMeasure:
    def test_spin_x_eigenstate(self, small_layout):
        state = product_state(small_layout, "R", "a1", "R", "b1", "+", "+")
        branches = measure(state, SpinX(1))
        assert len(branches) == 1
        assert branches[0].record == (("spin1", "+"),)
        assert abs(branches[0].probability - 1.0) < 1e-12

    def test_spin_x_on_up_is_fifty_fifty(self, small_layout):
        state = product_state(small_layout, "R", "a1", "R", "b1", "up", "+")
        branches = measure(state, SpinX(1))
        assert sorted(b.record[0][1] for b in branches) == ["+", "-"]
        for b in branches:
            assert abs(b.probability - 0.5) < 1e-12
            assert abs(b.residual.norm2 - 1.0) < 1e-12

    def test_generated_state_gives_four_quarter_branches(self, small_layout):
        # the four-term hyperentangled output, spins correlated with the state
        from hyperbell.protocols import Bell, make_bell

        terms = [
            (Bell.PHI_PLUS, Bell.PHI_PLUS, ("+", "+")),
            (Bell.PSI_MINUS, Bell.PSI_MINUS, ("+", "-")),
            (Bell.PSI_PLUS, Bell.PHI_MINUS, ("-", "+")),
            (Bell.PHI_MINUS, Bell.PSI_PLUS, ("-", "-")),
        ]
        amps = sum(0.5 * make_bell(p, s, small_layout, spins=sp).amps
                   for p, s, sp in terms)
        state = HybridState(small_layout, amps)
        assert abs(state.norm2 - 1.0) < 1e-12
        joint = []
        for b1 in measure(state, SpinX(1)):
            for b2 in measure(b1.residual, SpinX(2)):
                joint.append((b1.record + b2.record,
                              b1.probability * b2.probability))
        assert len(joint) == 4
        for _, p in joint:
            assert abs(p - 0.25) < 1e-10

    def test_detector_click_and_no_click(self, small_layout):
        state = product_state(small_layout, "R", {"a1": 1 / SQ2, "a2": 1j / SQ2},
                              "R", "b1")
        branches = measure(state, Detector("A", "a1", "D"))
        by_outcome = {b.record[0][1]: b for b in branches}
        assert abs(by_outcome["click"].probability - 0.5) < 1e-12
        assert abs(by_outcome["no_click"].probability - 0.5) < 1e-12

    def test_completeness_preserves_subnormalized_weight(self, small_layout, rng):
        state = random_state(small_layout, rng)
        state = HybridState(small_layout, 0.7 * state.amps)
        branches = measure(state, SpinX(2))
        assert abs(sum(b.probability for b in branches) - state.norm2) < 1e-10

    def test_projector_set(self, small_layout):
        dim = small_layout.dim
        p0 = np.zeros((dim, dim), dtype=complex)
        p0[0, 0] = 1.0
        outcomes = (("first", p0), ("rest", np.eye(dim) - p0))
        state = random_state(small_layout, np.random.default_rng(3))
        branches = measure(state, ProjectorSet(outcomes))
        assert abs(sum(b.probability for b in branches) - 1.0) < 1e-10

    def test_non_orthogonal_projectors_rejected(self, small_layout, rng):
        dim = small_layout.dim
        p0 = np.zeros((dim, dim), dtype=complex)
        p0[0, 0] = 1.0
        p0[0, 1] = 0.5  # not a projector, set not orthogonal
        state = random_state(small_layout, rng)
        with pytest.raises(ConfigurationError):
            measure(state, ProjectorSet((("bad", p0), ("rest", np.eye(dim) - p0))))

    def test_incomplete_projectors_rejected(self, small_layout, rng):
        dim = small_layout.dim
        p0 = np.zeros((dim, dim), dtype=complex)
        p0[0, 0] = 1.0
        state = random_state(small_layout, rng)
        with pytest.raises(ConfigurationError):
            measure(state, ProjectorSet((("only", p0),)))


class TestOverlap:
    def test_self_overlap_of_normalized_state(self, small_layout, rng):
        x = random_state(small_layout, rng)
        assert abs(overlap(x, x) - 1.0) < 1e-12

    def test_orthogonal_bell_states(self, small_layout):
        from hyperbell.protocols import Bell, make_bell

        a = make_bell(Bell.PHI_PLUS, Bell.PHI_PLUS, small_layout)
        b = make_bell(Bell.PHI_MINUS, Bell.PHI_PLUS, small_layout)
        assert abs(overlap(a, b)) < 1e-15

    def test_block_output_matches_target(self, small_layout):
        # ideal heralded block output vs |R>|phi->
        from hyperbell.blocks import BlockConfig, heralded_block
        from hyperbell.cavity import IDEAL_PAIR

        state = product_state(small_layout, "L", "a1", "R", "b1", "+", "+")
        branches = heralded_block(state, "A", "a1",
                                  BlockConfig(qd=1, pair=IDEAL_PAIR))
        assert len(branches) == 1  # herald branch has zero probability
        target = product_state(small_layout, "R", "a1", "R", "b1", "-", "+")
        assert abs(abs(overlap(target, branches[0].residual)) - 1.0) < 1e-12

    def test_layout_mismatch_rejected(self, small_layout, rng):
        other = StateLayout(photons=("A", "B"), paths=(("a1",), ("b1",)))
        with pytest.raises(ConfigurationError):
            overlap(random_state(small_layout, rng),
                    product_state(other, "R", "a1", "R", "b1"))


class TestFormatState:
    def test_single_term(self, small_layout):
        state = product_state(small_layout, "R", "a1", "L", "b2", "+", "-")
        text = format_state(state)
        assert text == "+1.000000|R a1; L b2; +->"

    def test_zero_state(self, small_layout):
        assert format_state(zero_state(small_layout)) == "0"
