"""Solver tests.

The 2-link analytic oracle: with link lengths (a, b) and a target T, the
middle joint must land on the circle where the spheres of radius a around
the base and radius b around T intersect. Distance to that circle is the
solver's true positional error, independent of which of the infinitely
many valid elbows it picked.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vofabrik.chain import ChainModel, JointLimits, state_from_angles
from vofabrik.fabrik import (
    DegenerateDirection,
    FabrikConfig,
    SolveStatus,
    backward_step,
    forward_step,
    solve,
)

UNLIMITED = JointLimits.unlimited()


def chain(n, length=1.0, limits=None):
    return ChainModel(
        base=(0.0, 0.0, 0.0),
        base_direction=(1.0, 0.0, 0.0),
        links=[(length, 0.0)] * n,
        limits=[limits or UNLIMITED] * n,
    )


def distance_to_elbow_circle(p1, target, a, b):
    """Distance from p1 to the circle of exact 2-link solutions."""
    t = np.asarray(target, dtype=float)
    d = float(np.linalg.norm(t))
    axis = t / d
    along = (a * a - b * b + d * d) / (2.0 * d)
    radius = math.sqrt(max(a * a - along * along, 0.0))
    axial = float(np.dot(p1, axis))
    perp = float(np.linalg.norm(p1 - axial * axis))
    return math.hypot(axial - along, perp - radius)


class TestReachingSteps:
    def test_backward_collinear_shrink(self):
        out = backward_step((0.0, 0.0, 0.0), (2.0, 0.0, 0.0), 1.0)
        np.testing.assert_allclose(out, [1.0, 0.0, 0.0], atol=1e-15)

    def test_backward_normalizes_direction(self):
        out = backward_step((0.0, 0.0, 0.0), (0.0, 3.0, 4.0), 1.0)
        np.testing.assert_allclose(out, [0.0, 0.6, 0.8], atol=1e-15)

    def test_forward_collinear_shrink(self):
        out = forward_step((0.0, 0.0, 0.0), (0.0, 0.0, 5.0), 2.0)
        np.testing.assert_allclose(out, [0.0, 0.0, 2.0], atol=1e-15)

    def test_coincident_points_raise(self):
        with pytest.raises(DegenerateDirection):
            backward_step((1.0, 1.0, 1.0), (1.0, 1.0, 1.0), 0.5)

    @given(
        st.tuples(*[st.floats(-5, 5) for _ in range(3)]),
        st.tuples(*[st.floats(-5, 5) for _ in range(3)]),
        st.floats(min_value=0.01, max_value=3.0),
    )
    @settings(max_examples=300, deadline=None)
    def test_result_at_exact_link_length(self, anchor, toward, length):
        a = np.array(anchor)
        t = np.array(toward)
        if np.linalg.norm(t - a) < 1e-6:
            return
        out = backward_step(a, t, length)
        assert np.linalg.norm(out - a) == pytest.approx(length, abs=1e-12)
        # forward_step is the same reach, mirrored naming
        assert np.array_equal(forward_step(a, t, length), out)


class TestSolve:
    def test_target_already_reached(self):
        model = chain(3)
        state = state_from_angles(model, np.zeros((3, 2)))
        out = solve(model, state, state.positions[-1])
        assert out.status is SolveStatus.CONVERGED
        assert out.iterations == 0
        assert np.array_equal(out.state.positions, state.positions)

    def test_two_link_elbow_lands_on_solution_circle(self):
        model = chain(2)
        state = state_from_angles(model, np.zeros((2, 2)))
        cfg = FabrikConfig(epsilon=1e-4)
        out = solve(model, state, (1.0, 1.0, 0.0), cfg)
        assert out.status is SolveStatus.CONVERGED
        assert out.residual < 1e-4
        assert distance_to_elbow_circle(
            out.state.positions[1], (1.0, 1.0, 0.0), 1.0, 1.0
        ) < 1e-3

    def test_fully_extended_target(self):
        # full extension is the solver's singular direction: convergence is
        # linear with a rate that degrades to ~1 at the reach boundary, so
        # give it a generous budget and expect the straight-line pose
        model = chain(4, length=0.5)
        state = state_from_angles(
            model, np.column_stack([np.full(4, 0.2), np.full(4, -0.3)])
        )
        out = solve(model, state, (2.0, 0.0, 0.0), FabrikConfig(max_iterations=1000))
        assert out.status is SolveStatus.CONVERGED
        np.testing.assert_allclose(
            out.state.positions[-1], [2.0, 0.0, 0.0], atol=2e-3
        )

    def test_out_of_reach_is_infeasible_with_stretched_state(self):
        model = chain(3)
        state = state_from_angles(model, np.zeros((3, 2)))
        target = np.array([0.0, 5.0, 0.0])
        out = solve(model, state, target)
        assert out.status is SolveStatus.INFEASIBLE
        assert out.iterations == 1
        # cannot do better than the reach deficit, and one stretch iteration
        # should get close to it
        assert 5.0 - 3.0 - 1e-12 <= out.residual <= 5.0 - 3.0 + 0.1
        out.state.validate(model)

    def test_tight_limits_hit_iteration_budget(self):
        model = chain(2, limits=JointLimits.symmetric(0.1, 0.1))
        state = state_from_angles(model, np.zeros((2, 2)))
        out = solve(model, state, (0.0, 2.0, 0.0), FabrikConfig(max_iterations=25))
        assert out.status is SolveStatus.MAX_ITERATIONS
        assert out.iterations == 25
        out.state.validate(model)
        for j in range(2):
            assert model.limits[j].contains(*out.state.angles[j], tol=1e-9)

    def test_deterministic_rerun_bit_identical(self):
        model = chain(6, length=0.4)
        state = state_from_angles(model, np.full((6, 2), 0.1))
        a = solve(model, state, (1.0, 0.8, 0.3))
        b = solve(model, state.copy(), np.array([1.0, 0.8, 0.3]))
        assert a.status == b.status and a.iterations == b.iterations
        assert a.state.positions.tobytes() == b.state.positions.tobytes()
        assert a.state.angles.tobytes() == b.state.angles.tobytes()

    def test_random_reachable_targets_converge(self):
        # convergence is statistical: rare awkward geometries run out of
        # iterations while still closing in, so allow a 1% budget and
        # require stragglers to be nearly there
        stragglers = []
        for seed in range(200):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(3, 8))
            model = chain(n, length=0.5)
            state = state_from_angles(model, np.zeros((n, 2)))
            # bias targets into the comfortably reachable shell
            radius = rng.uniform(0.3, 0.9) * model.total_length
            direction = rng.normal(size=3)
            direction /= np.linalg.norm(direction)
            target = model.base + radius * direction
            out = solve(model, state, target)
            out.state.validate(model)
            if out.status is not SolveStatus.CONVERGED:
                stragglers.append((seed, out.residual))
            else:
                assert out.residual < 1e-3
        assert len(stragglers) <= 2, stragglers
        assert all(residual < 1e-2 for _, residual in stragglers), stragglers

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_residual_monotone_without_limits(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 8))
        model = chain(n, length=0.5)
        angles = np.column_stack(
            [rng.uniform(-0.8, 0.8, n), rng.uniform(-0.8, 0.8, n)]
        )
        state = state_from_angles(model, angles)
        target = model.base + rng.uniform(0.2, 0.95) * model.total_length * _unit(rng)
        residuals = []
        lengths_ok = []

        def watch(iteration, backward_positions, st_after):
            residuals.append(float(np.linalg.norm(st_after.positions[-1] - target)))
            for pos in (backward_positions, st_after.positions):
                seg = np.linalg.norm(np.diff(pos, axis=0), axis=1)
                lengths_ok.append(float(np.max(np.abs(seg - model.lengths))))

        solve(model, state, target, FabrikConfig(max_iterations=30), on_iteration=watch)
        assert residuals, "solver took no iterations"
        for before, after in zip(residuals, residuals[1:]):
            assert after <= before + 1e-12
        assert max(lengths_ok) < 1e-9

    def test_limits_respected_every_iteration(self):
        limits = JointLimits.symmetric(0.6, 0.6)
        model = chain(4, limits=limits)
        state = state_from_angles(model, np.zeros((4, 2)))

        def watch(iteration, backward_positions, st_after):
            for j in range(4):
                assert limits.contains(*st_after.angles[j], tol=1e-9)

        solve(model, state, (0.5, 2.0, 1.0), on_iteration=watch)


def _unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)
