"""Reach targets with the FABRIK solver and watch it converge.

The solver alternates backward and forward sweeps, re-anchoring the tip
at the target and the base at its mount, and clamps every joint to its
limits after each positional move. Link lengths are preserved exactly
at every iteration, so the solutions are honest poses.
"""

import numpy as np

from vofabrik import ChainModel, JointLimits, SolveStatus, solve, state_from_angles

np.set_printoptions(precision=4, suppress=True)

model = ChainModel(
    base=(0.0, 0.0, 0.0),
    base_direction=(1.0, 0.0, 0.0),
    links=[(0.10, 0.0)] * 6,
    limits=[JointLimits.unlimited()] * 6,
)
home = state_from_angles(model, np.zeros((6, 2)))

# a comfortable target inside the workspace
target = np.array([0.32, 0.18, 0.21])
history = []
out = solve(
    model,
    home,
    target,
    on_iteration=lambda it, back, st: history.append(
        float(np.linalg.norm(st.positions[-1] - target))
    ),
)
print("status:", out.status.value)
print("iterations:", out.iterations, " final residual:", f"{out.residual:.2e} m")
print("residual per iteration:", ["%.1e" % r for r in history])

# link lengths never drift, even mid-solve
segments = np.linalg.norm(np.diff(out.state.positions, axis=0), axis=1)
print("link lengths after solve:", segments)

# out-of-reach targets stretch toward the goal and report INFEASIBLE
far = np.array([2.0, 0.0, 0.0])
stretched = solve(model, home, far)
print("\nout-of-reach target ->", stretched.status.value, end="")
print(f", best residual {stretched.residual:.3f} m (reach is {model.total_length} m)")
assert stretched.status is SolveStatus.INFEASIBLE

# joint limits shape the answer: a tightly limited chain needs more
# iterations and may settle farther away
stiff = ChainModel(
    base=(0.0, 0.0, 0.0),
    base_direction=(1.0, 0.0, 0.0),
    links=[(0.10, 0.0)] * 6,
    limits=[JointLimits.symmetric(0.35, 0.35)] * 6,
)
out_stiff = solve(stiff, state_from_angles(stiff, np.zeros((6, 2))), target)
print(
    f"\nsame target, +/-0.35 rad limits: {out_stiff.status.value} "
    f"after {out_stiff.iterations} iterations, residual {out_stiff.residual:.2e} m"
)
print("joint angles (pitch, yaw):")
print(out_stiff.state.angles)
