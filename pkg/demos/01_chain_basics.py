"""Build a pitch/yaw chain, pose it, and poke at the geometry.

Every link bends about two axes measured in its parent's frame: pitch
tilts toward the frame's up vector, yaw swings sideways. Angles of zero
keep going straight, so a fresh chain is a straight line along +x.
"""

import numpy as np

from vofabrik import ChainModel, JointLimits, fk, link_capsules, state_from_angles
from vofabrik.chain import joint_frames

np.set_printoptions(precision=4, suppress=True)

# four links, 10 cm each, 1 cm thick, free to bend +/- 90 degrees
model = ChainModel(
    base=(0.0, 0.0, 0.0),
    base_direction=(1.0, 0.0, 0.0),
    links=[(0.10, 0.01)] * 4,
    limits=[JointLimits.symmetric(np.pi / 2, np.pi / 2)] * 4,
)
print("total reach:", model.total_length, "m")

# straight home pose: joint positions march along +x
home = state_from_angles(model, np.zeros((4, 2)))
print("\nhome joint positions (rows are joints, last row is the tip):")
print(home.positions)

# bend the second joint up by 45 degrees and yaw the third one sideways
angles = np.zeros((4, 2))
angles[1] = (np.pi / 4, 0.0)   # pitch
angles[2] = (0.0, -np.pi / 3)  # yaw
positions = fk(model, angles)
print("\nbent pose:")
print(positions)

# each joint's frame rides along with the bend; downstream joints measure
# their own angles relative to it
frames = joint_frames(model, angles)
for k, frame in enumerate(frames):
    print(f"joint {k}: forward={np.asarray(frame.forward)} up={np.asarray(frame.up)}")

# links are capsules (segment + radius) for every distance computation
state = state_from_angles(model, angles)
for k, capsule in enumerate(link_capsules(model, state)):
    length = np.linalg.norm(capsule.axis.b - capsule.axis.a)
    print(f"link {k}: |b-a|={length:.3f} m, radius {capsule.radius} m")

# joint limits are enforced at construction time: this pose is rejected
too_far = np.zeros((4, 2))
too_far[0] = (1.8, 0.0)  # past the +/- pi/2 pitch limit
try:
    state_from_angles(model, too_far)
except ValueError as e:
    print("\nrejected out-of-limit pose:", e)
