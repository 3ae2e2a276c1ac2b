"""Obstacle-aware reaching: per-link collision cones folded into the
solver's angle chooser, plus the outer loop stepping the end effector
toward the goal under velocity-obstacle guidance.

Safe angles are computed by conservative rasterization. For each sphere
that could touch the link (real obstacles plus virtual self-collision
spheres at the closest points of non-adjacent links), the candidate
(pitch, yaw) grid over the joint-limit rectangle is scanned in a window
around the sphere's direction and cells whose link capsule would come
within the touch threshold are marked forbidden. The mark threshold is
inflated by the worst-case variation of the clearance function across one
cell (link length x half cell diagonal), which makes the forbidden region
a rigorous superset of the truly colliding set: any angle in an unmarked
cell keeps the capsule strictly clear of the inflated sphere.

The backward half-iteration reuses the same rasterizer by reflecting
sphere centers through the pivot: the link then extends from the pivot
toward the reflected center exactly when the real link (which extends
away from the pivot) would approach the real center.

When no cell is forbidden, the chooser falls through to the identical
limit clamp the plain solver uses, so with no obstacles in range the
planner reproduces plain FABRIK bit for bit.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .chain import ChainModel, ChainState, JointAngles, JointLimits, cross3
from .fabrik import (
    FabrikConfig,
    Phase,
    SolveOutcome,
    clamp_to_limits,
    solve as fabrik_solve,
)
from .geometry import Segment3, as_vec3, segment_segment_distance
from .velocity_obstacles import (
    NoAdmissibleVelocity,
    SphereObstacle,
    VOConfig,
    admissible_velocity,
    collision_cone,
)


class SafeSetEmpty(RuntimeError):
    """Every angle in the joint-limit rectangle is forbidden."""

    def __init__(self, joint: Optional[int] = None, phase: Optional[Phase] = None):
        self.joint = joint
        self.phase = phase
        where = "" if joint is None else f" at joint {joint} ({phase.value} phase)"
        super().__init__(f"no safe joint angles remain{where}")


class InitialStateInCollision(ValueError):
    """The starting configuration already violates clearance."""


class PlanStatus(Enum):
    GOAL_REACHED = "GoalReached"
    STALLED = "Stalled"
    STEP_LIMIT = "StepLimit"
    SAFE_SET_EMPTY = "SafeSetEmpty"
    NO_ADMISSIBLE_VELOCITY = "NoAdmissibleVelocity"


@dataclass(frozen=True)
class PlannerConfig:
    """Outer-loop timing, tolerances, and the nested solver configs."""

    t_s: float = 0.2
    v_pref_speed: float = 0.1
    goal_tolerance: float = 5e-3
    max_steps: int = 300
    stall_window: int = 10
    stall_displacement: float = 1e-4
    angular_resolution: float = math.radians(0.5)
    clearance_margin: float = 5e-3
    ik: FabrikConfig = field(default_factory=FabrikConfig)
    vo: VOConfig = field(default_factory=VOConfig)

    def __post_init__(self):
        for name in (
            "t_s",
            "v_pref_speed",
            "goal_tolerance",
            "max_steps",
            "stall_displacement",
            "angular_resolution",
        ):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.stall_window < 1:
            raise ValueError(f"stall_window must be >= 1, got {self.stall_window}")
        if self.clearance_margin < 0:
            raise ValueError(
                f"clearance_margin must be >= 0, got {self.clearance_margin}"
            )


@dataclass
class StepMetrics:
    joint_displacements: np.ndarray  # per-axis |delta|, flattened (2 per joint)
    wall_time: float
    min_clearance: float


@dataclass
class PlanOutcome:
    status: PlanStatus
    trajectory: list  # ChainState per step, index 0 is the initial state
    per_step_metrics: list  # StepMetrics, one per transition


@dataclass(frozen=True)
class AngularRegion:
    """Union of closed axis-aligned rectangles in (pitch, yaw) space.

    Rectangle interiors are pairwise disjoint; boundaries may touch.
    Zero-width rectangles are legitimate (a collapsed 1-DoF axis).
    """

    allowed: tuple

    @property
    def is_empty(self) -> bool:
        return len(self.allowed) == 0

    def contains(self, pitch: float, yaw: float) -> bool:
        return any(
            plo <= pitch <= phi and ylo <= yaw <= yhi
            for plo, phi, ylo, yhi in self.allowed
        )

    def nearest(self, pitch: float, yaw: float):
        """Closest point of the region; ties by smaller pitch, then yaw."""
        best = None
        for plo, phi, ylo, yhi in self.allowed:
            cp = min(max(pitch, plo), phi)
            cy = min(max(yaw, ylo), yhi)
            key = ((cp - pitch) ** 2 + (cy - yaw) ** 2, cp, cy)
            if best is None or key < best:
                best = key
        if best is None:
            raise SafeSetEmpty()
        return best[1], best[2]


def compute_safe(safe: AngularRegion, desired: JointAngles) -> JointAngles:
    """Desired angles if safe, else the nearest point of the safe set."""
    if safe.is_empty:
        raise SafeSetEmpty()
    if safe.contains(desired.pitch, desired.yaw):
        return desired
    return JointAngles(*safe.nearest(desired.pitch, desired.yaw))


def virtual_obstacles(
    model: ChainModel, state: ChainState, link_index: int, phase: Phase
) -> list:
    """Static spheres at the closest points of sweep-remaining links.

    During the backward phase link k pivots at p_{k+1} and the links still
    to be visited lie toward the base (j <= k - 2); forward is the mirror
    (j >= k + 2). The adjacent link is skipped — it shares the pivot.
    Zero-thickness links produce no sphere.
    """
    if not 0 <= link_index < model.n_links:
        raise ValueError(f"link_index {link_index} out of range")
    positions = state.positions
    pivot = positions[link_index + 1] if phase is Phase.BACKWARD else positions[link_index]
    centers, radii = _virtual_sphere_arrays(
        positions, model.thicknesses, link_index, phase, pivot
    )
    return [
        SphereObstacle(center=c, radius=r) for c, r in zip(centers, radii)
    ]


def _virtual_sphere_arrays(positions, thicknesses, link_index, phase, pivot):
    n = len(thicknesses)
    if phase is Phase.BACKWARD:
        j0, j1 = 0, link_index - 1
    else:
        j0, j1 = link_index + 2, n
    if j1 <= j0:
        return np.empty((0, 3)), np.empty(0)
    a = positions[j0:j1]
    b = positions[j0 + 1 : j1 + 1]
    d = b - a
    t = np.einsum("ij,ij->i", pivot[None, :] - a, d) / np.einsum("ij,ij->i", d, d)
    closest = a + np.clip(t, 0.0, 1.0)[:, None] * d
    radii = np.asarray(thicknesses[j0:j1], dtype=float)
    keep = radii > 0.0
    return closest[keep], radii[keep]


def _axis_grid(lo: float, hi: float, resolution: float):
    """Cell edges and centers covering [lo, hi] at most `resolution` wide."""
    if hi <= lo:
        return np.array([lo, lo]), np.array([lo])
    n = max(1, int(math.ceil((hi - lo) / resolution)))
    edges = lo + np.arange(n + 1) * ((hi - lo) / n)
    edges[-1] = hi
    centers = 0.5 * (edges[:-1] + edges[1:])
    return edges, centers


def _grid_lip(length: float, pitch_edges: np.ndarray, yaw_edges: np.ndarray) -> float:
    """Worst-case clearance variation across one grid cell, slightly padded.

    Any angle pair sits within half a cell diagonal of its cell's center,
    and moving the link tip by an arc of that size changes any point-to-
    capsule distance by at most `length` times it. Collapsed axes have
    zero-width cells and contribute nothing.
    """
    sp = float(pitch_edges[1] - pitch_edges[0])
    sy = float(yaw_edges[1] - yaw_edges[0])
    return length * 0.5 * math.hypot(sp, sy) * 1.0001


def _rect_difference(rects, cut):
    """Subtract one rectangle from a list of rectangles."""
    cplo, cphi, cylo, cyhi = cut
    out = []
    for plo, phi, ylo, yhi in rects:
        if phi < cplo or plo > cphi or yhi < cylo or ylo > cyhi:
            out.append((plo, phi, ylo, yhi))
            continue
        if plo < cplo:
            out.append((plo, cplo, ylo, yhi))
        if cphi < phi:
            out.append((cphi, phi, ylo, yhi))
        mp_lo, mp_hi = max(plo, cplo), min(phi, cphi)
        if ylo < cylo:
            out.append((mp_lo, mp_hi, ylo, cylo))
        if cyhi < yhi:
            out.append((mp_lo, mp_hi, cyhi, yhi))
    return out


def _window_spans(center: float, halfwidth: float, lo: float, hi: float):
    """Angle intervals around `center`, wrapped into (-pi, pi], clipped."""
    a, b = center - halfwidth, center + halfwidth
    if b - a >= 2.0 * math.pi:
        spans = [(-math.pi, math.pi)]
    elif a < -math.pi:
        spans = [(-math.pi, b), (a + 2.0 * math.pi, math.pi)]
    elif b > math.pi:
        spans = [(a, math.pi), (-math.pi, b - 2.0 * math.pi)]
    else:
        spans = [(a, b)]
    return [(max(s, lo), min(e, hi)) for s, e in spans if max(s, lo) <= min(e, hi)]


def _index_range(edges: np.ndarray, lo: float, hi: float):
    """Half-open cell index range whose cells intersect [lo, hi]."""
    n = len(edges) - 1
    if n == 1:
        return (0, 1) if hi >= edges[0] and lo <= edges[-1] else (0, 0)
    i0 = int(np.searchsorted(edges, lo, side="right")) - 1
    i1 = int(np.searchsorted(edges, hi, side="left"))
    return max(i0, 0), min(max(i1, 0), n)


def _cell_of(edges: np.ndarray, x: float) -> int:
    """Index of the cell containing x, clamped into range."""
    n = len(edges) - 1
    if n == 1:
        return 0
    return min(max(int(np.searchsorted(edges, x, side="right")) - 1, 0), n - 1)


def _hit_cells(pitch, yaw, proj, length, reach):
    """Cells whose link segment passes within `reach` of a sphere center.

    proj = the center relative to the pivot, projected on the joint frame
    triad (forward, lateral, up) plus its squared norm; the candidate link
    direction at cell center (p, y) is
    cos(p)cos(y)*forward + cos(p)sin(y)*lateral + sin(p)*up.
    """
    rf, rl, ru, rr = proj
    cp, sp = np.cos(pitch), np.sin(pitch)
    cy, sy = np.cos(yaw), np.sin(yaw)
    s = (
        np.outer(cp * rf, cy)
        + np.outer(cp * rl, sy)
        + np.outer(sp, np.ones_like(cy)) * ru
    )
    t = np.clip(s, 0.0, length)
    d2 = rr - 2.0 * t * s + t * t
    return d2 <= reach * reach


class _ConeConstraints:
    """Angle chooser enforcing cone-derived forbidden regions.

    One instance is built per ik_phase call and invoked at every link
    visit of every half-iteration with the sweep's working positions.
    """

    def __init__(self, model: ChainModel, obstacles: Sequence[SphereObstacle], cfg: PlannerConfig):
        self.model = model
        self.cfg = cfg
        self.real_centers = (
            np.array([o.center for o in obstacles], dtype=float)
            if obstacles
            else np.empty((0, 3))
        )
        self.real_radii = np.array([o.radius for o in obstacles], dtype=float)
        self.grids = [
            (
                _axis_grid(lim.pitch_min, lim.pitch_max, cfg.angular_resolution),
                _axis_grid(lim.yaw_min, lim.yaw_max, cfg.angular_resolution),
            )
            for lim in model.limits
        ]
        self._thick = np.asarray(model.thicknesses, dtype=float)
        # full-resolution diagonal on every joint: inside the sweep, extra
        # conservatism is cheap and keeps the margin uniform across joints
        # whose live axes differ
        self._lips = (
            np.asarray(model.lengths, dtype=float)
            * 0.5
            * cfg.angular_resolution
            * math.sqrt(2.0)
            * 1.0001
        )
        self._has_virtual = bool((self._thick > 0.0).any())
        self._sweep_diffs = None
        self._sweep_len2 = None

    def __call__(self, phase, joint, desired, limits, frame, pivot, positions):
        n = self.model.n_links
        # a sweep's virtual-sphere sources are that sweep's entry
        # positions (the visited side is never read), so the segment
        # geometry can be cached when the sweep begins
        if (phase is Phase.BACKWARD and joint == n - 1) or (
            phase is Phase.FORWARD and joint == 0
        ):
            self._sweep_diffs = np.diff(positions, axis=0)
            self._sweep_len2 = np.einsum(
                "ij,ij->i", self._sweep_diffs, self._sweep_diffs
            )
        centers, touch = self._touch_spheres(phase, joint, positions, pivot)
        if centers is None:
            return clamp_to_limits(desired.pitch, desired.yaw, limits)
        if phase is Phase.BACKWARD:
            centers = 2.0 * pivot - centers
        hits = self._rasterize(joint, frame, pivot, centers, touch)
        if not hits:
            return clamp_to_limits(desired.pitch, desired.yaw, limits)
        try:
            return self._nearest_safe(joint, limits, desired, hits)
        except SafeSetEmpty:
            raise SafeSetEmpty(joint=joint, phase=phase) from None

    def _touch_spheres(self, phase, joint, positions, pivot):
        """Candidate spheres as (centers, touch distances): the link's
        center-line segment closer than `touch` to a center collides.
        None when no sphere can reach the link."""
        thick_k = float(self._thick[joint])
        if self._has_virtual:
            n = self.model.n_links
            if phase is Phase.BACKWARD:
                j0, j1 = 0, joint - 1
            else:
                j0, j1 = joint + 2, n
        else:
            j0 = j1 = 0
        if j1 > j0:
            a = positions[j0:j1]
            d = self._sweep_diffs[j0:j1]
            t = np.einsum("ij,ij->i", pivot[None, :] - a, d) / self._sweep_len2[j0:j1]
            np.clip(t, 0.0, 1.0, out=t)
            v_centers = a + t[:, None] * d
            v_radii = self._thick[j0:j1]
            if self.real_centers.size:
                centers = np.concatenate([self.real_centers, v_centers], axis=0)
                radii = np.concatenate([self.real_radii, v_radii])
            else:
                centers, radii = v_centers, v_radii
        elif self.real_centers.size:
            centers, radii = self.real_centers, self.real_radii
        else:
            return None, None

        length = float(self.model.lengths[joint])
        lip = float(self._lips[joint])
        delta = centers - pivot
        d2 = np.einsum("ij,ij->i", delta, delta)
        bound = length + radii + self.cfg.clearance_margin + thick_k + lip
        keep = (d2 <= bound * bound) & (radii > 0.0)
        if not keep.any():
            return None, None
        centers = centers[keep]
        radii = radii[keep]
        dist = np.sqrt(d2[keep])
        # shrink the margin where the pivot sits close, so the touch sphere
        # never swallows the pivot while true clearance is still positive
        margin = np.clip(
            np.minimum(self.cfg.clearance_margin, 0.5 * (dist - thick_k - radii)),
            0.0,
            None,
        )
        return centers, radii + margin + thick_k

    def _rasterize(self, joint, frame, pivot, centers, touch):
        """Forbidden cells per sphere: list of (i0, j0, hit bool array)."""
        (pe, pc), (ye, yc) = self.grids[joint]
        length = float(self.model.lengths[joint])
        lip = float(self._lips[joint])
        f, u = frame.forward, frame.up
        lat = cross3(u, f)
        hits = []
        for c, t_m in zip(centers, touch):
            rel = c - pivot
            dist = float(np.linalg.norm(rel))
            reach = t_m + lip
            if dist > length + reach:
                continue
            if dist <= reach:
                # pivot itself within touch: every direction collides
                hits.append(
                    (0, 0, np.ones((len(pc), len(yc)), dtype=bool))
                )
                continue
            if dist * dist <= length * length + reach * reach:
                beta = math.asin(reach / dist)
            else:
                beta = math.acos(
                    min(
                        max(
                            (dist * dist + length * length - reach * reach)
                            / (2.0 * dist * length),
                            -1.0,
                        ),
                        1.0,
                    )
                )
            axis = rel / dist
            pitch_c = math.asin(min(max(float(np.dot(axis, u)), -1.0), 1.0))
            yaw_c = math.atan2(float(np.dot(axis, lat)), float(np.dot(axis, f)))
            p_lo = max(pitch_c - beta, pe[0])
            p_hi = min(pitch_c + beta, pe[-1])
            if p_lo > p_hi:
                continue
            cos_min = min(math.cos(p_lo), math.cos(p_hi))
            if cos_min < 1e-9:
                yaw_spans = [(ye[0], ye[-1])]
            else:
                yaw_spans = _window_spans(yaw_c, beta / cos_min, ye[0], ye[-1])
            i0, i1 = _index_range(pe, p_lo, p_hi)
            proj = (
                float(np.dot(rel, f)),
                float(np.dot(rel, lat)),
                float(np.dot(rel, u)),
                float(np.dot(rel, rel)),
            )
            for s_lo, s_hi in yaw_spans:
                j0, j1 = _index_range(ye, s_lo, s_hi)
                if i1 <= i0 or j1 <= j0:
                    continue
                hit = _hit_cells(
                    pc[i0:i1], yc[j0:j1], proj, length, reach
                )
                if hit.any():
                    hits.append((i0, j0, hit))
        return hits

    def _nearest_safe(self, joint, limits, desired, hits):
        """Desired angles, or the closest cell/rect point outside all hits.

        Works on boolean masks over the union bounding box of the hit
        windows; everything outside that box is safe by construction.
        """
        (pe, _), (ye, _) = self.grids[joint]
        i0 = min(h[0] for h in hits)
        j0 = min(h[1] for h in hits)
        i1 = max(h[0] + h[2].shape[0] for h in hits)
        j1 = max(h[1] + h[2].shape[1] for h in hits)
        forbidden = np.zeros((i1 - i0, j1 - j0), dtype=bool)
        for hi, hj, hit in hits:
            forbidden[hi - i0 : hi - i0 + hit.shape[0], hj - j0 : hj - j0 + hit.shape[1]] |= hit

        p_clamp, y_clamp = clamp_to_limits(desired.pitch, desired.yaw, limits)
        ci = _cell_of(pe, p_clamp) - i0
        cj = _cell_of(ye, y_clamp) - j0
        inside_box = 0 <= ci < forbidden.shape[0] and 0 <= cj < forbidden.shape[1]
        if not inside_box or not forbidden[ci, cj]:
            return p_clamp, y_clamp

        # nearest among safe cells of the box, measured from the raw desired
        cp = np.minimum(np.maximum(desired.pitch, pe[i0:i1]), pe[i0 + 1 : i1 + 1])
        cy = np.minimum(np.maximum(desired.yaw, ye[j0:j1]), ye[j0 + 1 : j1 + 1])
        d2 = (cp - desired.pitch)[:, None] ** 2 + (cy - desired.yaw)[None, :] ** 2
        d2[forbidden] = np.inf
        best = None
        flat = int(np.argmin(d2))
        if np.isfinite(d2.flat[flat]):
            ii, jj = np.unravel_index(flat, d2.shape)
            ties = np.argwhere(d2 == d2[ii, jj])
            cands = sorted((cp[i], cy[j]) for i, j in ties)
            best = (float(d2[ii, jj]), cands[0][0], cands[0][1])

        # regions of the limit rectangle outside the union box
        box = (pe[i0], pe[i1], ye[j0], ye[j1])
        for plo, phi, ylo, yhi in _rect_difference(
            [(limits.pitch_min, limits.pitch_max, limits.yaw_min, limits.yaw_max)],
            box,
        ):
            p = min(max(desired.pitch, plo), phi)
            y = min(max(desired.yaw, ylo), yhi)
            key = ((p - desired.pitch) ** 2 + (y - desired.yaw) ** 2, p, y)
            if best is None or key < best:
                best = key
        if best is None:
            raise SafeSetEmpty()
        return best[1], best[2]


def cone_to_angular_constraints(
    cone,
    pivot,
    frame,
    limits: JointLimits,
    link_length: float,
    link_thickness: float,
    resolution: float,
) -> AngularRegion:
    """Forbidden (pitch, yaw) region for one cone, as grid-cell rectangles.

    A cell is forbidden when a link of the given length and thickness,
    pivoting at `pivot` with angles at the cell center measured in
    `frame`, would touch the cone's generating sphere (center one
    truncation distance along the axis, radius = combined radius),
    inflated by the cell-coverage bound. Conservative: a superset of the
    exactly-colliding set, overshooting by at most about one cell.
    """
    pivot = as_vec3(pivot)
    center = pivot + cone.axis * cone.truncation_distance
    pe, pc = _axis_grid(limits.pitch_min, limits.pitch_max, resolution)
    ye, yc = _axis_grid(limits.yaw_min, limits.yaw_max, resolution)
    f, u = frame.forward, frame.up
    lat = cross3(u, f)
    rel = center - pivot
    touch = cone.combined_radius + link_thickness
    lip = _grid_lip(link_length, pe, ye)
    proj = (
        float(np.dot(rel, f)),
        float(np.dot(rel, lat)),
        float(np.dot(rel, u)),
        float(np.dot(rel, rel)),
    )
    hit = _hit_cells(pc, yc, proj, link_length, touch + lip)
    rects = []
    for i in range(hit.shape[0]):
        j = 0
        while j < hit.shape[1]:
            if hit[i, j]:
                j_end = j
                while j_end + 1 < hit.shape[1] and hit[i, j_end + 1]:
                    j_end += 1
                rects.append((pe[i], pe[i + 1], ye[j], ye[j_end + 1]))
                j = j_end + 1
            else:
                j += 1
    return AngularRegion(tuple(rects))


def ik_phase(
    model: ChainModel,
    state: ChainState,
    target_pn,
    obstacles: Sequence[SphereObstacle],
    cfg: PlannerConfig,
) -> SolveOutcome:
    """One constrained IK solve toward a nearby end-effector target."""
    chooser = _ConeConstraints(model, obstacles, cfg)
    return fabrik_solve(model, state, target_pn, cfg.ik, choose_angles=chooser)


def min_clearance(model: ChainModel, positions, obstacles) -> float:
    """Smallest clearance over link-obstacle and non-adjacent link pairs."""
    p = np.asarray(positions, dtype=float)
    a, b = p[:-1], p[1:]
    d = b - a
    len2 = np.einsum("ij,ij->i", d, d)
    th = model.thicknesses
    best = math.inf
    for o in obstacles:
        t = np.clip(np.einsum("ij,ij->i", o.center[None, :] - a, d) / len2, 0.0, 1.0)
        gaps = np.linalg.norm(o.center[None, :] - (a + t[:, None] * d), axis=1) - th - o.radius
        best = min(best, float(np.min(gaps)))
    n = model.n_links
    for i in range(n):
        seg_i = Segment3(p[i], p[i + 1])
        for j in range(i + 2, n):
            dist, _, _ = segment_segment_distance(seg_i, Segment3(p[j], p[j + 1]))
            best = min(best, dist - th[i] - th[j])
    return best


def _end_effector_velocity(model, state, goal, obstacles, cfg, remaining):
    """Velocity-obstacle filtered step velocity for the end effector."""
    v_pref = (cfg.v_pref_speed / remaining) * (goal - state.positions[-1])
    ee_radius = float(model.thicknesses[-1])
    cones = []
    for o in obstacles:
        d = float(np.linalg.norm(o.center - state.positions[-1]))
        margin = max(0.0, min(cfg.clearance_margin, 0.5 * (d - ee_radius - o.radius)))
        inflated = SphereObstacle(o.center, o.radius + margin, o.velocity)
        cones.append(collision_cone(state.positions[-1], ee_radius, inflated))
    return admissible_velocity(v_pref, cones, cfg.vo)


def plan(
    model: ChainModel,
    initial_state: ChainState,
    goal,
    obstacles: Sequence[SphereObstacle],
    cfg: Optional[PlannerConfig] = None,
    solver: str = "vofabrik",
) -> PlanOutcome:
    """Step the end effector to the goal, one VO-filtered IK solve per step.

    solver="vofabrik" avoids the obstacles; solver="fabrik" is the
    baseline that ignores them (obstacles still feed the clearance metric
    and the initial-state check). Each step targets at most
    v_pref_speed * t_s of end-effector motion along the admissible
    velocity, never overshooting the goal.
    """
    if solver not in ("vofabrik", "fabrik"):
        raise ValueError(f"unknown solver {solver!r}")
    cfg = cfg or PlannerConfig()
    goal = as_vec3(goal)
    obstacles = list(obstacles)

    initial_state.validate(model)
    if obstacles or model.n_links >= 3:
        clearance = min_clearance(model, initial_state.positions, obstacles)
        if clearance <= 0.0:
            raise InitialStateInCollision(
                f"initial clearance {clearance:.6g} m is not positive"
            )

    chooser = _ConeConstraints(model, obstacles, cfg) if solver == "vofabrik" else None
    trajectory = [initial_state.copy()]
    metrics: list = []
    recent: list = []
    status = PlanStatus.STEP_LIMIT

    state = trajectory[0]
    for _ in range(cfg.max_steps):
        t0 = time.perf_counter()
        remaining = float(np.linalg.norm(goal - state.positions[-1]))
        try:
            if remaining <= cfg.goal_tolerance:
                target = state.positions[-1]
            elif solver == "vofabrik":
                v = _end_effector_velocity(model, state, goal, obstacles, cfg, remaining)
                speed = float(np.linalg.norm(v))
                target = state.positions[-1] + v * min(cfg.t_s, remaining / speed)
            else:
                v = (cfg.v_pref_speed / remaining) * (goal - state.positions[-1])
                target = state.positions[-1] + v * min(
                    cfg.t_s, remaining / cfg.v_pref_speed
                )
            outcome = fabrik_solve(model, state, target, cfg.ik, choose_angles=chooser)
        except NoAdmissibleVelocity:
            status = PlanStatus.NO_ADMISSIBLE_VELOCITY
            break
        except SafeSetEmpty:
            status = PlanStatus.SAFE_SET_EMPTY
            break
        wall = time.perf_counter() - t0

        new_state = outcome.state
        displacements = np.abs(new_state.angles - state.angles).reshape(-1)
        metrics.append(
            StepMetrics(
                joint_displacements=displacements,
                wall_time=wall,
                min_clearance=min_clearance(model, new_state.positions, obstacles),
            )
        )
        ee_disp = float(np.linalg.norm(new_state.positions[-1] - state.positions[-1]))
        trajectory.append(new_state)
        state = new_state

        if float(np.linalg.norm(goal - state.positions[-1])) <= cfg.goal_tolerance:
            status = PlanStatus.GOAL_REACHED
            break
        recent.append(ee_disp)
        if len(recent) > cfg.stall_window:
            recent.pop(0)
        if len(recent) == cfg.stall_window and all(
            d < cfg.stall_displacement for d in recent
        ):
            status = PlanStatus.STALLED
            break

    return PlanOutcome(status=status, trajectory=trajectory, per_step_metrics=metrics)
