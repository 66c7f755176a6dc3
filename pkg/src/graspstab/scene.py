"""Quasi-static grasp scene: sampling, contact generation, closing, actions.

The world frame has the object's nominal grasp center at the origin and +z
up. The hand approaches top-down: its palm faces -z and fingers extend
downward around the object. Contact forces follow a penalty spring law
(normal force = stiffness x penetration depth) with tangential components
from a gravity-equilibrium force distribution, replacing a dynamic engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .contacts import Contact, FrictionModel
from .hand import N_LINKS, HandConfig, LinkFrame, link_frames, link_sample_points
from .metrics import GraspSnapshot, distribute_wrench, grasp_matrix
from .objects import MASS_RANGE, ObjectShape, ObjectSpec, SizeEnvelopes, sdf, sdf_gradient
from .rotations import (
    quat_from_axis_angle,
    quat_from_euler_xyz,
    quat_multiply,
    quat_normalize,
    quat_to_matrix,
)

GRAVITY = 9.81  # m/s^2

TEST_CASE_LABELS = "ABCDEFGH"
# Table of test wrist error norms per case label: cm and deg.
TEST_TRANSLATION_CM = (0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0)
TEST_ROTATION_DEG = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0)

TRAIN_TRANSLATION_RANGE = 0.05  # m, per component
TRAIN_ROTATION_RANGE = math.radians(10.0)  # rad, per component


@dataclass(frozen=True)
class WristError:
    """Translational and rotational hand pose error, world frame."""

    translation: np.ndarray  # (3,) m
    rotation: np.ndarray  # (3,) Euler offsets, rad

    def __post_init__(self):
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=float))
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float))


@dataclass(frozen=True)
class SceneParams:
    """Physical constants of the simplified contact world."""

    hand: HandConfig = field(default_factory=HandConfig)
    envelopes: SizeEnvelopes = field(default_factory=SizeEnvelopes)
    friction: FrictionModel = field(default_factory=FrictionModel)
    stiffness: float = 1000.0  # N/m
    penetration_cap: float = 0.005  # m, resolved by pushing the object
    samples_per_axis: int = 4


@dataclass
class SceneState:
    """Simulator ground truth. Value semantics: operations return copies."""

    object: ObjectSpec
    object_pos: np.ndarray
    object_quat: np.ndarray
    wrist_pos: np.ndarray
    wrist_quat: np.ndarray
    joints: np.ndarray  # (7,) [separation, proximal x3, distal x3]
    accumulated_object_shift: float = 0.0
    support_z: float | None = None  # object center may not sink below this

    def copy(self) -> "SceneState":
        return SceneState(
            object=self.object,
            object_pos=self.object_pos.copy(),
            object_quat=self.object_quat.copy(),
            wrist_pos=self.wrist_pos.copy(),
            wrist_quat=self.wrist_quat.copy(),
            joints=self.joints.copy(),
            accumulated_object_shift=self.accumulated_object_shift,
            support_z=self.support_z,
        )

    @property
    def horizontally_locked(self) -> bool:
        """Spheres sit on a concave mount until lifted (no rolling away)."""
        return self.object.shape is ObjectShape.SPHERE and self.support_z is not None


@dataclass(frozen=True)
class ActionLimits:
    """Per-step bounds on the 9 action components."""

    finger: float = 0.1  # rad
    translation: float = 0.01  # m
    rotation: float = math.radians(2.0)  # rad

    def as_vector(self) -> np.ndarray:
        return np.array([self.finger] * 3 + [self.translation] * 3 + [self.rotation] * 3)


def gravity_wrench(spec: ObjectSpec) -> np.ndarray:
    """Weight of the object acting at its center of mass (6-vector)."""
    return np.array([0.0, 0.0, -spec.mass * GRAVITY, 0.0, 0.0, 0.0])


def holding_task_wrenches(spec: ObjectSpec) -> np.ndarray:
    """Default task set: the wrench the grasp must produce to carry the object.

    This is the negated weight; distributing it through the grasp matrix adds
    the upward tangential loads the fingers take on when the object hangs in
    the hand.
    """
    return (-gravity_wrench(spec)).reshape(1, 6)


def nominal_wrist_pose(hand: HandConfig) -> tuple[np.ndarray, np.ndarray]:
    """Wrist pose placing the grasp center at the origin, palm facing down."""
    quat = quat_from_axis_angle(np.array([1.0, 0.0, 0.0]), math.pi)
    pos = np.array([0.0, 0.0, hand.grasp_center_drop])
    return pos, quat


def initial_scene(spec: ObjectSpec, error: WristError, params: SceneParams) -> SceneState:
    pos, quat = nominal_wrist_pose(params.hand)
    wrist_pos = pos + error.translation
    wrist_quat = quat_normalize(quat_multiply(quat_from_euler_xyz(error.rotation), quat))
    return SceneState(
        object=spec,
        object_pos=np.zeros(3),
        object_quat=np.array([1.0, 0.0, 0.0, 0.0]),
        wrist_pos=wrist_pos,
        wrist_quat=wrist_quat,
        joints=np.zeros(7),
        accumulated_object_shift=0.0,
        support_z=0.0,
    )


# ---------------------------------------------------------------------------
# dataset sampling


def _sample_object(rng: np.random.Generator, envelopes: SizeEnvelopes,
                   shape: ObjectShape | None = None) -> ObjectSpec:
    if shape is None:
        shape = ObjectShape(rng.choice([s.value for s in ObjectShape]))
    if shape is ObjectShape.CUBOID:
        dims = tuple(rng.uniform(*envelopes.cuboid_side) for _ in range(3))
    elif shape is ObjectShape.CYLINDER:
        dims = (rng.uniform(*envelopes.cylinder_radius), rng.uniform(*envelopes.cylinder_height))
    else:
        dims = (rng.uniform(*envelopes.sphere_radius),)
    return ObjectSpec(shape=shape, dimensions=dims, mass=float(rng.uniform(*MASS_RANGE)))


def sample_training_case(seed, envelopes: SizeEnvelopes | None = None) -> tuple[ObjectSpec, WristError]:
    """Uniform (object, wrist error) tuple of the training distribution."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    envelopes = envelopes or SizeEnvelopes()
    spec = _sample_object(rng, envelopes)
    error = WristError(
        translation=rng.uniform(-TRAIN_TRANSLATION_RANGE, TRAIN_TRANSLATION_RANGE, 3),
        rotation=rng.uniform(-TRAIN_ROTATION_RANGE, TRAIN_ROTATION_RANGE, 3),
    )
    return spec, error


def _random_unit(rng: np.random.Generator) -> np.ndarray:
    while True:
        v = rng.normal(size=3)
        n = np.linalg.norm(v)
        if n > 1e-12:
            return v / n


@dataclass(frozen=True)
class EvalCase:
    index: int
    label: str
    object: ObjectSpec
    error: WristError


def build_test_dataset(seed: int, envelopes: SizeEnvelopes | None = None,
                       objects_per_shape: int = 10) -> list[EvalCase]:
    """Fixed test matrix: objects x 8 error cases with exact error norms.

    Error directions are sampled uniformly on the sphere and scaled so the L2
    norm of the translation triple is exactly {0,1,...,7} cm and of the Euler
    triple exactly {0,2,...,14} deg for case labels A..H.
    """
    rng = np.random.default_rng(seed)
    envelopes = envelopes or SizeEnvelopes()
    cases: list[EvalCase] = []
    index = 0
    for shape in (ObjectShape.CUBOID, ObjectShape.CYLINDER, ObjectShape.SPHERE):
        for _ in range(objects_per_shape):
            spec = _sample_object(rng, envelopes, shape=shape)
            for k, label in enumerate(TEST_CASE_LABELS):
                t_norm = TEST_TRANSLATION_CM[k] / 100.0
                r_norm = math.radians(TEST_ROTATION_DEG[k])
                translation = _random_unit(rng) * t_norm if t_norm > 0 else np.zeros(3)
                rotation = _random_unit(rng) * r_norm if r_norm > 0 else np.zeros(3)
                cases.append(EvalCase(index=index, label=label, object=spec,
                                      error=WristError(translation, rotation)))
                index += 1
    return cases


def dataset_subset(cases: list[EvalCase], count: int | None) -> list[EvalCase]:
    """Deterministic stratified subset: every len//count-th entry.

    With the object-major dataset layout a stride-4 slice of the 240 cases
    covers all 30 objects at two error levels.
    """
    if count is None or count >= len(cases):
        return list(cases)
    if count <= 0:
        raise ValueError("subset count must be positive")
    stride = len(cases) // count
    return [cases[i * stride] for i in range(count)]


# ---------------------------------------------------------------------------
# contact generation


def _object_local(state: SceneState, pts: np.ndarray) -> np.ndarray:
    r = quat_to_matrix(state.object_quat)
    return (np.atleast_2d(pts) - state.object_pos) @ r


def _link_penetrations(state: SceneState, params: SceneParams,
                       frames: list[LinkFrame] | None = None):
    """Per link: (depth, centroid_world, into_normal_world) or None."""
    frames = frames or link_frames(params.hand, state.wrist_pos, state.wrist_quat, state.joints)
    r_obj = quat_to_matrix(state.object_quat)
    results = []
    for frame in frames:
        pts = link_sample_points(frame, params.samples_per_axis)
        local = (pts - state.object_pos) @ r_obj
        d = sdf(state.object, local)
        mask = d < 0.0
        if not mask.any():
            results.append(None)
            continue
        depth = float(-d[mask].min())
        centroid_world = pts[mask].mean(axis=0)
        grad_local = sdf_gradient(state.object, (centroid_world - state.object_pos) @ r_obj)
        normal = -(r_obj @ grad_local)  # into the object
        normal = normal / np.linalg.norm(normal)
        results.append((depth, centroid_world, normal))
    return results


def _slots_touching(state: SceneState, params: SceneParams, slots: tuple[int, ...]) -> dict[int, bool]:
    """Cheap contact test for selected link slots (no centroids or normals)."""
    frames = link_frames(params.hand, state.wrist_pos, state.wrist_quat, state.joints)
    r_obj = quat_to_matrix(state.object_quat)
    out = {}
    for slot in slots:
        pts = link_sample_points(frames[slot], params.samples_per_axis)
        local = (pts - state.object_pos) @ r_obj
        out[slot] = bool((sdf(state.object, local) < 0.0).any())
    return out


def detect_link_contacts(state: SceneState, params: SceneParams) -> list[Contact | None]:
    """One spring contact per penetrating hand link, in slot order.

    Normal force follows the penalty law; tangential components come from
    distributing the carry wrench (negated object weight) over the contacts
    and projecting each share onto its tangent plane.
    """
    pens = _link_penetrations(state, params)
    contacts: list[Contact | None] = [None] * N_LINKS
    touching = [(i, p) for i, p in enumerate(pens) if p is not None]
    if not touching:
        return contacts
    normal_forces = []
    for i, (depth, centroid, normal) in touching:
        f_n = params.stiffness * depth
        normal_forces.append((i, centroid, normal, f_n))
    snapshot = GraspSnapshot(
        contacts=[Contact(position=c, normal=n, force=f * n) for _, c, n, f in normal_forces],
        com=state.object_pos,
        friction=params.friction,
    )
    shares = distribute_wrench(grasp_matrix(snapshot), -gravity_wrench(state.object)).forces
    for k, (i, centroid, normal, f_n) in enumerate(normal_forces):
        tangential = shares[k] - (shares[k] @ normal) * normal
        contacts[i] = Contact(position=centroid, normal=normal, force=f_n * normal + tangential)
    return contacts


def snapshot_from_links(link_contacts: list[Contact | None], state: SceneState,
                        params: SceneParams) -> GraspSnapshot:
    return GraspSnapshot(
        contacts=[c for c in link_contacts if c is not None],
        com=state.object_pos,
        friction=params.friction,
    )


def detect_contacts(state: SceneState, params: SceneParams) -> GraspSnapshot:
    return snapshot_from_links(detect_link_contacts(state, params), state, params)


def _resolve_penetration(state: SceneState, params: SceneParams, max_iter: int = 10) -> float:
    """Push the object along the net penetration direction until every link
    penetrates at most ``penetration_cap``. Opposed squeezes cancel and are
    accepted as preload. The net displacement of the call (not the internal
    iteration path) is added to the shift budget.
    """
    start = state.object_pos.copy()
    for _ in range(max_iter):
        pens = _link_penetrations(state, params)
        push = np.zeros(3)
        worst = 0.0
        for p in pens:
            if p is None:
                continue
            depth, _, normal = p
            excess = depth - params.penetration_cap
            if excess > 0.0:
                push += excess * normal
                worst = max(worst, excess)
        if worst <= 0.0 or np.linalg.norm(push) < 1e-9:
            break
        step = push / np.linalg.norm(push) * worst
        if state.horizontally_locked:
            step[0] = step[1] = 0.0
        new_pos = state.object_pos + step
        if state.support_z is not None:
            new_pos[2] = max(new_pos[2], state.support_z)
        if float(np.linalg.norm(new_pos - state.object_pos)) < 1e-12:
            break
        state.object_pos = new_pos
    moved = float(np.linalg.norm(state.object_pos - start))
    state.accumulated_object_shift += moved
    return moved


def close_fingers(state: SceneState, params: SceneParams) -> tuple[SceneState, GraspSnapshot]:
    """Advance proximal then distal joints in fixed increments until each
    finger touches the object or reaches the joint limit. Deterministic.
    """
    s = state.copy()
    _resolve_penetration(s, params)
    limit = params.hand.joint_limit
    step = params.hand.close_step

    # Per-step advances are small against the penetration cap, so penetration
    # resolution is only needed at placement and once after closing.
    for joint_base in (1, 4):  # proximal round-robin, then distal
        active = [True, True, True]
        while any(active):
            watch: list[int] = []
            for i in range(3):
                if active[i]:
                    # A proximal advance stops once either link of the finger
                    # touches; the distal phase only watches its own link.
                    watch.extend((1 + i, 4 + i) if joint_base == 1 else (4 + i,))
            touching = _slots_touching(s, params, tuple(watch))
            for i in range(3):
                if not active[i]:
                    continue
                slots = (1 + i, 4 + i) if joint_base == 1 else (4 + i,)
                if any(touching[slot] for slot in slots) or s.joints[joint_base + i] + step > limit:
                    active[i] = False
                    continue
                s.joints[joint_base + i] += step
    _resolve_penetration(s, params)
    return s, detect_contacts(s, params)


def apply_action(state: SceneState, action: np.ndarray, limits: ActionLimits,
                 params: SceneParams, carry_object: bool = False) -> tuple[SceneState, float]:
    """Apply a clamped 9-dim increment; returns (new state, object shift).

    Finger increments drive proximal joints with distal joints coupled at the
    underactuation ratio. Joint limits are not enforced here; the environment
    detects violations. With ``carry_object`` the object follows the wrist
    translation (rigid carry while held).
    """
    a = np.asarray(action, dtype=float).reshape(9)
    if not np.isfinite(a).all():
        raise ValueError("action must be finite")
    a = np.clip(a, -limits.as_vector(), limits.as_vector())
    s = state.copy()
    for i in range(3):
        s.joints[1 + i] += a[i]
        s.joints[4 + i] += params.hand.distal_coupling * a[i]
    s.wrist_pos = s.wrist_pos + a[3:6]
    if carry_object:
        s.object_pos = s.object_pos + a[3:6]
    if np.any(a[6:9] != 0.0):
        s.wrist_quat = quat_normalize(quat_multiply(quat_from_euler_xyz(a[6:9]), s.wrist_quat))
    shift = _resolve_penetration(s, params)
    return s, shift
