"""Trial protocol: conditions, deterministic plans, agents, session runner.

A session walks a plan of (scene, condition) steps. Each step shows a white
fixation dot, then the phosphene-rendered scene until the agent reports it
is done or a 60 s cap elapses; a break is inserted after the 7th step. Time
is simulated, so identical seeds and agents produce byte-identical logs.

Log schema (one JSON object per line, exactly these fields):
    timestamp_s   float, simulated session-clock seconds
    step          int, 1-based step index
    scene         str, scene id
    fov_deg       float, condition field of view
    phosphenes    int, condition nominal phosphene count
    event_type    "fixation" | "response" | "done" | "timeout"
    object_class  str (response events) or null
    count         int cumulative tally for that class (response) or null

The ``fixation`` record is stamped at stimulus onset (the moment the dot
phase ends and the scene appears); response times are differences against
that record's timestamp.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import OBJECT_CLASSES, Corpus
from .errors import PlanningError, SchemaError, SpvError
from .geometry import CameraModel, default_camera, quaternion_from_axis_angle
from .renderer import PhospheneRenderer, StimulusFrame

LOG_FIELDS = ("timestamp_s", "step", "scene", "fov_deg", "phosphenes", "event_type", "object_class", "count")
EVENT_TYPES = ("fixation", "response", "done", "timeout")

IDENTITY_QUAT = (1.0, 0.0, 0.0, 0.0)


# ---------------------------------------------------------------------------
# conditions and plans
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Condition:
    """One experimental condition: FOV diameter and nominal phosphene count."""

    fov_deg: float
    phosphenes: int

    @property
    def condition_id(self) -> str:
        return f"fov{self.fov_deg:g}_p{self.phosphenes}"


DEFAULT_CONDITION_GRID = tuple(
    Condition(fov_deg=fov, phosphenes=n) for n in (200, 500) for fov in (20.0, 40.0, 60.0)
)


@dataclass(frozen=True)
class TrialStep:
    scene: str
    condition: Condition


@dataclass(frozen=True)
class TrialPlan:
    """An ordered list of steps plus the break position (after step ``break_after``)."""

    steps: tuple
    break_after: int = 7
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "break_after": self.break_after,
            "steps": [
                {
                    "step": k + 1,
                    "scene": s.scene,
                    "fov_deg": s.condition.fov_deg,
                    "phosphenes": s.condition.phosphenes,
                }
                for k, s in enumerate(self.steps)
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "TrialPlan":
        steps = tuple(
            TrialStep(e["scene"], Condition(float(e["fov_deg"]), int(e["phosphenes"])))
            for e in doc["steps"]
        )
        return cls(steps=steps, break_after=int(doc.get("break_after", 7)), seed=int(doc.get("seed", 0)))


def build_trial_plan(scene_ids, conditions=DEFAULT_CONDITION_GRID, seed: int = 0, length: int = 15, break_after: int = 7) -> TrialPlan:
    """Draw ``length`` (scene, condition) steps, never repeating a scene.

    All (scene, condition) pairs are shuffled uniformly under ``seed`` and
    scanned in order, keeping the first pair for each still-unused scene.
    """
    scene_ids = list(scene_ids)
    conditions = list(conditions)
    if length < 1:
        raise PlanningError("plan length must be >= 1")
    if not conditions:
        raise PlanningError("at least one condition is required")
    if len(set(scene_ids)) < length:
        raise PlanningError(
            f"{length} steps without scene repetition need >= {length} scenes; "
            f"corpus has {len(set(scene_ids))}"
        )
    pairs = [(s, c) for s in scene_ids for c in conditions]
    rng = random.Random(seed)
    rng.shuffle(pairs)
    used = set()
    steps = []
    for scene, cond in pairs:
        if scene in used:
            continue
        used.add(scene)
        steps.append(TrialStep(scene, cond))
        if len(steps) == length:
            break
    return TrialPlan(steps=tuple(steps), break_after=break_after, seed=seed)


# ---------------------------------------------------------------------------
# log records
# ---------------------------------------------------------------------------


def make_record(timestamp_s: float, step: int, trial_step: TrialStep, event_type: str, object_class=None, count=None) -> dict:
    rec = {
        "timestamp_s": float(timestamp_s),
        "step": int(step),
        "scene": trial_step.scene,
        "fov_deg": float(trial_step.condition.fov_deg),
        "phosphenes": int(trial_step.condition.phosphenes),
        "event_type": event_type,
        "object_class": object_class,
        "count": count,
    }
    validate_record(rec)
    return rec


def validate_record(rec: dict) -> None:
    """Raise SchemaError unless ``rec`` matches the documented log schema."""
    if set(rec) != set(LOG_FIELDS):
        raise SchemaError(f"record fields {sorted(rec)} != {sorted(LOG_FIELDS)}")
    if not isinstance(rec["timestamp_s"], (int, float)) or rec["timestamp_s"] < 0:
        raise SchemaError(f"bad timestamp_s: {rec['timestamp_s']!r}")
    if not isinstance(rec["step"], int) or rec["step"] < 1:
        raise SchemaError(f"bad step: {rec['step']!r}")
    if not isinstance(rec["scene"], str) or not rec["scene"]:
        raise SchemaError(f"bad scene: {rec['scene']!r}")
    if not isinstance(rec["fov_deg"], (int, float)) or rec["fov_deg"] <= 0:
        raise SchemaError(f"bad fov_deg: {rec['fov_deg']!r}")
    if not isinstance(rec["phosphenes"], int) or rec["phosphenes"] < 1:
        raise SchemaError(f"bad phosphenes: {rec['phosphenes']!r}")
    if rec["event_type"] not in EVENT_TYPES:
        raise SchemaError(f"bad event_type: {rec['event_type']!r}")
    if rec["event_type"] == "response":
        if rec["object_class"] not in OBJECT_CLASSES:
            raise SchemaError(f"bad object_class: {rec['object_class']!r}")
        if not isinstance(rec["count"], int) or rec["count"] < 1:
            raise SchemaError(f"bad count: {rec['count']!r}")
    else:
        if rec["object_class"] is not None or rec["count"] is not None:
            raise SchemaError(f"{rec['event_type']} events carry null object_class/count")


@dataclass
class SessionLog:
    """Event records of one session plus scenes skipped due to load errors."""

    records: list = field(default_factory=list)
    skipped_scenes: list = field(default_factory=list)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(rec) + "\n" for rec in self.records)

    def write(self, path) -> None:
        Path(path).write_text(self.to_jsonl())

    @classmethod
    def from_jsonl(cls, text: str) -> "SessionLog":
        records = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"line {lineno}: invalid JSON: {exc}") from exc
            validate_record(rec)
            records.append(rec)
        return cls(records=records)

    @classmethod
    def read(cls, path) -> "SessionLog":
        return cls.from_jsonl(Path(path).read_text())


# ---------------------------------------------------------------------------
# agents
# ---------------------------------------------------------------------------


@dataclass
class AgentAction:
    orientation: tuple = IDENTITY_QUAT
    responses: tuple = ()  # object classes, one entry per single-count increment
    done: bool = False


class Agent:
    """Scripted observer driving a headless session.

    ``needs_frames`` tells the runner whether to render stimulus frames for
    this agent; scripted agents that ignore vision leave it False and the
    runner skips rendering entirely.
    """

    needs_frames = False

    def reset(self, trial_step: TrialStep, annotations) -> None:
        pass

    def step(self, elapsed_s: float, frame) -> AgentAction:
        raise NotImplementedError


class NullAgent(Agent):
    """Never responds; every step times out."""

    def step(self, elapsed_s, frame) -> AgentAction:
        return AgentAction()


class SweepAgent(Agent):
    """Rotates at a constant yaw rate and never responds."""

    def __init__(self, rate_deg_s: float = 30.0):
        self.rate_deg_s = rate_deg_s

    def step(self, elapsed_s, frame) -> AgentAction:
        yaw = np.deg2rad(self.rate_deg_s * elapsed_s)
        return AgentAction(orientation=tuple(quaternion_from_axis_angle((0, 0, 1), yaw)))


class OracleAgent(Agent):
    """Reports the ground-truth annotations, one object per tick, then stops."""

    def __init__(self, respond_at_s: float = 1.0):
        self.respond_at_s = respond_at_s
        self._queue = []

    def reset(self, trial_step, annotations) -> None:
        self._queue = []
        for cls_name in sorted(annotations or {}):
            self._queue.extend([cls_name] * annotations[cls_name])

    def step(self, elapsed_s, frame) -> AgentAction:
        if elapsed_s < self.respond_at_s:
            return AgentAction()
        if self._queue:
            return AgentAction(responses=(self._queue.pop(0),))
        return AgentAction(done=True)


# ---------------------------------------------------------------------------
# stimulus engine and session runner
# ---------------------------------------------------------------------------


class StimulusEngine:
    """Renders (scene, condition, orientation) requests against a corpus.

    One fitted renderer is kept per condition; switching scenes only swaps
    the bound panorama, so the expensive precompute happens once per
    condition.
    """

    def __init__(self, corpus: Corpus, camera: CameraModel = None, levels: int = 8, sigma_ratio: float = 0.5, stencil: int = 3):
        self.corpus = corpus
        self.camera = camera if camera is not None else default_camera()
        self.levels = levels
        self.sigma_ratio = sigma_ratio
        self.stencil = stencil
        self._renderers: dict = {}

    def renderer_for(self, scene_id: str, condition: Condition) -> PhospheneRenderer:
        entry = self._renderers.get(condition)
        if entry is None:
            renderer = PhospheneRenderer(
                n_phosphenes=condition.phosphenes,
                fov_deg=condition.fov_deg,
                levels=self.levels,
                sigma_ratio=self.sigma_ratio,
                stencil=self.stencil,
                camera=self.camera,
            ).fit(self.corpus.panorama(scene_id))
            self._renderers[condition] = [renderer, scene_id]
            return renderer
        renderer, bound_scene = entry
        if bound_scene != scene_id:
            renderer.set_panorama(self.corpus.panorama(scene_id))
            entry[1] = scene_id
        return renderer

    def render(self, scene_id: str, condition: Condition, quat, timestamp_s: float = 0.0) -> StimulusFrame:
        return self.renderer_for(scene_id, condition).render(quat, timestamp_s=timestamp_s)


def emit_fixation_frame(cam: CameraModel = None, dot_radius_px: float = 8.0) -> StimulusFrame:
    """Black frame with a white fixation dot at the display center."""
    cam = cam if cam is not None else default_camera()
    ys = np.arange(cam.height, dtype=np.float64) - cam.cy
    xs = np.arange(cam.width, dtype=np.float64) - cam.cx
    disc = ys[:, None] ** 2 + xs[None, :] ** 2 <= dot_radius_px * dot_radius_px
    return StimulusFrame(buffer=disc.astype(np.float32), condition="fixation", channel="white")


def run_headless_session(
    plan: TrialPlan,
    agent: Agent,
    engine: StimulusEngine,
    tick_hz: float = 20.0,
    fixation_s: float = 2.0,
    timeout_s: float = 60.0,
    break_s: float = 60.0,
) -> SessionLog:
    """Run a full scripted session on the simulated clock.

    Timestamps are computed arithmetically from the step schedule, so two
    runs with identical inputs produce byte-identical logs. A scene whose
    panorama or annotations cannot be loaded is skipped (recorded in
    ``skipped_scenes``) and the session continues.
    """
    if tick_hz <= 0 or timeout_s <= 0:
        raise PlanningError("tick_hz and timeout_s must be positive")
    log = SessionLog()
    dt = 1.0 / tick_hz
    now = 0.0
    for step_idx, trial_step in enumerate(plan.steps, start=1):
        if step_idx == plan.break_after + 1:
            now += break_s
        try:
            annotations = engine.corpus.annotations(trial_step.scene)
            if agent.needs_frames:
                engine.corpus.panorama(trial_step.scene)  # fail early, not mid-step
        except (SpvError, OSError) as exc:
            log.skipped_scenes.append(f"{trial_step.scene}: {exc}")
            continue
        now += fixation_s
        onset = now
        log.records.append(make_record(onset, step_idx, trial_step, "fixation"))
        agent.reset(trial_step, annotations)
        tally: dict = {}
        orientation = IDENTITY_QUAT
        tick = 0
        finished = False
        while True:
            elapsed = tick * dt
            if elapsed >= timeout_s:
                break
            frame = None
            if agent.needs_frames:
                frame = engine.render(trial_step.scene, trial_step.condition, orientation, timestamp_s=onset + elapsed)
            action = agent.step(elapsed, frame)
            orientation = action.orientation
            for cls_name in action.responses:
                tally[cls_name] = tally.get(cls_name, 0) + 1
                log.records.append(
                    make_record(onset + elapsed, step_idx, trial_step, "response", cls_name, tally[cls_name])
                )
            if action.done:
                log.records.append(make_record(onset + elapsed, step_idx, trial_step, "done"))
                finished = True
                break
            tick += 1
        if not finished:
            log.records.append(make_record(onset + timeout_s, step_idx, trial_step, "timeout"))
            now = onset + timeout_s
        else:
            now = onset + tick * dt
    return log


def azimuth_coverage(yaws_rad, fov_deg: float, bins: int = 3600) -> float:
    """Fraction of the full azimuth circle swept by a FOV-wide window."""
    yaws = np.asarray(yaws_rad, dtype=np.float64)
    half = np.deg2rad(fov_deg) / 2.0
    edges = np.linspace(0.0, 2.0 * np.pi, bins, endpoint=False)
    covered = np.zeros(bins, dtype=bool)
    for yaw in yaws:
        delta = np.abs((edges - yaw + np.pi) % (2.0 * np.pi) - np.pi)
        covered |= delta <= half
    return float(covered.mean())
