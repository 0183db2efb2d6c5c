"""Synthetic reruns of the detection, localization and run-time experiments.

Each trial draws its scene from its own SplitMix64 stream, seeded from the
experiment seed and the trial number, so trials are independent and any
subset can be rerun alone. Reports are assembled in trial order.
"""

import csv
import io
import math
import time
from dataclasses import dataclass, field, fields
from typing import Optional

from .errors import OutOfWorkspaceError, ParameterError
from .localization import WorldPose
from .motion import (
    Controller, ControllerState, FailureClass, Operation, SimulatedWorld, TrueBucket,
    execute_plan, plan_insertion, plan_removal,
)
from .pipeline import detect
from .prng import Stream, splitmix64
from .scenegen import TUBE_RGB, Glare, SceneSpec, Tube, render

TUBE_COUNTS = (0, 1, 2)
COLOR_NAMES = tuple(sorted(TUBE_RGB))


@dataclass
class TrialRecord:
    trial: int
    seed: int
    operation: str  # detect | remove | insert
    tubes_true: int
    tubes_identified: int
    buckets_true: int
    buckets_detected: int
    detection_ok: bool
    identification_ok: bool
    success: Optional[bool] = None  # None for detection-only trials
    failure: str = FailureClass.NONE.value
    localization_error_mm: Optional[float] = None
    elapsed_s: Optional[float] = None

    @classmethod
    def columns(cls):
        return [f.name for f in fields(cls)]

    def row(self):
        return [_cell(getattr(self, name)) for name in self.columns()]


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


@dataclass
class MetricsTable:
    title: str
    headers: list
    rows: list
    records: list = field(default_factory=list)
    failures: dict = field(default_factory=dict)  # operation -> {failure class: count}
    notes: list = field(default_factory=list)


@dataclass
class TimingTable:
    title: str
    headers: list
    rows: list
    serial_share: float
    detection_budget_s: float
    notes: list = field(default_factory=list)


# ---------------------------------------------------------------- formatting


def _csv_text(headers, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(headers)
    w.writerows(rows)
    return buf.getvalue()


def _md_text(headers, rows):
    cells = [list(map(str, headers))] + [list(map(str, r)) for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]

    def line(r):
        return "| " + " | ".join(c.ljust(wd) for c, wd in zip(r, widths)) + " |"

    out = [line(cells[0]), "|" + "|".join("-" * (wd + 2) for wd in widths) + "|"]
    out += [line(r) for r in cells[1:]]
    return "\n".join(out) + "\n"


def format_table(table, fmt="md"):
    """Summary table text; ``fmt`` is ``csv`` or ``md``."""
    if fmt == "csv":
        return _csv_text(table.headers, table.rows)
    if fmt == "md":
        text = f"### {table.title}\n\n" + _md_text(table.headers, table.rows)
        for note in table.notes:
            text += f"\n{note}\n"
        return text
    raise ParameterError(f"unknown report format {fmt!r}")


def format_records(records, fmt="md"):
    rows = [r.row() for r in records]
    if fmt == "csv":
        return _csv_text(TrialRecord.columns(), rows)
    if fmt == "md":
        return _md_text(TrialRecord.columns(), rows)
    raise ParameterError(f"unknown report format {fmt!r}")


def format_failures(table, fmt="md"):
    headers = ["operation"] + [c.value for c in FailureClass]
    rows = [[op] + [counts.get(c.value, 0) for c in FailureClass] for op, counts in table.failures.items()]
    if fmt == "csv":
        return _csv_text(headers, rows)
    if fmt == "md":
        return _md_text(headers, rows)
    raise ParameterError(f"unknown report format {fmt!r}")


def format_report(table, fmt="md"):
    """Everything in one text: summary, failure counts and per-trial rows."""
    parts = [format_table(table, fmt)]
    if isinstance(table, MetricsTable):
        if fmt == "md":
            parts.append("\n#### Failure classes\n\n" + format_failures(table, fmt))
            parts.append("\n#### Trials\n\n" + format_records(table.records, fmt))
        else:
            parts += [format_failures(table, fmt), format_records(table.records, fmt)]
    return ("" if fmt == "md" else "\n").join(parts)


# ---------------------------------------------------------------- scenes


def trial_seed(seed, trial):
    return splitmix64(seed, trial)


def random_scene(stream, tube_count, config, glare_strength=0.0, glare_tubes=1, nominal=True):
    """Two buckets at random angles, ``tube_count`` random tubes, lighting
    drawn within the configured nominal bounds.

    With ``glare_strength > 0`` the first ``glare_tubes`` tubes get a glare
    blob centred on them and sensor noise is left out: the blob's halo
    already flattens the hole rim, and noise on top of it can hide the
    bucket altogether, which is not the failure being reproduced.
    """
    ex = config.experiment
    a0 = stream.uniform(0.0, 360.0)
    a1 = (a0 + stream.uniform(60.0, 300.0)) % 360.0
    hole_r = stream.uniform(*ex.hole_radius_range)
    tubes = [None, None]
    order = [0, 1] if stream.integer(2) == 0 else [1, 0]
    for k in range(tube_count):
        tubes[order[k]] = Tube.named(stream.choice(COLOR_NAMES))
    gain = stream.uniform(*ex.ambient_gain_range) if nominal else 1.0
    noise = stream.uniform(*ex.noise_sigma_range) if nominal else 0.0
    if glare_strength > 0:
        noise = 0.0
    noise_seed = stream.next_u64()
    rc = tuple(config.calibration.rotor_center_px)
    spec = SceneSpec(
        rotor_center_px=rc, bucket_angles=(a0, a1), hole_radius_px=hole_r, tubes=tuple(tubes),
        ambient_gain=gain, noise_sigma=noise, seed=noise_seed,
    )
    if glare_strength > 0:
        centers = spec.hole_centers()
        blobs = tuple(
            Glare(centers[order[k]], ex.glare_radius_fraction * hole_r, glare_strength)
            for k in range(min(glare_tubes, tube_count))
        )
        spec = SceneSpec(**{**spec.__dict__, "glare": blobs})
    return spec


def match_observations(observations, truth):
    """Index of the true bucket each observation lies on (None if its center
    is further than the hole radius from every true center)."""
    out = []
    for obs in observations:
        best = None
        for i, (u, v, r) in enumerate(truth.circles):
            d = math.hypot(obs.circle.center[0] - u, obs.circle.center[1] - v)
            if d <= r and (best is None or d < best[1]):
                best = (i, d)
        out.append(None if best is None else best[0])
    return out


def score_detection(result, truth):
    """(buckets detected correctly, tubes identified correctly).

    Detection needs one observation on each true bucket and nothing else.
    Identification needs every observation's occupancy to agree with the
    bucket it lies on; a stray observation must read Empty.
    """
    matches = match_observations(result.observations, truth)
    detection_ok = (len(matches) == len(truth.circles)
                    and None not in matches and len(set(matches)) == len(matches))
    identification_ok = all(
        obs.occupied == (m is not None and truth.occupied[m])
        for obs, m in zip(result.observations, matches)
    )
    return detection_ok, identification_ok


# ---------------------------------------------------------------- experiments


def _count_rows(records, stages):
    rows = []
    for name, key in stages:
        row = [name]
        for k in TUBE_COUNTS:
            sub = [r for r in records if r.tubes_true == k]
            row.append(f"{sum(1 for r in sub if key(r))}/{len(sub)}")
        rows.append(row)
    return rows


def _headers():
    return ["stage"] + [f"{k} tubes (actual/desired)" for k in TUBE_COUNTS]


def run_detection_experiment(n=20, seed=0, config=None):
    """Detection and identification counts per tube count over ``n`` nominal scenes."""
    from .config import PipelineConfig

    config = config or PipelineConfig()
    if n < 0:
        raise ParameterError("n must be >= 0")
    records = []
    failures = {c.value: 0 for c in FailureClass}
    for t in range(n):
        ts = trial_seed(seed, t)
        stream = Stream(ts)
        count = TUBE_COUNTS[stream.integer(3)]
        spec = random_scene(stream, count, config)
        img, truth = render(spec)
        result = detect(img, config)
        det_ok, id_ok = score_detection(result, truth)
        failure = FailureClass.NONE
        if not det_ok:
            failure = FailureClass.DETECTION
        elif not id_ok:
            failure = FailureClass.IDENTIFICATION
        failures[failure.value] += 1
        records.append(TrialRecord(
            t, ts, "detect", count, result.tubes_identified, len(truth.circles),
            len(result.observations), det_ok, id_ok, None, failure.value,
        ))
    rows = _count_rows(records, [
        ("Detection", lambda r: r.detection_ok),
        ("Identification", lambda r: r.identification_ok),
    ])
    return MetricsTable("Test tube detection and identification", _headers(), rows, records,
                        {"detect": failures})


def _pick_target(result, operation):
    want_occupied = operation is Operation.REMOVE
    for obs, pose in zip(result.observations, result.poses):
        if obs.occupied == want_occupied and pose is not None:
            return obs, pose
    return None, None


def run_trial(trial, ts, operation, config, noise_mm=0.0, glare_strength=0.0):
    """One detect -> plan -> execute trial; returns a TrialRecord.

    Removals see 1 or 2 tubes, insertions 0 or 1, so a valid target always
    exists. With glare, removal scenes hold one glared tube and insertion
    scenes two tubes with one glared, so in both a desaturated tube reads as
    an empty bucket.
    """
    operation = Operation(operation)
    stream = Stream(ts)
    removal = operation is Operation.REMOVE
    if glare_strength > 0:
        tube_count = 1 if removal else 2
    else:
        tube_count = ((1, 2) if removal else (0, 1))[stream.integer(2)]
    spec = random_scene(stream, tube_count, config, glare_strength, 1)
    img, truth = render(spec)
    result = detect(img, config)
    det_ok, id_ok = score_detection(result, truth)
    calib = config.calibration

    def record(success, failure, err=None, elapsed=None):
        return TrialRecord(
            trial, ts, operation.value, tube_count, result.tubes_identified, len(truth.circles),
            len(result.observations), det_ok, id_ok, success, failure.value, err, elapsed,
        )

    obs, pose = _pick_target(result, operation)
    if pose is None:
        # nothing to act on: blame the stage that lost the target
        return record(False, FailureClass.DETECTION if not det_ok else FailureClass.IDENTIFICATION)
    # normals are drawn after the scene so noise changes never alter it
    dx, dy = stream.normal() * noise_mm, stream.normal() * noise_mm
    target = WorldPose(pose.x + dx, pose.y + dy, pose.z)
    planner = plan_removal if operation is Operation.REMOVE else plan_insertion
    try:
        plan = planner(target, calib, config.feeds)
    except OutOfWorkspaceError:
        return record(False, FailureClass.LOCALIZATION)
    w = config.world
    world = SimulatedWorld(
        [TrueBucket(x, y, occ, lab) for (x, y), occ, lab in zip(truth.gantry_poses, truth.occupied, truth.color_labels)],
        w.tol_grip, w.tol_insert, w.capture_mm,
    )
    controller = Controller(camera_pose_state(config), config.latency)
    rep = execute_plan(plan, controller, world)
    return record(rep.success, rep.failure, rep.xy_error, rep.elapsed)


def camera_pose_state(config):
    """Homed controller with the camera over the rotor center, where every
    operation starts after the image is taken."""
    c = config.calibration
    x = c.rotor_center_gantry_mm[0] - c.camera_offset_mm[0]
    y = c.rotor_center_gantry_mm[1] - c.camera_offset_mm[1]
    return ControllerState.homed_at(x, y, c.camera_z)


def run_localization_experiment(n=40, seed=0, config=None, noise_mm=None, glare_strength=0.0):
    """``n/2`` removals then ``n/2`` insertions; see :func:`run_trial`."""
    from .config import PipelineConfig

    config = config or PipelineConfig()
    if n < 0 or n % 2:
        raise ParameterError("n must be a non-negative even number")
    if noise_mm is None:
        noise_mm = config.experiment.localization_noise_mm
    records = []
    failures = {}
    for t in range(n):
        ts = trial_seed(seed, t)
        op = Operation.REMOVE if t < n // 2 else Operation.INSERT
        rec = run_trial(t, ts, op, config, noise_mm, glare_strength)
        records.append(rec)
        counts = failures.setdefault(op.value, {c.value: 0 for c in FailureClass})
        counts[rec.failure] += 1
    rows = []
    stages = [
        ("Detection", lambda r: r.detection_ok),
        ("Identification", lambda r: r.identification_ok),
        ("Localization", lambda r: bool(r.success)),
    ]
    for op, name in ((Operation.REMOVE, "Removal"), (Operation.INSERT, "Insertion")):
        sub = [r for r in records if r.operation == op.value]
        rows += [[name] + row for row in _count_rows(sub, stages)]
    notes = [f"Injected XY localization noise sigma = {noise_mm:g} mm; glare strength {glare_strength:g}."]
    return MetricsTable("Test tube insertion and removal", ["operation"] + _headers(), rows, records,
                        failures, notes)


def success_rate(table, operation):
    sub = [r for r in table.records if r.operation == Operation(operation).value]
    return sum(1 for r in sub if r.success) / len(sub) if sub else 0.0


def run_runtime_experiment(config=None, seed=0, wall_clock=True):
    """Detection wall-clock time and simulated insert/remove time for 0, 1
    and 2 tubes on ideal scenes.

    Only the detection column depends on the host; pass ``wall_clock=False``
    to blank it for byte-stable reports.
    """
    from .config import PipelineConfig

    config = config or PipelineConfig()
    det, ins, rem = [], [], []
    serial = total = 0.0
    for k in TUBE_COUNTS:
        stream = Stream(trial_seed(seed, k))
        spec = random_scene(stream, k, config, nominal=False)
        img, truth = render(spec)
        t0 = time.perf_counter()
        detect(img, config)
        det.append(time.perf_counter() - t0)
        for op, bucket in ((Operation.INSERT, ins), (Operation.REMOVE, rem)):
            want = op is Operation.REMOVE
            if want not in truth.occupied:
                bucket.append(None)
                continue
            x, y = truth.gantry_poses[truth.occupied.index(want)]
            planner = plan_removal if want else plan_insertion
            plan = planner(WorldPose(x, y, config.calibration.safe_z), config.calibration, config.feeds)
            world = SimulatedWorld([TrueBucket(px, py, o) for (px, py), o in zip(truth.gantry_poses, truth.occupied)],
                                   config.world.tol_grip, config.world.tol_insert, config.world.capture_mm)
            rep = execute_plan(plan, Controller(camera_pose_state(config), config.latency), world)
            bucket.append(rep.elapsed)
            serial += rep.serial_time
            total += rep.elapsed

    def fmt(v):
        return "-" if v is None else f"{v:.3f}"

    def avg(vs):
        vs = [v for v in vs if v is not None]
        return sum(vs) / len(vs) if vs else None

    if not wall_clock:
        det = [None] * len(det)
    rows = [
        ["Detection (wall clock)"] + [fmt(v) for v in det] + [fmt(avg(det))],
        ["Insertion (simulated)"] + [fmt(v) for v in ins] + [fmt(avg(ins))],
        ["Removal (simulated)"] + [fmt(v) for v in rem] + [fmt(avg(rem))],
    ]
    share = serial / total if total > 0 else 0.0
    budget = config.experiment.detection_budget_s
    notes = [f"Serial communication share of simulated motion time: {share:.1%}."]
    if wall_clock:
        verdict = "within" if max(det) < budget else "over"
        notes.append(f"Slowest detection {max(det):.3f} s, {verdict} the {budget:g} s budget.")
    headers = ["process"] + [f"{k} tubes (s)" for k in TUBE_COUNTS] + ["average (s)"]
    return TimingTable("Run times", headers, rows, share, budget, notes)
