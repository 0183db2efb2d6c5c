"""G-code plans for tube insertion/removal and a simulated RepRap-style controller.

Wire format: UTF-8 lines terminated by ``\\n``. Parameters are written in the
order X, Y, Z, A, F, P, S with two decimals. The controller answers ``ok``,
an ``X:.. Y:.. Z:..`` position report for M114, or ``Error: ...``.
"""

import enum
import math
import re
from dataclasses import dataclass, field, replace
from typing import Optional

from .errors import ConfigError, OutOfWorkspaceError, ParameterError

WORDS = ("G0", "G1", "G28", "G90", "G91", "M400", "M114", "M42")
PARAM_ORDER = "XYZAFPS"
_NUMBER = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)$")
_WORD = re.compile(r"^([GM])(\d+)$")


class GCodeParseError(ParameterError):
    pass


@dataclass(frozen=True)
class GCodeCommand:
    word: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        for k, v in self.params.items():
            if k not in PARAM_ORDER:
                raise ParameterError(f"unknown parameter letter {k!r}")
            if not math.isfinite(v):
                raise ParameterError(f"parameter {k} is not finite")
        if "F" in self.params and self.params["F"] <= 0:
            raise ParameterError("feedrate must be positive")

    def __hash__(self):
        return hash((self.word, tuple(sorted(self.params.items()))))


def _fmt(v):
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def format_command(cmd):
    parts = [cmd.word]
    for letter in PARAM_ORDER:
        if letter in cmd.params:
            parts.append(letter + _fmt(cmd.params[letter]))
    return " ".join(parts)


def parse_line(line):
    """Parse one G-code line. Raises GCodeParseError on malformed input;
    unsupported words parse fine and are rejected by the controller."""
    text = line.split(";", 1)[0].strip()
    tokens = text.split()
    if not tokens:
        raise GCodeParseError("empty line")
    m = _WORD.match(tokens[0].upper())
    if not m:
        raise GCodeParseError(f"bad command word {tokens[0]!r}")
    word = m.group(1) + str(int(m.group(2)))
    params = {}
    for tok in tokens[1:]:
        letter, num = tok[0].upper(), tok[1:]
        if letter not in PARAM_ORDER or not _NUMBER.match(num):
            raise GCodeParseError(f"bad parameter {tok!r}")
        params[letter] = float(num)
    try:
        return GCodeCommand(word, params)
    except ParameterError as exc:
        raise GCodeParseError(str(exc)) from exc


def serialize(plan):
    """Plan (or command list) -> wire text, one ``\\n``-terminated line per command."""
    commands = plan.commands if isinstance(plan, MotionPlan) else plan
    return "".join(format_command(c) + "\n" for c in commands)


def parse_program(text):
    return [parse_line(line) for line in text.splitlines() if line.split(";", 1)[0].strip()]


# ---------------------------------------------------------------- planning


class Operation(str, enum.Enum):
    INSERT = "insert"
    REMOVE = "remove"


@dataclass(frozen=True)
class Feedrates:
    """mm/min. Descent and release run slower than travel."""

    travel: float = 36000.0
    descend: float = 12000.0
    release: float = 6000.0

    def __post_init__(self):
        if min(self.travel, self.descend, self.release) <= 0:
            raise ConfigError("feedrates must be positive")
        if self.descend > self.travel:
            raise ConfigError("descend feedrate must not exceed travel feedrate")


@dataclass(frozen=True)
class PlanStep:
    label: str  # approach | descend | engage | retract | depart
    command: GCodeCommand


@dataclass(frozen=True)
class MotionPlan:
    operation: Operation
    target: object  # WorldPose
    steps: tuple

    @property
    def commands(self):
        return [s.command for s in self.steps]

    def end_pose(self):
        """(x, y, z, a) after the last move, assuming absolute mode."""
        pos = {}
        for c in self.commands:
            if c.word in ("G0", "G1"):
                pos.update({k: v for k, v in c.params.items() if k in "XYZA"})
        return tuple(pos.get(k) for k in "XYZA")


def _q(v):
    return round(float(v), 2)


def _check_target(target, calib, depth):
    if calib.grip_z >= calib.safe_z or calib.insert_z >= calib.safe_z:
        raise ConfigError("working depths must be below safe_z")
    for z in (calib.safe_z, depth):
        if not calib.in_workspace(target.x, target.y, z):
            raise OutOfWorkspaceError(f"target ({target.x:.2f}, {target.y:.2f}) outside workspace")


def _plan(operation, target, calib, feeds, depth, lift_feed):
    _check_target(target, calib, depth)
    x, y = _q(target.x), _q(target.y)
    steps = (
        PlanStep("approach", GCodeCommand("G90")),
        PlanStep("approach", GCodeCommand("G0", {"Z": _q(calib.safe_z), "F": feeds.travel})),
        PlanStep("approach", GCodeCommand("G0", {"X": x, "Y": y, "A": 0.0, "F": feeds.travel})),
        PlanStep("descend", GCodeCommand("G1", {"Z": _q(depth), "F": feeds.descend})),
        PlanStep("retract", GCodeCommand("G1", {"Z": _q(calib.safe_z), "F": lift_feed})),
        PlanStep("depart", GCodeCommand("M400")),
    )
    return MotionPlan(Operation(operation), target, steps)


def plan_removal(target, calib, feeds=Feedrates()):
    """Raise, travel, descend to grip depth, lift the tube out by friction."""
    return _plan(Operation.REMOVE, target, calib, feeds, calib.grip_z, feeds.descend)


def plan_insertion(target, calib, feeds=Feedrates()):
    """Like removal but to insert depth; the slow ascent leaves the tube
    behind in the bucket (the gripper is passive)."""
    return _plan(Operation.INSERT, target, calib, feeds, calib.insert_z, feeds.release)


def plan_dropoff(pose_xy, calib, feeds=Feedrates()):
    """Travel at safe height to the drop-off point for removed tubes."""
    return [
        GCodeCommand("G0", {"Z": _q(calib.safe_z), "F": feeds.travel}),
        GCodeCommand("G0", {"X": _q(pose_xy[0]), "Y": _q(pose_xy[1]), "F": feeds.travel}),
        GCodeCommand("M400"),
    ]


# ---------------------------------------------------------------- controller


@dataclass(frozen=True)
class LatencyModel:
    t_serial: float = 0.5  # seconds per line round trip

    def __post_init__(self):
        if self.t_serial < 0:
            raise ConfigError("t_serial must be >= 0")


@dataclass(frozen=True)
class ControllerState:
    pos: tuple = (0.0, 0.0, 0.0, 0.0)
    feedrate: float = 3000.0
    absolute: bool = True
    homed: bool = False
    pins: tuple = ()  # sorted (pin, level) pairs
    elapsed: float = 0.0
    lines: int = 0

    @classmethod
    def homed_at(cls, x, y, z, a=0.0, feedrate=3000.0):
        return cls(pos=(float(x), float(y), float(z), float(a)), feedrate=feedrate, homed=True)


def controller_execute(line, state, lm=LatencyModel()):
    """Execute one line; returns ``(reply, new_state)``.

    Every received line costs ``t_serial``; moves add path length / feedrate.
    """
    st = replace(state, elapsed=state.elapsed + lm.t_serial, lines=state.lines + 1)
    try:
        cmd = parse_line(line)
    except GCodeParseError:
        return "Error: parse", st
    w = cmd.word
    if w not in WORDS:
        return f"Error: unsupported command {w}", st
    p = cmd.params
    if w == "G28":
        return "ok", replace(st, pos=(0.0, 0.0, 0.0, 0.0), homed=True)
    if w == "G90":
        return "ok", replace(st, absolute=True)
    if w == "G91":
        return "ok", replace(st, absolute=False)
    if w == "M400":
        return "ok", st
    if w == "M114":
        x, y, z, _ = st.pos
        return f"X:{_fmt(x)} Y:{_fmt(y)} Z:{_fmt(z)}", st
    if w == "M42":
        if "P" not in p or "S" not in p:
            return "Error: parse", st
        pins = dict(st.pins)
        pins[int(p["P"])] = p["S"]
        return "ok", replace(st, pins=tuple(sorted(pins.items())))
    # G0 / G1
    if not st.homed:
        return "Error: not homed", st
    feed = p.get("F", st.feedrate)
    old = st.pos
    new = []
    for axis, cur in zip("XYZA", old):
        if axis in p:
            new.append(p[axis] if st.absolute else cur + p[axis])
        else:
            new.append(cur)
    dist = math.sqrt(sum((n - o) ** 2 for n, o in zip(new[:3], old[:3])))
    move_time = dist / (feed / 60.0)
    elapsed = state.elapsed + (lm.t_serial + move_time)
    return "ok", replace(st, pos=tuple(new), feedrate=feed, elapsed=elapsed)


class Controller:
    """Strictly serial session: one line in flight, reply awaited."""

    def __init__(self, state=None, latency=LatencyModel()):
        self.state = state if state is not None else ControllerState()
        self.latency = latency
        self.transcript = []

    def send(self, line):
        reply, self.state = controller_execute(line, self.state, self.latency)
        self.transcript.append((line, reply))
        return reply


# ---------------------------------------------------------------- outcomes


class FailureClass(str, enum.Enum):
    NONE = "None"
    LOCALIZATION = "Localization"
    IDENTIFICATION = "Identification"
    DETECTION = "Detection"
    CONTROLLER = "Controller"  # plan aborted by an error reply


@dataclass
class TrueBucket:
    x: float  # gripper-frame gantry position of the bucket center, mm
    y: float
    occupied: bool
    color_label: Optional[str] = None


@dataclass
class SimulatedWorld:
    buckets: list
    tol_grip: float = 1.5
    tol_insert: float = 4.0
    capture_mm: float = 10.0  # further than this from every bucket hits the rotor

    def __post_init__(self):
        if not self.tol_insert > self.tol_grip:
            raise ConfigError("tol_insert must exceed tol_grip")

    def nearest(self, x, y):
        best = None
        for b in self.buckets:
            d = math.hypot(b.x - x, b.y - y)
            if best is None or d < best[1]:
                best = (b, d)
        return best


@dataclass
class OperationReport:
    operation: Operation
    lines: list
    replies: list
    elapsed: float
    serial_time: float
    success: bool
    failure: FailureClass
    xy_error: Optional[float] = None
    error: Optional[str] = None

    @property
    def serial_share(self):
        return self.serial_time / self.elapsed if self.elapsed > 0 else 0.0


def execute_plan(plan, controller, world):
    """Stream the plan line by line, then judge the physical outcome at the
    lowest point the tool reached."""
    lines = serialize(plan).splitlines()
    replies = []
    t0 = controller.state.elapsed
    lowest = None
    error = None
    for line in lines:
        reply = controller.send(line)
        replies.append(reply)
        if reply.startswith("Error"):
            error = reply
            break
        x, y, z, _ = controller.state.pos
        if lowest is None or z < lowest[2]:
            lowest = (x, y, z)
    elapsed = controller.state.elapsed - t0
    serial = len(replies) * controller.latency.t_serial

    def report(success, failure, xy_error=None):
        return OperationReport(plan.operation, lines[:len(replies)], replies, elapsed, serial,
                               success, failure, xy_error, error)

    if error is not None:
        return report(False, FailureClass.CONTROLLER)
    hit = world.nearest(lowest[0], lowest[1])
    if hit is None or hit[1] > world.capture_mm:
        return report(False, FailureClass.DETECTION, None if hit is None else hit[1])
    bucket, err = hit
    if plan.operation is Operation.REMOVE:
        if not bucket.occupied:
            return report(False, FailureClass.IDENTIFICATION, err)
        if err > world.tol_grip:
            return report(False, FailureClass.LOCALIZATION, err)
        bucket.occupied = False
        bucket.color_label = None
    else:
        if bucket.occupied:
            return report(False, FailureClass.IDENTIFICATION, err)
        if err > world.tol_insert:
            return report(False, FailureClass.LOCALIZATION, err)
        bucket.occupied = True
    return report(True, FailureClass.NONE, err)
