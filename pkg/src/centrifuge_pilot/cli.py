"""``centrifuge-pilot`` command line.

Every subcommand reads the pipeline config from ``--config`` (falling back to
``$CENTRIFUGE_PILOT_CONFIG``, then the built-in defaults) and writes files only
under ``--out``.
"""

import argparse
import json
import os
import sys

from . import pnm
from .config import load_config
from .errors import CentrifugePilotError, ParameterError
from .experiments import (
    camera_pose_state, format_records, format_report, format_table, random_scene,
    run_detection_experiment, run_localization_experiment, run_runtime_experiment, trial_seed,
)
from .motion import (
    Controller, Operation, SimulatedWorld, TrueBucket, execute_plan, plan_insertion, plan_removal, serialize,
)
from .pipeline import accumulator_image, annotate, detect
from .prng import Stream
from .scenegen import GroundTruth, render, spec_from_dict, spec_to_dict


def _out_path(args, name):
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _load_scene(args):
    """(rgb image, GroundTruth or None) from a PPM path or a scene spec JSON."""
    if args.spec:
        with open(args.spec) as fh:
            spec = spec_from_dict(json.load(fh))
        return render(spec)
    if not args.image:
        raise ParameterError("give an image path or --spec")
    img = pnm.read(args.image)
    if img.ndim != 3:
        raise ParameterError(f"{args.image}: expected a colour (P6) image")
    truth = None
    sidecar = os.path.splitext(args.image)[0] + ".truth.json"
    if os.path.exists(sidecar):
        with open(sidecar) as fh:
            truth = GroundTruth.from_dict(json.load(fh))
    return img, truth


def _describe(result):
    lines = []
    for i, (obs, pose) in enumerate(zip(result.observations, result.poses)):
        c = obs.circle
        state = f"Occupied ({obs.color_label})" if obs.occupied else "Empty"
        where = "outside workspace" if pose is None else f"gantry X{pose.x:.2f} Y{pose.y:.2f}"
        lines.append(f"bucket {i}: center ({c.center[0]:.1f}, {c.center[1]:.1f}) r={c.radius:g} "
                     f"votes={c.score} {state} {where}")
    return lines


def cmd_detect(args, config):
    img, _ = _load_scene(args)
    result = detect(img, config)
    for line in _describe(result):
        print(line)
    if not result.observations:
        print("no buckets found")
    if args.annotate:
        path = _out_path(args, "annotated.ppm")
        pnm.write(path, annotate(img, result, config))
        print(f"wrote {path}")
    if args.accumulator:
        path = _out_path(args, "accumulator.pgm")
        pnm.write(path, accumulator_image(result.votes))
        print(f"wrote {path}")
    return 0


def cmd_render(args, config):
    if args.spec:
        with open(args.spec) as fh:
            spec = spec_from_dict(json.load(fh))
    else:
        stream = Stream(trial_seed(args.seed, 0))
        spec = random_scene(stream, args.tubes, config, args.glare, 1, nominal=not args.ideal)
    img, truth = render(spec, config.calibration)
    stem = _out_path(args, args.name)
    pnm.write(stem + ".ppm", img)
    with open(stem + ".truth.json", "w") as fh:
        fh.write(truth.dumps())
    with open(stem + ".spec.json", "w") as fh:
        fh.write(json.dumps(spec_to_dict(spec), indent=2, sort_keys=True) + "\n")
    print(f"wrote {stem}.ppm")
    return 0


def _operate(args, config, operation):
    img, truth = _load_scene(args)
    result = detect(img, config)
    want = operation is Operation.REMOVE
    target = next((p for o, p in zip(result.observations, result.poses) if o.occupied == want and p is not None), None)
    if target is None:
        print(f"no {'occupied' if want else 'empty'} bucket detected; nothing to do")
        return 0
    planner = plan_removal if want else plan_insertion
    plan = planner(target, config.calibration, config.feeds)
    text = serialize(plan)
    path = _out_path(args, f"{operation.value}.gcode")
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    if truth is not None:
        buckets = [TrueBucket(x, y, o, c) for (x, y), o, c in zip(truth.gantry_poses, truth.occupied, truth.color_labels)]
    else:
        # without ground truth the detections are taken as the world
        buckets = [TrueBucket(p.x, p.y, o.occupied, o.color_label)
                   for o, p in zip(result.observations, result.poses) if p is not None]
    w = config.world
    world = SimulatedWorld(buckets, w.tol_grip, w.tol_insert, w.capture_mm)
    rep = execute_plan(plan, Controller(camera_pose_state(config), config.latency), world)
    for line, reply in zip(rep.lines, rep.replies):
        print(f"> {line}  < {reply}")
    verdict = "success" if rep.success else f"failed ({rep.failure.value})"
    print(f"{operation.value}: {verdict}; elapsed {rep.elapsed:.3f} s, serial share {rep.serial_share:.1%}")
    print(f"wrote {path}")
    return 0


def cmd_experiment(args, config):
    if args.which == "detection":
        table = run_detection_experiment(20 if args.trials is None else args.trials, args.seed, config)
    elif args.which == "localization":
        table = run_localization_experiment(40 if args.trials is None else args.trials, args.seed, config,
                                            args.noise_mm, args.glare)
    else:
        table = run_runtime_experiment(config, args.seed, wall_clock=not args.no_wall_clock)
    print(format_report(table, "md"), end="")
    ext = "csv" if args.format == "csv" else "md"
    path = _out_path(args, f"{args.which}.{ext}")
    with open(path, "w", newline="\n") as fh:
        fh.write(format_table(table, args.format))
    if hasattr(table, "records"):
        with open(_out_path(args, f"{args.which}_trials.{ext}"), "w", newline="\n") as fh:
            fh.write(format_records(table.records, args.format))
    print(f"wrote {path}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="centrifuge-pilot", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="pipeline config JSON (default: $CENTRIFUGE_PILOT_CONFIG)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default="out", help="output directory")
    sub = p.add_subparsers(dest="command", required=True)

    scene = argparse.ArgumentParser(add_help=False)
    scene.add_argument("image", nargs="?", help="PPM image (a NAME.truth.json sidecar is used if present)")
    scene.add_argument("--spec", help="render this scene spec JSON instead of reading an image")

    d = sub.add_parser("detect", parents=[common, scene], help="find buckets and tubes in one image")
    d.add_argument("--annotate", action="store_true", help="write annotated.ppm")
    d.add_argument("--accumulator", action="store_true", help="write the Hough accumulator as accumulator.pgm")
    d.set_defaults(func=cmd_detect)

    r = sub.add_parser("render", parents=[common], help="render a synthetic scene with ground truth")
    r.add_argument("--spec", help="scene spec JSON; default is a random scene from --seed")
    r.add_argument("--tubes", type=int, choices=(0, 1, 2), default=2)
    r.add_argument("--glare", type=float, default=0.0, help="glare strength on the first tube")
    r.add_argument("--ideal", action="store_true", help="unit gain and no noise")
    r.add_argument("--name", default="scene")
    r.set_defaults(func=cmd_render)

    for op in (Operation.INSERT, Operation.REMOVE):
        o = sub.add_parser(op.value, parents=[common, scene], help=f"plan and simulate a tube {op.value}")
        o.set_defaults(func=lambda a, c, op=op: _operate(a, c, op))

    e = sub.add_parser("experiment", parents=[common], help="rerun an experiment on synthetic scenes")
    e.add_argument("which", choices=("detection", "localization", "runtime"))
    e.add_argument("--trials", type=int)
    e.add_argument("--format", choices=("csv", "md"), default="md")
    e.add_argument("--noise-mm", type=float, default=None, help="injected XY localization noise sigma")
    e.add_argument("--glare", type=float, default=0.0, help="glare strength for localization trials")
    e.add_argument("--no-wall-clock", action="store_true", help="omit host timings (byte-stable runtime report)")
    e.set_defaults(func=cmd_experiment)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        return args.func(args, config)
    except (OSError, CentrifugePilotError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
