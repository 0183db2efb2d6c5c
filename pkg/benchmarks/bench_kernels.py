"""Time every kernel on both backends using one 1280x720 frame.

    python benchmarks/bench_kernels.py [--repeat N]

Inputs are taken from a real pipeline run on a synthetic scene, so the edge
counts and mask shapes are representative. Each backend's output is checked
against the other before timing.
"""

import argparse
import time

import numpy as np

from centrifuge_pilot import _kernels, imaging
from centrifuge_pilot.config import PipelineConfig
from centrifuge_pilot.hough import accumulator_shape, sobel
from centrifuge_pilot.pipeline import preprocess
from centrifuge_pilot.scenegen import SceneSpec, Tube, render
from centrifuge_pilot.tubes import DEFAULT_RANGES


def kernel_inputs():
    cfg = PipelineConfig()
    spec = SceneSpec(tubes=(Tube.named("yellow"), Tube.named("green")), noise_sigma=3.0, seed=11)
    rgb, _ = render(spec)
    gray = imaging.to_grayscale(rgb)
    pre = preprocess(rgb, cfg)
    grad = sobel(pre)
    mag = np.ascontiguousarray(grad.magnitude)
    edges = _kernels.nms_hysteresis(mag, grad.gx, grad.gy, 20, 120)
    ys, xs = np.nonzero(edges)
    gx = grad.gx[ys, xs].astype(np.float64)
    gy = grad.gy[ys, xs].astype(np.float64)
    norm = np.hypot(gx, gy)
    acc_h, acc_w = accumulator_shape(1280, 720, 1.5)
    luts = imaging.clahe_luts(gray)
    y0, y1, wy = imaging._interp_axis(720, imaging._tile_edges(720, 8))
    x0, x1, wx = imaging._interp_axis(1280, imaging._tile_edges(1280, 8))
    bounds = np.array([[r.h_lo, r.h_hi, r.s_lo, r.s_hi, r.v_lo, r.v_hi] for r in DEFAULT_RANGES])
    keep = imaging.annulus_keep(rgb.shape, cfg.annulus()).astype(np.uint8)
    mask = np.ascontiguousarray(_kernels.hsv_range_masks(rgb, bounds, keep)[0])
    return {
        "median_u8": (gray, 9),
        "clahe_interp": (gray, luts, y0.astype(np.intp), y1.astype(np.intp), wy,
                         x0.astype(np.intp), x1.astype(np.intp), wx),
        "nms_hysteresis": (mag, grad.gx, grad.gy, 20, 120),
        "hough_vote": (xs.astype(np.int64), ys.astype(np.int64), gx / norm, gy / norm, acc_h, acc_w, 1.5, 30, 35),
        "hsv_range_masks": (rgb, bounds, keep),
        "outer_borders": (mask,),
    }


def same(a, b):
    if isinstance(a, list):
        return len(a) == len(b) and all(np.array_equal(x, y) for x, y in zip(a, b))
    return np.array_equal(a, b)


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = _kernels.available_backends()
    if "compiled" not in backends:
        print("compiled extension not built; timing the python backend only")
    inputs = kernel_inputs()
    print(f"{'kernel':<18}{'python ms':>12}{'compiled ms':>14}{'speedup':>10}")
    for name, kargs in inputs.items():
        py = getattr(backends["python"], name)
        t_py = best_of(py, kargs, args.repeat)
        if "compiled" in backends:
            c = getattr(backends["compiled"], name)
            if not same(py(*kargs), c(*kargs)):
                raise SystemExit(f"{name}: backends disagree")
            t_c = best_of(c, kargs, args.repeat)
            print(f"{name:<18}{t_py * 1e3:>12.2f}{t_c * 1e3:>14.2f}{t_py / t_c:>9.1f}x")
        else:
            print(f"{name:<18}{t_py * 1e3:>12.2f}{'-':>14}{'-':>10}")


if __name__ == "__main__":
    main()
