"""Timing of the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is called once untimed (JIT warm-up), then timed as the best of
``--repeat`` runs. The outputs of both flavours are compared as well.
"""
import argparse
import math
import time

import numpy as np

from hkdrop import kernels
from hkdrop._accel import HAVE_NUMBA
from hkdrop.geometry import CapSpec, cap_profile, profile_report
from hkdrop.heintze_karcher import _Curve
from hkdrop.torsion.mesh import mesh_meridian


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def max_abs_diff(a, b):
    if isinstance(a, tuple):
        return max(max_abs_diff(x, y) for x, y in zip(a, b))
    return float(np.max(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        print("numba unavailable or disabled; nothing to compare")
        return

    cap = CapSpec(1.0, 2.0 * math.pi / 3.0)
    p = cap_profile(cap, 4000)
    nodes = mesh_meridian(p, h=0.01).element_nodes()
    curve = _Curve(p)
    rng = np.random.default_rng(0)
    y = np.stack([0.8 * rng.random(20000), 0.5 * rng.random(20000)], axis=-1)
    _, idx = curve.tree.query(y, k=8)
    seg = np.sort(np.where(idx < curve.nseg, idx, -1), axis=1)

    cases = [
        ("max_pair_distance (4000 pts)", kernels.max_pair_distance_np,
         kernels.max_pair_distance_nb, (p.rho, p.z)),
        (f"p2_element_arrays ({nodes.shape[0]} elems)", kernels.p2_element_arrays_np,
         kernels.p2_element_arrays_nb, (nodes,)),
        ("hermite_nearest (20000 queries)", kernels.hermite_nearest_np,
         kernels.hermite_nearest_nb, (y, seg, curve.P, curve.T, curve.ds)),
    ]
    print(f"{'kernel':<36} {'numpy [s]':>10} {'numba [s]':>10} {'speedup':>8} {'max diff':>10}")
    for name, f_np, f_nb, a in cases:
        t_np = best_of(lambda: f_np(*a), args.repeat)
        t_nb = best_of(lambda: f_nb(*a), args.repeat)
        diff = max_abs_diff(f_np(*a), f_nb(*a))
        print(f"{name:<36} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.1f} {diff:10.2e}")


if __name__ == "__main__":
    main()
