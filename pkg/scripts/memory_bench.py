"""Peak live-state bytes and wall time of both solvers on the nested scene for several bounce limits.

Densities are paired: 10 strata x 4 samples for MC against 20 rays per
wavelength for the deterministic solver.
"""

import argparse
import json
import time
from pathlib import Path

from mcsbr import DetConfig, Illumination, McConfig, builtin_scene, estimate, solve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--bounces", type=int, nargs="+", default=[3, 5, 7, 9])
    ap.add_argument("--out", default="out/memory_bench.json")
    args = ap.parse_args()
    scene = builtin_scene("nested")
    ill = Illumination.monostatic(0.0, 0.0)
    rows = []
    for mb in args.bounces:
        for name, run in (
            ("mc", lambda: estimate(scene, ill, [3e9], McConfig(strata_per_wavelength=10, samples_per_stratum=4,
                                                                max_bounce=mb, seed=1))),
            ("deterministic", lambda: solve(scene, ill, [3e9], DetConfig(rays_per_wavelength=20, max_bounce=mb,
                                                                         force_stack_accounting=True))),
        ):
            t = time.perf_counter()
            _, stats, _ = run()
            row = {"solver": name, "max_bounce": mb, "peak_state_bytes": stats.peak_state_bytes,
                   "rays_traced": sum(stats.rays_per_bounce), "wall_time_s": time.perf_counter() - t}
            rows.append(row)
            print(row)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(json.dumps(rows, indent=2) + "\n")


if __name__ == "__main__":
    main()
