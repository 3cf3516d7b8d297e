#!/usr/bin/env python3
"""Throughput comparison of the path-kernel backends.

Rolls identical sample batches through the compiled core and the numpy
fallback and reports block-steps per second, plus a checksum so a silent
divergence between the two shows up immediately.

    python3 scripts/benchmark_backends.py --samples 4000 --steps 50
"""

import argparse
import time

import numpy as np

from spinctrl import backends
from spinctrl.feynman_kac import gl_nodes, run_sample_paths
from spinctrl.rng import NS_AUX, SeedPolicy, signed_batch
from spinctrl.scenarios import preset


def bench_case(name, spec, samples, steps, tau, repeats):
    params = spec.model_params()
    dim = 3 * spec.n_spins
    policy = SeedPolicy(99)
    xi = signed_batch(policy.walk_pairs((NS_AUX, 0), samples // 2, steps, dim, tau))
    target = spec.target_profile().grid_values(np.linspace(0.0, steps * tau, steps + 1))
    gl_x, gl_w = gl_nodes(2)

    results = {}
    for backend_name in backends.available_backends():
        backends.get_backend(backend_name)
        best = float("inf")
        for _ in range(repeats):
            t0 = time.perf_counter()
            finals, integrals = run_sample_paths(
                params, spec.initial_config(), xi, tau, target, gl_x, gl_w)
            best = min(best, time.perf_counter() - t0)
        block_steps = samples * steps * spec.n_spins
        results[backend_name] = (block_steps / best, float(finals.sum()),
                                 float(integrals.sum()))

    print(f"\n{name}: {samples} paths x {steps} steps x {spec.n_spins} spins")
    base = None
    for backend_name, (rate, fsum, isum) in sorted(results.items()):
        line = f"  {backend_name:<8} {rate / 1e6:8.2f} M block-steps/s"
        if base is None:
            base = rate
        else:
            line += f"  ({rate / base:.1f}x the first row)"
        print(line + f"   checksum {fsum:+.12e}")
    checksums = {round(f, 6) for _, f, _ in results.values()}
    if len(checksums) > 1:
        raise SystemExit("backends disagree beyond rounding; investigate before trusting timings")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=4000, help="paths per batch (even)")
    ap.add_argument("--steps", type=int, default=50)
    ap.add_argument("--tau", type=float, default=0.01)
    ap.add_argument("--repeats", type=int, default=3, help="timing repeats, best counts")
    args = ap.parse_args()

    print(f"available backends: {', '.join(backends.available_backends())}")
    bench_case("single spin (test1)", preset("test1"), args.samples, args.steps,
               args.tau, args.repeats)
    bench_case("coupled ring (spin3)", preset("spin3"), args.samples, args.steps,
               args.tau, args.repeats)
    bench_case("large ring (spin10)", preset("spin10"), max(args.samples // 4, 2),
               args.steps, args.tau, args.repeats)
    backends.get_backend("auto")


if __name__ == "__main__":
    main()
