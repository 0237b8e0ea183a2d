#!/usr/bin/env python3
"""Cost of the flux kernels, from two angles.

First a microbenchmark of single two-point flux calls in their different
evaluation forms: per-axis Cartesian, directional against a metric vector,
and the rotated frame with the frame either precomputed or rebuilt per
call. Then the integrated view: wall time per right-hand side per degree
of freedom for the scalar reference kernels against the lane-batched ones.

Absolute numbers are machine-specific; the orderings are the point.
"""

from fluxdg.harness import make_config, measure_pid, microbench_flux

print("single flux call, d = 3 (nanoseconds)")
print("  kind      cartesian  directional  rotated_pre  rotated_otf")
for kind in ("shima", "ranocha"):
    cells = []
    for form in ("cartesian", "directional", "rotated_pre", "rotated_otf"):
        ns, _, _ = microbench_flux(kind, form, 3, n_samples=8000, repeats=3)
        cells.append(f"{ns:9.0f}")
    print(f"  {kind:8s}  {cells[0]}  {cells[1]:>11s}  {cells[2]:>11s}  {cells[3]:>11s}")

print("\ntime per RHS per DOF, vortex, d = 3, p = 3 (seconds)")
base = {"d": "3", "elements": "2", "n_steps": "1"}
for kernel in ("reference", "batched"):
    config = make_config(None, dict(base, kernel=kernel))
    result = measure_pid(config, n_rhs=30, repeats=3)
    print(
        f"  {kernel:9s}  {result.mean_pid:.3e}  "
        f"(+/- {result.std_pid:.1e}, {result.n_rhs} evaluations, "
        f"{result.dofs} DOFs)"
    )
