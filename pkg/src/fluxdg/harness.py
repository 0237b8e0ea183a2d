"""Run configuration, initial conditions, diagnostics and timing loops.

The solver modules know nothing about files, seeds or wall clocks. This
module owns that layer: parsing flat key=value config files, seeding
fields, driving time loops, measuring per-DOF runtimes and writing CSV.
"""

import csv
import math
import os
import time
from dataclasses import dataclass, fields, replace

import numpy as np

from .discretization import (
    RhsConfig,
    build_setup,
    conserved_totals,
    entropy_rate,
    error_norm_l2,
    rhs,
)
from .errors import BenchmarkError, ConfigurationError
from .euler import GasParams, prim2cons
from .fluxes import flux_function, rotated_flux, rotation_frame
from .geometry import build_mesh
from .operators import make_operator
from .timeint import StepController, integrate, rk_step, stable_dt

DOMAIN_LO = -5.0
DOMAIN_HI = 5.0
DOMAIN_LENGTH = DOMAIN_HI - DOMAIN_LO

IC_NAMES = ("isentropic_vortex", "sinusoidal", "random", "free_stream")
MESH_KINDS = ("cartesian", "curved")
FREE_STREAM_VELOCITY = (0.1, -0.2, 0.3)


# ---------------------------------------------------------------------------
# configuration

@dataclass(frozen=True)
class RunConfig:
    """One experiment: mesh, operator, scheme, initial data and time loop.

    Mirrors the flat key=value config format one to one; every field name
    is a valid config key and a valid override.
    """

    d: int = 2
    p: int = 3
    elements: int = 8
    mesh: str = "cartesian"
    amplitude: float = 0.1
    geo_degree: int | None = None
    family: str = "lgl"
    volume_scheme: str = "fluxdiff"
    volume_flux: str = "ranocha"
    surface_flux: str = "ranocha"
    precompute: str = "none"
    kernel: str = "reference"
    overint_degree: int | None = None
    ic: str = "isentropic_vortex"
    epsilon: float = 20.0
    seed: int = 0
    gamma: float = 1.4
    cfl: float = 0.5
    n_steps: int | None = 90
    t_end: float | None = None
    output: str | None = None

    def validate(self):
        if self.d not in (2, 3):
            raise ConfigurationError("d: expected 2 or 3, got %r" % (self.d,))
        if not 1 <= self.p <= 15:
            raise ConfigurationError("p: expected 1..15, got %r" % (self.p,))
        if self.elements < 1:
            raise ConfigurationError(
                "elements: expected a positive count, got %r" % (self.elements,)
            )
        if self.mesh not in MESH_KINDS:
            raise ConfigurationError(
                "mesh: expected one of %s, got %r" % (", ".join(MESH_KINDS), self.mesh)
            )
        if self.mesh == "curved" and not self.amplitude > 0.0:
            raise ConfigurationError(
                "amplitude: curved mesh needs a positive amplitude, got %r"
                % (self.amplitude,)
            )
        if self.ic not in IC_NAMES:
            raise ConfigurationError(
                "ic: expected one of %s, got %r" % (", ".join(IC_NAMES), self.ic)
            )
        if not self.gamma > 1.0:
            raise ConfigurationError("gamma: expected > 1, got %r" % (self.gamma,))
        if not self.cfl > 0.0:
            raise ConfigurationError("cfl: expected > 0, got %r" % (self.cfl,))
        if (self.n_steps is None) == (self.t_end is None):
            raise ConfigurationError(
                "n_steps/t_end: exactly one of the two must be set"
            )
        return self

    def rhs_config(self):
        return RhsConfig(
            volume_scheme=self.volume_scheme,
            volume_flux=self.volume_flux,
            surface_flux=self.surface_flux,
            precompute=self.precompute,
            overint_degree=self.overint_degree,
            kernel=self.kernel,
        )


_CONFIG_FIELDS = {f.name: f for f in fields(RunConfig)}
_INT_KEYS = {"d", "p", "elements", "geo_degree", "overint_degree", "seed", "n_steps"}
_FLOAT_KEYS = {"amplitude", "epsilon", "gamma", "cfl", "t_end"}
_OPTIONAL_KEYS = {"geo_degree", "overint_degree", "n_steps", "t_end", "output"}


def _coerce(key, raw):
    if key not in _CONFIG_FIELDS:
        raise ConfigurationError(
            "unknown config key %r (valid: %s)"
            % (key, ", ".join(sorted(_CONFIG_FIELDS)))
        )
    if isinstance(raw, str):
        raw = raw.strip()
        if key in _OPTIONAL_KEYS and raw.lower() in ("", "none", "auto"):
            return None
        try:
            if key in _INT_KEYS:
                return int(raw)
            if key in _FLOAT_KEYS:
                return float(raw)
        except ValueError:
            kind = "an integer" if key in _INT_KEYS else "a number"
            raise ConfigurationError(
                "%s: cannot parse %r as %s" % (key, raw, kind)
            ) from None
    return raw


def parse_config_file(path):
    """Flat `key = value` lines; '#' starts a comment, blank lines ignored."""
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as err:
        raise ConfigurationError("config: cannot read %r (%s)" % (path, err)) from err
    mapping = {}
    for lineno, line in enumerate(lines, start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigurationError(
                "config: line %d of %r is not `key = value`: %r"
                % (lineno, path, body)
            )
        key, value = body.split("=", 1)
        mapping[key.strip()] = value.strip()
    return mapping


def make_config(mapping=None, overrides=None):
    """Build a validated RunConfig from raw string mappings; overrides win."""
    merged = {}
    for source in (mapping, overrides):
        for key, value in (source or {}).items():
            merged[key] = _coerce(key, value)
    return RunConfig(**merged).validate()


def load_config(path=None, overrides=None):
    mapping = parse_config_file(path) if path else {}
    return make_config(mapping, overrides)


# ---------------------------------------------------------------------------
# initial conditions

def _wrap_periodic(x):
    return (x - DOMAIN_LO) % DOMAIN_LENGTH + DOMAIN_LO


def vortex_primitives(x, t=0.0, epsilon=20.0, gamma=1.4):
    """Isentropic vortex carried by the background velocity (1, 1[, 0]).

    T0 = p0/rho0 = 10; the profile is a temperature deficit around the
    (periodically wrapped) advected center, exact for all times.
    """
    d = x.shape[-1]
    t0 = 10.0
    v0 = (1.0, 1.0, 0.0)[:d]
    xr = _wrap_periodic(x - t * np.asarray(v0))
    r2 = xr[..., 0] ** 2 + xr[..., 1] ** 2
    deficit = (gamma - 1.0) * epsilon**2 / (8.0 * gamma * math.pi**2)
    temp = t0 - deficit * np.exp(1.0 - r2)
    rho = (temp / t0) ** (1.0 / (gamma - 1.0))
    swirl = epsilon / (2.0 * math.pi) * np.exp(0.5 * (1.0 - r2))
    prim = np.zeros(x.shape[:-1] + (d + 2,))
    prim[..., 0] = rho
    prim[..., 1] = v0[0] - swirl * xr[..., 1]
    prim[..., 2] = v0[1] + swirl * xr[..., 0]
    prim[..., d + 1] = rho * temp
    return prim


def sinusoidal_primitives(x, gamma=1.4):
    """rho = 2 + prod_i sin(pi x_i / 5), p = rho^gamma, fluid at rest."""
    d = x.shape[-1]
    rho = 2.0 + np.prod(np.sin(math.pi * x / 5.0), axis=-1)
    prim = np.zeros(x.shape[:-1] + (d + 2,))
    prim[..., 0] = rho
    prim[..., d + 1] = rho**gamma
    return prim


def free_stream_primitives(x):
    d = x.shape[-1]
    prim = np.empty(x.shape[:-1] + (d + 2,))
    prim[..., 0] = 1.0
    for i in range(d):
        prim[..., 1 + i] = FREE_STREAM_VELOCITY[i]
    prim[..., d + 1] = 1.0
    return prim


def random_primitives(x, seed):
    """Reproducible uniform field: rho, p in [1, 2], velocities in [-1, 1]."""
    d = x.shape[-1]
    rng = np.random.default_rng(seed)
    prim = np.empty(x.shape[:-1] + (d + 2,))
    prim[..., 0] = 1.0 + rng.random(x.shape[:-1])
    for i in range(d):
        prim[..., 1 + i] = 2.0 * rng.random(x.shape[:-1]) - 1.0
    prim[..., d + 1] = 1.0 + rng.random(x.shape[:-1])
    return prim


def _auto_geo_degree(config):
    """Shared-grid mapping degree for curved Gauss runs.

    Gauss face metrics are extrapolated, so the mapping must keep the
    metric fields inside the solution space: degree <= p in 2D, 2x degree
    <= p in 3D (the curl form squares the mapping degree). Lobatto runs
    stay isoparametric; their face values are collocated and shared.
    """
    if config.mesh != "curved" or config.family != "gauss":
        return None
    if config.d == 2:
        return min(2, config.p)
    return max(1, config.p // 2)


@dataclass(frozen=True)
class Run:
    """A resolved configuration: operators built, initial state sampled."""

    config: RunConfig
    gas: GasParams
    mesh: object
    setup: object
    scheme: RhsConfig
    u0: np.ndarray
    exact: object  # exact(t) -> field, or None


def build_run(config):
    config.validate()
    gas = GasParams(config.gamma)
    amplitude = config.amplitude if config.mesh == "curved" else 0.0
    geo = config.geo_degree if config.geo_degree is not None else _auto_geo_degree(config)
    mesh = build_mesh(
        (config.elements,) * config.d,
        bounds=(DOMAIN_LO, DOMAIN_HI),
        amplitude=amplitude,
        geo_degree=geo,
    )
    op = make_operator(config.p, config.family)
    setup = build_setup(mesh, op, gas, overint_degree=config.overint_degree)
    scheme = config.rhs_config()
    scheme.validate(setup)
    x = setup.coords
    exact = None
    if config.ic == "isentropic_vortex":
        def exact(t, _x=x, eps=config.epsilon, g=config.gamma):
            return prim2cons(vortex_primitives(_x, t, eps, g), gas)

        u0 = exact(0.0)
    elif config.ic == "sinusoidal":
        u0 = prim2cons(sinusoidal_primitives(x, config.gamma), gas)
    elif config.ic == "random":
        u0 = prim2cons(random_primitives(x, config.seed), gas)
    else:
        def exact(t, _x=x):
            return prim2cons(free_stream_primitives(_x), gas)

        u0 = exact(0.0)
    return Run(config, gas, mesh, setup, scheme, u0, exact)


# ---------------------------------------------------------------------------
# simulations and diagnostics

@dataclass(frozen=True)
class RunResult:
    fields: np.ndarray
    steps: int
    t: float
    rhs_evals: int
    totals_initial: np.ndarray
    totals_final: np.ndarray
    conservation_drift: float
    error_l2: np.ndarray | None


def run_simulation(config_or_run):
    """Integrate the configured problem and gather standard diagnostics."""
    run = config_or_run if isinstance(config_or_run, Run) else build_run(config_or_run)
    config = run.config
    setup = run.setup
    controller = StepController(cfl=config.cfl)

    def rhs_fn(u, t):
        return rhs(u, setup, run.scheme)

    def dt_fn(u, t):
        return stable_dt(u, run.mesh, setup.metrics, run.gas, config.p, controller)

    totals0 = conserved_totals(run.u0, setup)
    u, info = integrate(
        run.u0,
        rhs_fn,
        n_steps=config.n_steps,
        t_end=config.t_end,
        dt_fn=dt_fn,
    )
    totals1 = conserved_totals(u, setup)
    scale = np.abs(totals0) + np.abs(totals1)
    drift = float(np.max(np.abs(totals1 - totals0) / np.where(scale > 0, scale, 1.0)))
    err = None
    if run.exact is not None:
        err = error_norm_l2(u, run.exact(info["t"]), setup)
    return RunResult(
        u, info["steps"], info["t"], info["rhs_evals"], totals0, totals1, drift, err
    )


def monitor_entropy_conservation(config_or_run, n_samples=20):
    """Fixed-step run sampling the normalized entropy production rate.

    Returns (rows, worst): rows are (step, t, dt, dS/dt normalized) at
    n_samples states spread along the run, worst is max |normalized|.
    """
    run = config_or_run if isinstance(config_or_run, Run) else build_run(config_or_run)
    config = run.config
    if config.n_steps is None:
        raise ConfigurationError("n_steps: entropy monitoring uses fixed-step runs")
    setup = run.setup
    controller = StepController(cfl=config.cfl)
    dt = stable_dt(run.u0, run.mesh, setup.metrics, run.gas, config.p, controller)
    stride = max(1, config.n_steps // n_samples)
    rows = []
    u = run.u0
    t = 0.0

    def rhs_fn(v, tt):
        return rhs(v, setup, run.scheme)

    for step in range(config.n_steps):
        if step % stride == 0 and len(rows) < n_samples:
            dudt = rhs_fn(u, t)
            _, normalized = entropy_rate(u, dudt, setup)
            rows.append((step, t, dt, normalized))
        u = rk_step(u, t, dt, rhs_fn)
        t += dt
    worst = max(abs(r[3]) for r in rows)
    return rows, worst


def convergence_study(config, levels=(4, 8, 16)):
    """L2 errors and observed orders across a mesh refinement sequence.

    Each level runs the configured problem for one advection period (or
    config.t_end if set) and measures the M-weighted L2 error of density
    and total energy against the exact solution. Rows follow the CSV
    schema: (level, h, l2_rho, l2_rhoE, order_rho, order_rhoE); orders are
    None on the coarsest level.
    """
    config.validate()
    if config.ic not in ("isentropic_vortex", "free_stream"):
        raise ConfigurationError(
            "ic: convergence study needs an exact solution "
            "(isentropic_vortex or free_stream), got %r" % (config.ic,)
        )
    t_end = config.t_end if config.t_end is not None else DOMAIN_LENGTH
    rows = []
    prev = None
    for n in levels:
        level_cfg = replace(config, elements=int(n), n_steps=None, t_end=t_end)
        result = run_simulation(level_cfg)
        h = DOMAIN_LENGTH / n
        e_rho = float(result.error_l2[0])
        e_rhoe = float(result.error_l2[-1])
        if prev is None:
            order_rho = order_rhoe = None
        else:
            # exactly preserved solutions (free stream) have no rate
            order_rho = math.log2(prev[0] / e_rho) if e_rho > 0.0 else None
            order_rhoe = math.log2(prev[1] / e_rhoe) if e_rhoe > 0.0 else None
        rows.append((int(n), h, e_rho, e_rhoe, order_rho, order_rhoe))
        prev = (e_rho, e_rhoe)
    return rows


# ---------------------------------------------------------------------------
# timing

def _guard_span(span, what, advice):
    info = time.get_clock_info("perf_counter")
    if span < 1000.0 * info.resolution:
        raise BenchmarkError(
            "%s spanned %.3g s, under 1000 ticks of the %.3g s clock; %s"
            % (what, span, info.resolution, advice)
        )


@dataclass(frozen=True)
class PidResult:
    """Wall-clock seconds per RHS evaluation per degree of freedom.

    Every volume node counts as one DOF: dofs = (p+1)^d * elements,
    independent of the scheme or the number of conserved variables.
    """

    mean_pid: float
    std_pid: float
    n_rhs: int
    dofs: int


def measure_pid(config_or_run, n_rhs=500, repeats=5):
    """Time complete fixed-step simulations and report per-DOF RHS cost.

    One untimed RHS evaluation warms caches before the first repeat. Each
    repeat restarts from the initial state and advances ceil(n_rhs/5)
    steps (5 evaluations per step), timed as a whole. Runs are
    single-threaded; keep the machine quiet for small std.
    """
    run = config_or_run if isinstance(config_or_run, Run) else build_run(config_or_run)
    config = run.config
    setup = run.setup
    controller = StepController(cfl=config.cfl)
    n_steps = -(-n_rhs // 5)
    dt = stable_dt(run.u0, run.mesh, setup.metrics, run.gas, config.p, controller)
    dofs = setup.dofs

    def rhs_fn(v, tt):
        return rhs(v, setup, run.scheme)

    rhs_fn(run.u0, 0.0)  # warmup
    samples = []
    for _ in range(repeats):
        u = run.u0
        t = 0.0
        start = time.perf_counter()
        for _step in range(n_steps):
            u = rk_step(u, t, dt, rhs_fn)
            t += dt
        span = time.perf_counter() - start
        _guard_span(span, "pid repeat", "increase n_rhs")
        samples.append(span / (5 * n_steps * dofs))
    samples = np.asarray(samples)
    return PidResult(float(samples.mean()), float(samples.std()), 5 * n_steps, dofs)


MICROBENCH_FORMS = ("cartesian", "directional", "rotated_otf", "rotated_pre")


def _microbench_inputs(d, n_samples, seed=2024):
    rng = np.random.default_rng(seed)
    nvar = d + 2
    states = np.empty((2, n_samples, nvar))
    states[..., 0] = 1.0 + rng.random((2, n_samples))
    states[..., 1 : d + 1] = rng.random((2, n_samples, d)) - 0.5
    states[..., d + 1] = 1.0 + rng.random((2, n_samples))
    from .euler import prim2cons as _p2c

    cons = _p2c(states, GasParams(1.4))
    normals = rng.random((n_samples, d)) + 0.25
    return cons[0].tolist(), cons[1].tolist(), [tuple(row) for row in normals.tolist()]


def _gate_form(kind, form, left, right, normals, gas, tol=1e-13):
    """Every benchmarked variant must reproduce the directional reference
    on its own inputs before any timing is reported."""
    dirn = flux_function(kind, "directional")
    d = len(normals[0])
    axis = (1.0,) + (0.0,) * (d - 1)
    n_check = min(len(left), 64)
    for i in range(n_check):
        ul, ur = left[i], right[i]
        if form == "cartesian":
            got = flux_function(kind, "cartesian")(ul, ur, 0, gas)
            want = dirn(ul, ur, axis, gas)
        elif form == "directional":
            got = dirn(ul, ur, normals[i], gas)
            want = got
        elif form == "rotated_otf":
            got = rotated_flux(kind, ul, ur, normals[i], gas)
            want = dirn(ul, ur, normals[i], gas)
        else:
            frame = rotation_frame(normals[i])
            got = rotated_flux(kind, ul, ur, normals[i], gas, frame)
            want = dirn(ul, ur, normals[i], gas)
        err = max(abs(a - b) for a, b in zip(got, want))
        scale = max(max(abs(a) for a in want), 1.0)
        if err > tol * scale:
            raise BenchmarkError(
                "correctness gate failed for %s/%s at sample %d: |diff| %.3e"
                % (kind, form, i, err)
            )


def microbench_flux(kind, form, d, n_samples=20000, repeats=5, gas=None):
    """Nanoseconds per two-point flux evaluation for one kernel form.

    States and geometry are pre-generated outside the timed loop; the form
    is correctness-gated against the directional reference first. Returns
    (ns_mean, ns_std, n_samples).
    """
    if form not in MICROBENCH_FORMS:
        raise ConfigurationError(
            "form: expected one of %s, got %r" % (", ".join(MICROBENCH_FORMS), form)
        )
    if gas is None:
        gas = GasParams(1.4)
    left, right, normals = _microbench_inputs(d, n_samples)
    _gate_form(kind, form, left, right, normals, gas)
    pairs = list(zip(left, right))
    if form == "cartesian":
        fn = flux_function(kind, "cartesian")

        def timed():
            start = time.perf_counter()
            for ul, ur in pairs:
                fn(ul, ur, 0, gas)
            return time.perf_counter() - start

    elif form == "directional":
        fn = flux_function(kind, "directional")
        args = list(zip(left, right, normals))

        def timed():
            start = time.perf_counter()
            for ul, ur, nrm in args:
                fn(ul, ur, nrm, gas)
            return time.perf_counter() - start

    elif form == "rotated_otf":
        args = list(zip(left, right, normals))

        def timed():
            start = time.perf_counter()
            for ul, ur, nrm in args:
                rotated_flux(kind, ul, ur, nrm, gas)
            return time.perf_counter() - start

    else:
        frames = [rotation_frame(nrm) for nrm in normals]
        args = list(zip(left, right, normals, frames))

        def timed():
            start = time.perf_counter()
            for ul, ur, nrm, frame in args:
                rotated_flux(kind, ul, ur, nrm, gas, frame)
            return time.perf_counter() - start

    timed()  # warmup
    spans = []
    for _ in range(repeats):
        span = timed()
        _guard_span(span, "microbench repeat", "increase n_samples")
        spans.append(span / n_samples * 1e9)
    spans = np.asarray(spans)
    return float(spans.mean()), float(spans.std()), n_samples


# ---------------------------------------------------------------------------
# CSV reporting

PID_HEADER = ("d", "p", "mesh", "scheme", "flux", "n_rhs", "dofs", "pid_mean", "pid_std")
MICROBENCH_HEADER = ("flux", "form", "d", "ns_mean", "ns_std", "n_samples")
CONVERGENCE_HEADER = ("level", "h", "l2_rho", "l2_rhoe", "order_rho", "order_rhoe")
ENTROPY_HEADER = ("step", "t", "dt", "dSdt_normalized")


def output_path(name, config_output=None):
    """Resolve a report path: explicit config output wins over the default
    name; relative paths land in $FLUXDG_OUTPUT_DIR when set."""
    target = config_output or name
    if not os.path.isabs(target):
        base = os.environ.get("FLUXDG_OUTPUT_DIR")
        if base:
            target = os.path.join(base, target)
    parent = os.path.dirname(target)
    if parent:
        os.makedirs(parent, exist_ok=True)
    return target


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else v for v in row])
    return path


def pid_row(config, result):
    mesh = "%s:%d" % (config.mesh, config.elements)
    scheme = config.volume_scheme
    if config.kernel != "reference":
        scheme = "%s:%s" % (scheme, config.kernel)
    return (
        config.d,
        config.p,
        mesh,
        scheme,
        config.volume_flux,
        result.n_rhs,
        result.dofs,
        result.mean_pid,
        result.std_pid,
    )
