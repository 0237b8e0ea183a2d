"""Two-point numerical fluxes for the Euler equations (scalar kernels).

These are the reference kernels: one state pair per call, plain float
arithmetic, tuples in and out. States are indexable sequences
(rho, rho v_1..d, rho e); inside hot loops the discretization passes plain
lists so everything below runs on Python floats. The batched module carries
the lane-parallel array versions.

Flux forms:

* cartesian   - flux along a coordinate axis j (0-based)
* directional - flux contracted with an arbitrary (scaled) direction vector;
                linear in the direction, antisymmetric under
                (u_l, u_r, n) -> (u_r, u_l, -n)
* rotated     - rotate states into a face-aligned frame, evaluate the
                cartesian flux, rotate back, scale by |n|

Volume fluxes (shima, ranocha, central) are symmetric in their arguments;
llf and hll are surface-only.
"""

import math
import threading
from contextlib import contextmanager

from . import debug
from .errors import AdmissibilityError, ConfigurationError
from .means import SERIES_EPSILON

VOLUME_KINDS = ("shima", "ranocha", "central")
SURFACE_KINDS = ("shima", "ranocha", "central", "llf", "hll")


# ---------------------------------------------------------------------------
# evaluation counters

class FluxCounter:
    """Monotone counters for flux work inside a count_guard scope."""

    __slots__ = ("two_point_evals", "one_point_evals", "logmean_evals")

    def __init__(self):
        self.two_point_evals = 0
        self.one_point_evals = 0
        self.logmean_evals = 0

    def reset(self):
        self.two_point_evals = 0
        self.one_point_evals = 0
        self.logmean_evals = 0

    def __repr__(self):
        return "FluxCounter(two_point=%d, one_point=%d, logmean=%d)" % (
            self.two_point_evals,
            self.one_point_evals,
            self.logmean_evals,
        )


_local = threading.local()


def _stack():
    stack = getattr(_local, "stack", None)
    if stack is None:
        stack = []
        _local.stack = stack
    return stack


@contextmanager
def count_guard(counter):
    """Activate `counter` for flux evaluations on this thread. Guards nest;
    every active counter sees every evaluation, so nested scopes sum."""
    stack = _stack()
    stack.append(counter)
    try:
        yield counter
    finally:
        stack.remove(counter)


def add_two_point(n=1):
    stack = getattr(_local, "stack", None)
    if stack:
        for c in stack:
            c.two_point_evals += n


def add_one_point(n=1):
    stack = getattr(_local, "stack", None)
    if stack:
        for c in stack:
            c.one_point_evals += n


def add_logmean(n=1):
    stack = getattr(_local, "stack", None)
    if stack:
        for c in stack:
            c.logmean_evals += n


# ---------------------------------------------------------------------------
# scalar helpers (floats in, floats out)

def _prim2(u, gm1):
    rho = u[0]
    v1 = u[1] / rho
    v2 = u[2] / rho
    p = gm1 * (u[3] - 0.5 * rho * (v1 * v1 + v2 * v2))
    return rho, v1, v2, p


def _prim3(u, gm1):
    rho = u[0]
    v1 = u[1] / rho
    v2 = u[2] / rho
    v3 = u[3] / rho
    p = gm1 * (u[4] - 0.5 * rho * (v1 * v1 + v2 * v2 + v3 * v3))
    return rho, v1, v2, v3, p


def _check_pair(rho_l, p_l, rho_r, p_r):
    if rho_l <= 0.0 or p_l <= 0.0 or rho_r <= 0.0 or p_r <= 0.0:
        raise AdmissibilityError(
            "inadmissible flux input: rho=(%r, %r), p=(%r, %r)"
            % (rho_l, rho_r, p_l, p_r)
        )


def _logmean(a, b):
    u = (a * (a - 2.0 * b) + b * b) / (a * (a + 2.0 * b) + b * b)
    if u < SERIES_EPSILON:
        return (a + b) / (2.0 + u * (2.0 / 3.0 + u * (2.0 / 5.0 + u * (2.0 / 7.0))))
    return (b - a) / math.log(b / a)


def _inv_logmean(a, b):
    u = (a * (a - 2.0 * b) + b * b) / (a * (a + 2.0 * b) + b * b)
    if u < SERIES_EPSILON:
        return (2.0 + u * (2.0 / 3.0 + u * (2.0 / 5.0 + u * (2.0 / 7.0)))) / (a + b)
    return math.log(b / a) / (b - a)


def _logmean_from_logs(a, b, log_a, log_b):
    u = (a * (a - 2.0 * b) + b * b) / (a * (a + 2.0 * b) + b * b)
    if u < SERIES_EPSILON:
        return (a + b) / (2.0 + u * (2.0 / 3.0 + u * (2.0 / 5.0 + u * (2.0 / 7.0))))
    return (b - a) / (log_b - log_a)


def _inv_logmean_from_logs(a, b, log_a, log_b):
    u = (a * (a - 2.0 * b) + b * b) / (a * (a + 2.0 * b) + b * b)
    if u < SERIES_EPSILON:
        return (2.0 + u * (2.0 / 3.0 + u * (2.0 / 5.0 + u * (2.0 / 7.0)))) / (a + b)
    return (log_b - log_a) / (b - a)


# ---------------------------------------------------------------------------
# kinetic-energy and pressure-equilibrium preserving flux

def _shima_core(rho_l, p_l, rho_r, p_r, v_l, v_r, vn_l, vn_r, normal, igm1):
    add_two_point()
    if debug.enabled:
        _check_pair(rho_l, p_l, rho_r, p_r)
    rho_avg = 0.5 * (rho_l + rho_r)
    p_avg = 0.5 * (p_l + p_r)
    vn_avg = 0.5 * (vn_l + vn_r)
    f_rho = rho_avg * vn_avg
    vv = 0.0
    for a, b in zip(v_l, v_r):
        vv += a * b
    f_e = 0.5 * f_rho * vv + p_avg * vn_avg * igm1 + 0.5 * (p_l * vn_r + p_r * vn_l)
    mom = tuple(
        f_rho * 0.5 * (a + b) + p_avg * n for a, b, n in zip(v_l, v_r, normal)
    )
    return (f_rho,) + mom + (f_e,)


def flux_shima_cartesian(u_l, u_r, j, gas):
    gm1 = gas.gamma - 1.0
    if len(u_l) == 4:
        rho_l, vl1, vl2, p_l = _prim2(u_l, gm1)
        rho_r, vr1, vr2, p_r = _prim2(u_r, gm1)
        v_l = (vl1, vl2)
        v_r = (vr1, vr2)
        normal = _AXIS2[j]
    else:
        rho_l, vl1, vl2, vl3, p_l = _prim3(u_l, gm1)
        rho_r, vr1, vr2, vr3, p_r = _prim3(u_r, gm1)
        v_l = (vl1, vl2, vl3)
        v_r = (vr1, vr2, vr3)
        normal = _AXIS3[j]
    return _shima_core(
        rho_l, p_l, rho_r, p_r, v_l, v_r, v_l[j], v_r[j], normal, gas.inv_gamma_minus_one
    )


def flux_shima_directional(u_l, u_r, normal, gas):
    gm1 = gas.gamma - 1.0
    if len(u_l) == 4:
        rho_l, vl1, vl2, p_l = _prim2(u_l, gm1)
        rho_r, vr1, vr2, p_r = _prim2(u_r, gm1)
        v_l = (vl1, vl2)
        v_r = (vr1, vr2)
        vn_l = vl1 * normal[0] + vl2 * normal[1]
        vn_r = vr1 * normal[0] + vr2 * normal[1]
    else:
        rho_l, vl1, vl2, vl3, p_l = _prim3(u_l, gm1)
        rho_r, vr1, vr2, vr3, p_r = _prim3(u_r, gm1)
        v_l = (vl1, vl2, vl3)
        v_r = (vr1, vr2, vr3)
        vn_l = vl1 * normal[0] + vl2 * normal[1] + vl3 * normal[2]
        vn_r = vr1 * normal[0] + vr2 * normal[1] + vr3 * normal[2]
    return _shima_core(
        rho_l, p_l, rho_r, p_r, v_l, v_r, vn_l, vn_r, normal, gas.inv_gamma_minus_one
    )


# ---------------------------------------------------------------------------
# entropy-conservative flux

def _ranocha_core(rho_l, p_l, rho_r, p_r, v_l, v_r, vn_l, vn_r, normal, igm1,
                  rho_mean, inv_rho_p_mean):
    add_two_point()
    if debug.enabled:
        _check_pair(rho_l, p_l, rho_r, p_r)
    p_avg = 0.5 * (p_l + p_r)
    vn_avg = 0.5 * (vn_l + vn_r)
    f_rho = rho_mean * vn_avg
    vv = 0.0
    for a, b in zip(v_l, v_r):
        vv += a * b
    f_e = f_rho * (0.5 * vv + igm1 * inv_rho_p_mean) + 0.5 * (p_l * vn_r + p_r * vn_l)
    mom = tuple(
        f_rho * 0.5 * (a + b) + p_avg * n for a, b, n in zip(v_l, v_r, normal)
    )
    return (f_rho,) + mom + (f_e,)


def flux_ranocha_cartesian(u_l, u_r, j, gas):
    gm1 = gas.gamma - 1.0
    if len(u_l) == 4:
        rho_l, vl1, vl2, p_l = _prim2(u_l, gm1)
        rho_r, vr1, vr2, p_r = _prim2(u_r, gm1)
        v_l = (vl1, vl2)
        v_r = (vr1, vr2)
        normal = _AXIS2[j]
    else:
        rho_l, vl1, vl2, vl3, p_l = _prim3(u_l, gm1)
        rho_r, vr1, vr2, vr3, p_r = _prim3(u_r, gm1)
        v_l = (vl1, vl2, vl3)
        v_r = (vr1, vr2, vr3)
        normal = _AXIS3[j]
    add_logmean(2)
    rho_mean = _logmean(rho_l, rho_r)
    inv_rho_p_mean = p_l * p_r * _inv_logmean(rho_l * p_r, rho_r * p_l)
    return _ranocha_core(
        rho_l, p_l, rho_r, p_r, v_l, v_r, v_l[j], v_r[j], normal,
        gas.inv_gamma_minus_one, rho_mean, inv_rho_p_mean,
    )


def flux_ranocha_directional(u_l, u_r, normal, gas):
    gm1 = gas.gamma - 1.0
    if len(u_l) == 4:
        rho_l, vl1, vl2, p_l = _prim2(u_l, gm1)
        rho_r, vr1, vr2, p_r = _prim2(u_r, gm1)
        v_l = (vl1, vl2)
        v_r = (vr1, vr2)
        vn_l = vl1 * normal[0] + vl2 * normal[1]
        vn_r = vr1 * normal[0] + vr2 * normal[1]
    else:
        rho_l, vl1, vl2, vl3, p_l = _prim3(u_l, gm1)
        rho_r, vr1, vr2, vr3, p_r = _prim3(u_r, gm1)
        v_l = (vl1, vl2, vl3)
        v_r = (vr1, vr2, vr3)
        vn_l = vl1 * normal[0] + vl2 * normal[1] + vl3 * normal[2]
        vn_r = vr1 * normal[0] + vr2 * normal[1] + vr3 * normal[2]
    add_logmean(2)
    rho_mean = _logmean(rho_l, rho_r)
    inv_rho_p_mean = p_l * p_r * _inv_logmean(rho_l * p_r, rho_r * p_l)
    return _ranocha_core(
        rho_l, p_l, rho_r, p_r, v_l, v_r, vn_l, vn_r, normal,
        gas.inv_gamma_minus_one, rho_mean, inv_rho_p_mean,
    )


# ---------------------------------------------------------------------------
# central flux and one-point physical flux helpers

def _phys_flux_n(u, rho, v, p, normal):
    """Physical flux contracted with a (scaled) direction; tuple out."""
    vn = 0.0
    for a, n in zip(v, normal):
        vn += a * n
    nv = len(u) - 1
    mom = tuple(u[1 + i] * vn + p * normal[i] for i in range(nv - 1))
    return (rho * vn,) + mom + ((u[nv] + p) * vn,)


def flux_central_directional(u_l, u_r, normal, gas):
    add_two_point()
    gm1 = gas.gamma - 1.0
    if len(u_l) == 4:
        rho_l, vl1, vl2, p_l = _prim2(u_l, gm1)
        rho_r, vr1, vr2, p_r = _prim2(u_r, gm1)
        v_l = (vl1, vl2)
        v_r = (vr1, vr2)
    else:
        rho_l, vl1, vl2, vl3, p_l = _prim3(u_l, gm1)
        rho_r, vr1, vr2, vr3, p_r = _prim3(u_r, gm1)
        v_l = (vl1, vl2, vl3)
        v_r = (vr1, vr2, vr3)
    if debug.enabled:
        _check_pair(rho_l, p_l, rho_r, p_r)
    f_l = _phys_flux_n(u_l, rho_l, v_l, p_l, normal)
    f_r = _phys_flux_n(u_r, rho_r, v_r, p_r, normal)
    return tuple(0.5 * (a + b) for a, b in zip(f_l, f_r))


def flux_central_cartesian(u_l, u_r, j, gas):
    axes = _AXIS2 if len(u_l) == 4 else _AXIS3
    return flux_central_directional(u_l, u_r, axes[j], gas)


_AXIS2 = ((1.0, 0.0), (0.0, 1.0))
_AXIS3 = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))


# ---------------------------------------------------------------------------
# dissipative surface fluxes

def _split_normal(normal):
    nn = 0.0
    for c in normal:
        nn += c * c
    nn = math.sqrt(nn)
    return nn, tuple(c / nn for c in normal)


def flux_llf_directional(u_l, u_r, normal, gas):
    add_two_point()
    gm1 = gas.gamma - 1.0
    if len(u_l) == 4:
        rho_l, vl1, vl2, p_l = _prim2(u_l, gm1)
        rho_r, vr1, vr2, p_r = _prim2(u_r, gm1)
        v_l = (vl1, vl2)
        v_r = (vr1, vr2)
    else:
        rho_l, vl1, vl2, vl3, p_l = _prim3(u_l, gm1)
        rho_r, vr1, vr2, vr3, p_r = _prim3(u_r, gm1)
        v_l = (vl1, vl2, vl3)
        v_r = (vr1, vr2, vr3)
    if debug.enabled:
        _check_pair(rho_l, p_l, rho_r, p_r)
    norm, unit = _split_normal(normal)
    vn_l = 0.0
    vn_r = 0.0
    for a, b, n in zip(v_l, v_r, unit):
        vn_l += a * n
        vn_r += b * n
    lam = max(
        abs(vn_l) + math.sqrt(gas.gamma * p_l / rho_l),
        abs(vn_r) + math.sqrt(gas.gamma * p_r / rho_r),
    )
    f_l = _phys_flux_n(u_l, rho_l, v_l, p_l, normal)
    f_r = _phys_flux_n(u_r, rho_r, v_r, p_r, normal)
    halfdiss = 0.5 * lam * norm
    return tuple(
        0.5 * (a + b) - halfdiss * (ur - ul)
        for a, b, ul, ur in zip(f_l, f_r, u_l, u_r)
    )


def flux_hll_directional(u_l, u_r, normal, gas):
    add_two_point()
    gm1 = gas.gamma - 1.0
    if len(u_l) == 4:
        rho_l, vl1, vl2, p_l = _prim2(u_l, gm1)
        rho_r, vr1, vr2, p_r = _prim2(u_r, gm1)
        v_l = (vl1, vl2)
        v_r = (vr1, vr2)
    else:
        rho_l, vl1, vl2, vl3, p_l = _prim3(u_l, gm1)
        rho_r, vr1, vr2, vr3, p_r = _prim3(u_r, gm1)
        v_l = (vl1, vl2, vl3)
        v_r = (vr1, vr2, vr3)
    if debug.enabled:
        _check_pair(rho_l, p_l, rho_r, p_r)
    norm, unit = _split_normal(normal)
    vn_l = 0.0
    vn_r = 0.0
    for a, b, n in zip(v_l, v_r, unit):
        vn_l += a * n
        vn_r += b * n
    c_l = math.sqrt(gas.gamma * p_l / rho_l)
    c_r = math.sqrt(gas.gamma * p_r / rho_r)
    # Davis estimates
    s_l = min(vn_l - c_l, vn_r - c_r)
    s_r = max(vn_l + c_l, vn_r + c_r)
    f_l = _phys_flux_n(u_l, rho_l, v_l, p_l, unit)
    f_r = _phys_flux_n(u_r, rho_r, v_r, p_r, unit)
    if s_l >= 0.0:
        f = f_l
    elif s_r <= 0.0:
        f = f_r
    else:
        inv = 1.0 / (s_r - s_l)
        f = tuple(
            (s_r * a - s_l * b + s_l * s_r * (ur - ul)) * inv
            for a, b, ul, ur in zip(f_l, f_r, u_l, u_r)
        )
    return tuple(norm * c for c in f)


def flux_llf_cartesian(u_l, u_r, j, gas):
    axes = _AXIS2 if len(u_l) == 4 else _AXIS3
    return flux_llf_directional(u_l, u_r, axes[j], gas)


def flux_hll_cartesian(u_l, u_r, j, gas):
    axes = _AXIS2 if len(u_l) == 4 else _AXIS3
    return flux_hll_directional(u_l, u_r, axes[j], gas)


# ---------------------------------------------------------------------------
# rotated evaluation

def rotation_frame(normal):
    """(|n|, unit normal, tangent vectors) for a nonzero direction.

    2D tangent is the counterclockwise rotation; in 3D the first tangent
    crosses the unit vector of the smallest-magnitude normal component with
    the normal, which keeps the frame well conditioned.
    """
    norm, unit = _split_normal(normal)
    if len(normal) == 2:
        return norm, unit, ((-unit[1], unit[0]),)
    ax = min(range(3), key=lambda i: abs(unit[i]))
    e = _AXIS3[ax]
    t1 = (
        e[1] * unit[2] - e[2] * unit[1],
        e[2] * unit[0] - e[0] * unit[2],
        e[0] * unit[1] - e[1] * unit[0],
    )
    tn = math.sqrt(t1[0] * t1[0] + t1[1] * t1[1] + t1[2] * t1[2])
    t1 = (t1[0] / tn, t1[1] / tn, t1[2] / tn)
    t2 = (
        unit[1] * t1[2] - unit[2] * t1[1],
        unit[2] * t1[0] - unit[0] * t1[2],
        unit[0] * t1[1] - unit[1] * t1[0],
    )
    return norm, unit, (t1, t2)


def rotated_flux(kind, u_l, u_r, normal, gas, frame=None):
    """Directional flux via rotation to a face-aligned frame.

    frame=None recomputes the orthonormal frame per call (on-the-fly mode);
    passing a precomputed rotation_frame(normal) skips that work.
    """
    if frame is None:
        frame = rotation_frame(normal)
    norm, unit, tangents = frame
    cart = _CARTESIAN[kind]
    if len(u_l) == 4:
        rot_l = (
            u_l[0],
            u_l[1] * unit[0] + u_l[2] * unit[1],
            u_l[1] * tangents[0][0] + u_l[2] * tangents[0][1],
            u_l[3],
        )
        rot_r = (
            u_r[0],
            u_r[1] * unit[0] + u_r[2] * unit[1],
            u_r[1] * tangents[0][0] + u_r[2] * tangents[0][1],
            u_r[3],
        )
        f = cart(rot_l, rot_r, 0, gas)
        return (
            norm * f[0],
            norm * (f[1] * unit[0] + f[2] * tangents[0][0]),
            norm * (f[1] * unit[1] + f[2] * tangents[0][1]),
            norm * f[3],
        )
    t1, t2 = tangents
    rot_l = (
        u_l[0],
        u_l[1] * unit[0] + u_l[2] * unit[1] + u_l[3] * unit[2],
        u_l[1] * t1[0] + u_l[2] * t1[1] + u_l[3] * t1[2],
        u_l[1] * t2[0] + u_l[2] * t2[1] + u_l[3] * t2[2],
        u_l[4],
    )
    rot_r = (
        u_r[0],
        u_r[1] * unit[0] + u_r[2] * unit[1] + u_r[3] * unit[2],
        u_r[1] * t1[0] + u_r[2] * t1[1] + u_r[3] * t1[2],
        u_r[1] * t2[0] + u_r[2] * t2[1] + u_r[3] * t2[2],
        u_r[4],
    )
    f = cart(rot_l, rot_r, 0, gas)
    return (
        norm * f[0],
        norm * (f[1] * unit[0] + f[2] * t1[0] + f[3] * t2[0]),
        norm * (f[1] * unit[1] + f[2] * t1[1] + f[3] * t2[1]),
        norm * (f[1] * unit[2] + f[2] * t1[2] + f[3] * t2[2]),
        norm * f[4],
    )


# ---------------------------------------------------------------------------
# precomputed-primitive variants (same arithmetic, inputs already converted)

def flux_shima_directional_prim(q_l, q_r, normal, gas):
    d = len(normal)
    rho_l = q_l[0]
    rho_r = q_r[0]
    p_l = q_l[d + 1]
    p_r = q_r[d + 1]
    v_l = tuple(q_l[1 + i] for i in range(d))
    v_r = tuple(q_r[1 + i] for i in range(d))
    vn_l = 0.0
    vn_r = 0.0
    for a, b, n in zip(v_l, v_r, normal):
        vn_l += a * n
        vn_r += b * n
    return _shima_core(
        rho_l, p_l, rho_r, p_r, v_l, v_r, vn_l, vn_r, normal, gas.inv_gamma_minus_one
    )


def flux_shima_cartesian_prim(q_l, q_r, j, gas):
    d = len(q_l) - 2
    axes = _AXIS2 if d == 2 else _AXIS3
    normal = axes[j]
    rho_l = q_l[0]
    rho_r = q_r[0]
    p_l = q_l[d + 1]
    p_r = q_r[d + 1]
    v_l = tuple(q_l[1 + i] for i in range(d))
    v_r = tuple(q_r[1 + i] for i in range(d))
    return _shima_core(
        rho_l, p_l, rho_r, p_r, v_l, v_r, v_l[j], v_r[j], normal,
        gas.inv_gamma_minus_one,
    )


def _ranocha_prim(q_l, q_r, normal, vn_l, vn_r, d, gas, with_logs):
    rho_l = q_l[0]
    rho_r = q_r[0]
    p_l = q_l[d + 1]
    p_r = q_r[d + 1]
    v_l = tuple(q_l[1 + i] for i in range(d))
    v_r = tuple(q_r[1 + i] for i in range(d))
    add_logmean(2)
    if with_logs:
        lrho_l = q_l[d + 2]
        lrho_r = q_r[d + 2]
        lp_l = q_l[d + 3]
        lp_r = q_r[d + 3]
        rho_mean = _logmean_from_logs(rho_l, rho_r, lrho_l, lrho_r)
        inv_rho_p_mean = p_l * p_r * _inv_logmean_from_logs(
            rho_l * p_r, rho_r * p_l, lrho_l + lp_r, lrho_r + lp_l
        )
    else:
        rho_mean = _logmean(rho_l, rho_r)
        inv_rho_p_mean = p_l * p_r * _inv_logmean(rho_l * p_r, rho_r * p_l)
    return _ranocha_core(
        rho_l, p_l, rho_r, p_r, v_l, v_r, vn_l, vn_r, normal,
        gas.inv_gamma_minus_one, rho_mean, inv_rho_p_mean,
    )


def flux_ranocha_directional_prim(q_l, q_r, normal, gas, with_logs=False):
    d = len(normal)
    vn_l = 0.0
    vn_r = 0.0
    for i in range(d):
        vn_l += q_l[1 + i] * normal[i]
        vn_r += q_r[1 + i] * normal[i]
    return _ranocha_prim(q_l, q_r, normal, vn_l, vn_r, d, gas, with_logs)


def flux_ranocha_cartesian_prim(q_l, q_r, j, gas, with_logs=False):
    d = 2 if len(q_l) in (4, 6) else 3
    axes = _AXIS2 if d == 2 else _AXIS3
    return _ranocha_prim(q_l, q_r, axes[j], q_l[1 + j], q_r[1 + j], d, gas, with_logs)


def flux_central_directional_prim(q_l, q_r, normal, gas):
    add_two_point()
    d = len(normal)
    total = []
    for q in (q_l, q_r):
        rho = q[0]
        p = q[d + 1]
        vn = 0.0
        for i in range(d):
            vn += q[1 + i] * normal[i]
        rhovn = rho * vn
        e = p * gas.inv_gamma_minus_one + 0.5 * rho * sum(
            q[1 + i] * q[1 + i] for i in range(d)
        )
        f = (rhovn,) + tuple(
            rhovn * q[1 + i] + p * normal[i] for i in range(d)
        ) + ((e + p) * vn,)
        total.append(f)
    return tuple(0.5 * (a + b) for a, b in zip(*total))


def flux_central_cartesian_prim(q_l, q_r, j, gas):
    d = 2 if len(q_l) in (4, 6) else 3
    axes = _AXIS2 if d == 2 else _AXIS3
    return flux_central_directional_prim(q_l, q_r, axes[j], gas)


# ---------------------------------------------------------------------------
# dispatch

_CARTESIAN = {
    "shima": flux_shima_cartesian,
    "ranocha": flux_ranocha_cartesian,
    "central": flux_central_cartesian,
    "llf": flux_llf_cartesian,
    "hll": flux_hll_cartesian,
}

_DIRECTIONAL = {
    "shima": flux_shima_directional,
    "ranocha": flux_ranocha_directional,
    "central": flux_central_directional,
    "llf": flux_llf_directional,
    "hll": flux_hll_directional,
}


def flux_function(kind, form):
    """Look up a scalar flux kernel. form is 'cartesian' or 'directional'."""
    table = {"cartesian": _CARTESIAN, "directional": _DIRECTIONAL}.get(form)
    if table is None:
        raise ConfigurationError("unknown flux form %r" % (form,))
    fn = table.get(kind)
    if fn is None:
        raise ConfigurationError(
            "unknown flux kind %r (choose from %s)" % (kind, ", ".join(sorted(table)))
        )
    return fn


def require_volume_kind(kind):
    if kind not in VOLUME_KINDS:
        raise ConfigurationError(
            "volume flux must be symmetric (%s), got %r"
            % (", ".join(VOLUME_KINDS), kind)
        )
