"""Compressible Euler equations: states, fluxes, entropy pair.

Conserved states are numpy arrays with the variable index last,
u = (rho, rho*v_1 .. rho*v_d, rho*e), so fields of shape
(n_elements, n_nodes, d+2) broadcast through every function here. The
spatial dimension is inferred from the trailing axis length.

Direction arguments are 0-based axis indices, matching numpy.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import AdmissibilityError


@dataclass(frozen=True)
class GasParams:
    """Ideal-gas parameters. inv_gamma_minus_one is precomputed because the
    energy fluxes multiply by it in every evaluation."""

    gamma: float = 1.4
    inv_gamma_minus_one: float = field(init=False)

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise AdmissibilityError("gamma must exceed 1, got %r" % (self.gamma,))
        object.__setattr__(self, "inv_gamma_minus_one", 1.0 / (self.gamma - 1.0))


def _dim(u):
    d = u.shape[-1] - 2
    if d not in (1, 2, 3):
        raise AdmissibilityError("state vector length %d is not d+2 for d in 1..3" % u.shape[-1])
    return d


def _require_admissible(rho, p, what):
    if not (np.all(rho > 0.0) and np.all(p > 0.0)):
        raise AdmissibilityError(
            "%s: inadmissible state (min rho=%r, min p=%r)"
            % (what, float(np.min(rho)), float(np.min(p)))
        )


def cons2prim(u, gas):
    """Conserved -> primitive (rho, v_1..v_d, p)."""
    u = np.asarray(u, dtype=float)
    d = _dim(u)
    rho = u[..., 0]
    v = u[..., 1 : d + 1] / rho[..., None]
    kinetic = 0.5 * rho * np.sum(v * v, axis=-1)
    p = (gas.gamma - 1.0) * (u[..., d + 1] - kinetic)
    _require_admissible(rho, p, "cons2prim")
    q = np.empty_like(u)
    q[..., 0] = rho
    q[..., 1 : d + 1] = v
    q[..., d + 1] = p
    return q


def prim2cons(q, gas):
    """Primitive (rho, v, p) -> conserved."""
    q = np.asarray(q, dtype=float)
    d = _dim(q)
    rho = q[..., 0]
    v = q[..., 1 : d + 1]
    p = q[..., d + 1]
    _require_admissible(rho, p, "prim2cons")
    u = np.empty_like(q)
    u[..., 0] = rho
    u[..., 1 : d + 1] = rho[..., None] * v
    u[..., d + 1] = p * gas.inv_gamma_minus_one + 0.5 * rho * np.sum(v * v, axis=-1)
    return u


def physical_flux(u, direction, gas):
    """Euler flux f^j(u) along coordinate axis `direction` (0-based)."""
    u = np.asarray(u, dtype=float)
    d = _dim(u)
    rho = u[..., 0]
    mom = u[..., 1 : d + 1]
    v = mom / rho[..., None]
    p = (gas.gamma - 1.0) * (u[..., d + 1] - 0.5 * np.sum(mom * v, axis=-1))
    vj = v[..., direction]
    f = np.empty_like(u)
    f[..., 0] = mom[..., direction]
    f[..., 1 : d + 1] = mom * vj[..., None]
    f[..., 1 + direction] += p
    f[..., d + 1] = (u[..., d + 1] + p) * vj
    return f


def sound_speed(u, gas):
    u = np.asarray(u, dtype=float)
    d = _dim(u)
    rho = u[..., 0]
    mom = u[..., 1 : d + 1]
    p = (gas.gamma - 1.0) * (u[..., d + 1] - 0.5 * np.sum(mom * mom, axis=-1) / rho)
    _require_admissible(rho, p, "sound_speed")
    return np.sqrt(gas.gamma * p / rho)


def max_signal_speed(u, gas):
    """|v| + c per state; the CFL condition uses this."""
    u = np.asarray(u, dtype=float)
    d = _dim(u)
    rho = u[..., 0]
    v = u[..., 1 : d + 1] / rho[..., None]
    vmag = np.sqrt(np.sum(v * v, axis=-1))
    return vmag + sound_speed(u, gas)


def max_wave_speed(u_left, u_right, normal, gas):
    """max(|v.n| + c) over both states; `normal` must be a unit vector."""
    u_left = np.asarray(u_left, dtype=float)
    u_right = np.asarray(u_right, dtype=float)
    normal = np.asarray(normal, dtype=float)
    d = _dim(u_left)
    lam = 0.0
    for u in (u_left, u_right):
        rho = u[..., 0]
        vn = np.sum(u[..., 1 : d + 1] * normal, axis=-1) / rho
        lam = np.maximum(lam, np.abs(vn) + sound_speed(u, gas))
    return lam


def entropy_vars(u, gas):
    """Entropy variables w(u) for the entropy U = -rho s / (gamma - 1),
    s = log p - gamma log rho."""
    u = np.asarray(u, dtype=float)
    d = _dim(u)
    rho = u[..., 0]
    v = u[..., 1 : d + 1] / rho[..., None]
    p = (gas.gamma - 1.0) * (u[..., d + 1] - 0.5 * rho * np.sum(v * v, axis=-1))
    _require_admissible(rho, p, "entropy_vars")
    s = np.log(p) - gas.gamma * np.log(rho)
    rho_p = rho / p
    w = np.empty_like(u)
    w[..., 0] = (gas.gamma - s) * gas.inv_gamma_minus_one - 0.5 * rho_p * np.sum(
        v * v, axis=-1
    )
    w[..., 1 : d + 1] = rho_p[..., None] * v
    w[..., d + 1] = -rho_p
    return w


def entropy2cons(w, gas):
    """Inverse of entropy_vars. Raises if w is not the image of an
    admissible state (w_last must be negative)."""
    w = np.asarray(w, dtype=float)
    d = _dim(w)
    b = -w[..., d + 1]  # rho/p
    if not np.all(b > 0.0):
        raise AdmissibilityError(
            "entropy2cons: last entropy variable must be negative (min -w=%r)"
            % float(np.min(b))
        )
    v = w[..., 1 : d + 1] / b[..., None]
    s = gas.gamma - (gas.gamma - 1.0) * (w[..., 0] + 0.5 * b * np.sum(v * v, axis=-1))
    # s = log p - gamma log rho and rho = b p give log p = (s + gamma log b)/(1 - gamma)
    p = np.exp((s + gas.gamma * np.log(b)) / (1.0 - gas.gamma))
    rho = b * p
    u = np.empty_like(w)
    u[..., 0] = rho
    u[..., 1 : d + 1] = rho[..., None] * v
    u[..., d + 1] = p * gas.inv_gamma_minus_one + 0.5 * rho * np.sum(v * v, axis=-1)
    return u


def entropy_and_potential(u, gas):
    """Entropy U(u) and the flux potentials psi^j = rho v_j.

    Returns (U, psi) with psi having one trailing component per direction.
    The contraction w . f^j - psi^j recovers the entropy flux F^j = v_j U.
    """
    u = np.asarray(u, dtype=float)
    d = _dim(u)
    rho = u[..., 0]
    v = u[..., 1 : d + 1] / rho[..., None]
    p = (gas.gamma - 1.0) * (u[..., d + 1] - 0.5 * rho * np.sum(v * v, axis=-1))
    _require_admissible(rho, p, "entropy_and_potential")
    s = np.log(p) - gas.gamma * np.log(rho)
    entropy = -rho * s * gas.inv_gamma_minus_one
    psi = rho[..., None] * v
    return entropy, psi
