"""Right-hand-side assembly for split-form DG on structured periodic meshes.

Layout conventions used throughout:

* a solution field has shape (n_elements, (p+1)^d, d+2), conserved
  variables on the last axis, nodes in C order over the reference
  coordinates;
* per direction n, the element's nodes decompose into 1D "lines"; pair
  loops and face gathers all run line by line, which is how the tensor
  product structure is exploited (the 1D matrices are never blown up to
  d dimensions);
* volume operators return the VOL part of du/dt = -(VOL + SURF), already
  divided by the Jacobian, so a positive VOL approximates the flux
  divergence.

The per-element functions (volume_strong, volume_fluxdiff, ...) are the
reference implementations: plain float arithmetic through the scalar flux
kernels, fixed accumulation order, bitwise reproducible. `rhs` assembles
them over the mesh; with kernel="batched" it switches the two-point schemes
to the lane-parallel implementations in `batched`, which are
equivalence-tested against the reference path.
"""

from dataclasses import dataclass
from functools import lru_cache, partial

import numpy as np

from . import batched as _batched
from .errors import AdmissibilityError, ConfigurationError
from .euler import entropy2cons, entropy_vars, physical_flux
from .fluxes import (
    SURFACE_KINDS,
    add_one_point,
    count_guard,
    flux_function,
    flux_central_cartesian_prim,
    flux_central_directional_prim,
    flux_ranocha_cartesian_prim,
    flux_ranocha_directional_prim,
    flux_shima_cartesian_prim,
    flux_shima_directional_prim,
    require_volume_kind,
)
from .geometry import (
    apply_along,
    axis_aligned_areas,
    compute_metrics,
    element_coords,
    neighbor_table,
)
from .operators import (
    build_dsplit,
    build_hybridized,
    hybridized_scatter,
    make_operator,
    node_line_lists,
    node_lines,
    pair_table,
    skew_pair_table,
    transfer_matrices,
)

VOLUME_SCHEMES = (
    "strong",
    "weak",
    "fluxdiff",
    "overintegration",
    "gauss_fluxdiff",
    "gauss_surface_correction",
)
PRECOMPUTE_MODES = ("none", "primitives", "primitives_and_logs")
KERNELS = ("reference", "batched")

_PRIM_CARTESIAN = {
    "shima": flux_shima_cartesian_prim,
    "ranocha": flux_ranocha_cartesian_prim,
    "central": flux_central_cartesian_prim,
}
_PRIM_DIRECTIONAL = {
    "shima": flux_shima_directional_prim,
    "ranocha": flux_ranocha_directional_prim,
    "central": flux_central_directional_prim,
}


@dataclass(frozen=True)
class RhsConfig:
    """Scheme selection for one right-hand-side evaluation."""

    volume_scheme: str = "fluxdiff"
    volume_flux: str = "ranocha"
    surface_flux: str = "ranocha"
    precompute: str = "none"
    overint_degree: int | None = None
    kernel: str = "reference"

    def validate(self, setup):
        if self.volume_scheme not in VOLUME_SCHEMES:
            raise ConfigurationError(
                "volume_scheme: unknown scheme %r (choose from %s)"
                % (self.volume_scheme, ", ".join(VOLUME_SCHEMES))
            )
        if self.precompute not in PRECOMPUTE_MODES:
            raise ConfigurationError(
                "precompute: unknown mode %r (choose from %s)"
                % (self.precompute, ", ".join(PRECOMPUTE_MODES))
            )
        if self.kernel not in KERNELS:
            raise ConfigurationError(
                "kernel: unknown kernel %r (choose from %s)"
                % (self.kernel, ", ".join(KERNELS))
            )
        if self.surface_flux not in SURFACE_KINDS:
            raise ConfigurationError(
                "surface_flux: unknown kind %r (choose from %s)"
                % (self.surface_flux, ", ".join(SURFACE_KINDS))
            )
        if self.volume_scheme in ("fluxdiff", "gauss_fluxdiff", "gauss_surface_correction"):
            require_volume_kind(self.volume_flux)
        family = setup.op.family
        if self.volume_scheme.startswith("gauss") and family != "gauss":
            raise ConfigurationError(
                "volume_scheme: %r requires gauss operators, got family %r"
                % (self.volume_scheme, family)
            )
        if self.volume_scheme == "fluxdiff" and family != "lgl":
            raise ConfigurationError(
                "volume_scheme: 'fluxdiff' requires the lgl family (diagonal "
                "boundary operator); use the gauss schemes on gauss nodes"
            )
        if self.volume_scheme == "overintegration":
            if not setup.mesh.is_cartesian:
                raise ConfigurationError(
                    "volume_scheme: overintegration supports Cartesian meshes only"
                )
            q = self.overint_degree
            if q is None or q < setup.op.degree:
                raise ConfigurationError(
                    "overint_degree: need a degree >= p for overintegration, got %r"
                    % (q,)
                )
            if setup.overint is None or setup.overint[0].degree != q:
                raise ConfigurationError(
                    "overint_degree: setup was not built for degree %r "
                    "(pass overint_degree to build_setup)" % (q,)
                )
        if self.kernel == "batched" and self.volume_scheme in ("strong", "weak", "overintegration"):
            # those schemes are vectorized with numpy either way
            pass


@dataclass(frozen=True)
class PrecomputedElementData:
    """Per-node primitive tables, optionally with log(rho) and log(p).

    `q` rows are (rho, v_1..v_d, p[, log rho, log p]) as plain Python lists,
    the form the precompute-variant scalar kernels consume.
    """

    mode: str
    q: list
    d: int


def _face_count(p1, d):
    return p1 ** (d - 1)


def _own_face_ja(metrics_ja, op, d):
    """Boundary traces of one element's metric vectors.

    Returns, per direction n, an array (2, fn, d): the element's own
    (Ja)^n at its reference -1 and +1 faces.
    """
    p1 = op.n_nodes
    nd = metrics_ja.reshape((p1,) * d + (d, d))
    out = []
    for n in range(d):
        field = np.moveaxis(nd[..., n, :], n, -2)  # (..., p1, d)
        sides = [
            np.einsum("...kj,k->...j", field, op.boundary_interp[s]).reshape(-1, d)
            for s in (0, 1)
        ]
        out.append(np.stack(sides))
    return out


# ---------------------------------------------------------------------------
# per-element volume operators (scalar reference path)

def volume_strong(u_elem, op, metrics, gas):
    """Strong-form volume term: (1/J) sum_n D_n (sum_j (Ja)^n_j f^j(u))."""
    d = u_elem.shape[-1] - 2
    nn = u_elem.shape[0]
    p1 = op.n_nodes
    f = [physical_flux(u_elem, j, gas) for j in range(d)]
    add_one_point(d * nn)
    acc = np.zeros_like(u_elem)
    shape = (p1,) * d + (-1,)
    for n in range(d):
        contra = sum(metrics.ja[:, n, j, None] * f[j] for j in range(d))
        acc += apply_along(op.D, contra.reshape(shape), n).reshape(nn, -1)
    return acc / metrics.jac[:, None]


@lru_cache(maxsize=None)
def _weak_matrix(degree, family):
    op = make_operator(degree, family)
    mat = (op.D.T * op.weights[None, :]) / op.weights[:, None]
    mat.flags.writeable = False
    return mat


def volume_weak(u_elem, op, metrics, gas):
    """Weak-form volume term -(1/J) sum_n M^{-1} D_n^T M F^n.

    For a constant state this is nonzero at boundary nodes (it carries the
    boundary part of the SBP identity); the assembled RHS cancels it against
    the surface flux.
    """
    d = u_elem.shape[-1] - 2
    nn = u_elem.shape[0]
    p1 = op.n_nodes
    wmat = _weak_matrix(op.degree, op.family)
    f = [physical_flux(u_elem, j, gas) for j in range(d)]
    add_one_point(d * nn)
    acc = np.zeros_like(u_elem)
    shape = (p1,) * d + (-1,)
    for n in range(d):
        contra = sum(metrics.ja[:, n, j, None] * f[j] for j in range(d))
        acc -= apply_along(wmat, contra.reshape(shape), n).reshape(nn, -1)
    return acc / metrics.jac[:, None]


def precompute_element_data(u_elem, gas, mode):
    """Primitive (and optional log) tables consumed by the precompute-variant
    kernels. Logs use math.log, the same function the scalar kernels call, so
    the tables match the on-the-fly values exactly."""
    import math

    if mode not in PRECOMPUTE_MODES or mode == "none":
        raise ConfigurationError("precompute: mode %r has no tables" % (mode,))
    d = u_elem.shape[-1] - 2
    from .euler import cons2prim

    q = cons2prim(u_elem, gas).tolist()
    if mode == "primitives_and_logs":
        for row in q:
            row.append(math.log(row[0]))
            row.append(math.log(row[d + 1]))
    return PrecomputedElementData(mode, q, d)


def _volume_kernels(vol_flux, pre):
    """(cartesian_kernel, directional_kernel, states) for the pair loops."""
    if pre is None:
        return flux_function(vol_flux, "cartesian"), flux_function(vol_flux, "directional")
    cart = _PRIM_CARTESIAN[vol_flux]
    dirn = _PRIM_DIRECTIONAL[vol_flux]
    if vol_flux == "ranocha" and pre.mode == "primitives_and_logs":
        cart = partial(cart, with_logs=True)
        dirn = partial(dirn, with_logs=True)
    return cart, dirn


def volume_fluxdiff(u_elem, dop, metrics, vol_flux, gas, pre=None):
    """Flux-differencing volume term with the split derivative matrix.

    Pairs are visited once with i < k per line; the symmetric two-point flux
    is scattered with the stored (i,k) and (k,i) matrix weights, preserving
    the operator's M-antisymmetry exactly in floating point. Cartesian
    elements use the axis fluxes scaled by the constant face area, curved
    elements the directional fluxes with arithmetically averaged metric
    vectors.
    """
    require_volume_kind(vol_flux)
    op = dop.op
    p1 = op.n_nodes
    nvar = u_elem.shape[-1]
    d = nvar - 2
    nn = u_elem.shape[0]
    lines = node_line_lists(p1, d)
    pairs = pair_table(dop.matrix)
    areas = axis_aligned_areas(metrics.ja)
    cart, dirn = _volume_kernels(vol_flux, pre)
    states = u_elem.tolist() if pre is None else pre.q
    acc = [[0.0] * nvar for _ in range(nn)]
    for n in range(d):
        if areas is not None:
            area = areas[n]
            for line in lines[n]:
                for a, b, cab, cba in pairs:
                    i = line[a]
                    k = line[b]
                    f = cart(states[i], states[k], n, gas)
                    wi = cab * area
                    wk = cba * area
                    ai = acc[i]
                    ak = acc[k]
                    for v in range(nvar):
                        fv = f[v]
                        ai[v] += wi * fv
                        ak[v] += wk * fv
        else:
            jan = metrics.ja[:, n, :].tolist()
            for line in lines[n]:
                for a, b, cab, cba in pairs:
                    i = line[a]
                    k = line[b]
                    ji = jan[i]
                    jk = jan[k]
                    alpha = tuple(0.5 * (x + y) for x, y in zip(ji, jk))
                    f = dirn(states[i], states[k], alpha, gas)
                    ai = acc[i]
                    ak = acc[k]
                    for v in range(nvar):
                        fv = f[v]
                        ai[v] += cab * fv
                        ak[v] += cba * fv
    out = np.asarray(acc)
    out /= metrics.jac[:, None]
    return out


def volume_overintegration(u_elem, op, transfer, metrics_q, gas):
    """Interpolate to the degree-q grid, apply the weak-form volume term
    there, L2-project back. Cartesian metric terms only."""
    d = u_elem.shape[-1] - 2
    p1 = op.n_nodes
    q1 = transfer.degree_high + 1
    op_q = make_operator(transfer.degree_high, op.family)
    uq = u_elem.reshape((p1,) * d + (-1,))
    for n in range(d):
        uq = apply_along(transfer.interp, uq, n)
    uq = uq.reshape(q1**d, -1)
    vol_q = volume_weak(uq, op_q, metrics_q, gas)
    back = vol_q.reshape((q1,) * d + (-1,))
    for n in range(d):
        back = apply_along(transfer.project, back, n)
    return back.reshape(p1**d, -1)


def entropy_projection(u_elem, op, gas):
    """Stacked state [u; u(R w(u))]: volume nodes unchanged, face values are
    conservative states recovered from boundary-interpolated entropy
    variables. Face blocks follow volume nodes in coordinate order, the -1
    face before the +1 face, face nodes in line order."""
    d = u_elem.shape[-1] - 2
    p1 = op.n_nodes
    w = entropy_vars(u_elem, gas)
    w_nd = w.reshape((p1,) * d + (-1,))
    blocks = [u_elem]
    for n in range(d):
        moved = np.moveaxis(w_nd, n, -2)
        for side in (0, 1):
            row = op.boundary_interp[side]
            wf = np.einsum("...kv,k->...v", moved, row).reshape(-1, w.shape[-1])
            try:
                blocks.append(entropy2cons(wf, gas))
            except AdmissibilityError as err:
                raise AdmissibilityError(
                    "entropy projection produced an inadmissible face state "
                    "(direction %d, side %d): %s" % (n, side, err)
                ) from err
    return np.concatenate(blocks, axis=0)


def stacked_face_block(nn, fn, direction, side):
    """Row slice of one face block inside an entropy_projection result."""
    start = nn + (2 * direction + side) * fn
    return slice(start, start + fn)


def _gauss_line_terms(
    states,
    line,
    face_states,
    jan,
    face_jan,
    pairs,
    vf_coefs,
    lift,
    corner_sign,
    dirn,
    gas,
    nvar,
    acc,
    include_corner,
):
    """Accumulate one line's hybridized volume terms into acc (list rows).

    states/jan are element-wide lists indexed by node id; face_states and
    face_jan hold the two projected endpoint states and their metric traces
    for this line. Weights come pre-divided by mass where they target volume
    rows; face-row sums are lifted through R at the end.
    """
    p1 = len(line)
    # volume-volume pairs
    for a, b, cab, cba in pairs:
        i = line[a]
        k = line[b]
        alpha = tuple(0.5 * (x + y) for x, y in zip(jan[i], jan[k]))
        f = dirn(states[i], states[k], alpha, gas)
        ai = acc[i]
        ak = acc[k]
        for v in range(nvar):
            fv = f[v]
            ai[v] += cab * fv
            ak[v] += cba * fv
    # volume-face coupling plus lifted face rows
    for s in (0, 1):
        fstate = face_states[s]
        fja = face_jan[s]
        cvol = vf_coefs[s][0]
        cface = vf_coefs[s][1]
        rface = [0.0] * nvar
        for a in range(p1):
            i = line[a]
            alpha = tuple(0.5 * (x + y) for x, y in zip(jan[i], fja))
            f = dirn(states[i], fstate, alpha, gas)
            ai = acc[i]
            ca = cvol[a]
            cf = cface[a]
            for v in range(nvar):
                fv = f[v]
                ai[v] += ca * fv
                rface[v] += cf * fv
        if include_corner:
            f = dirn(fstate, fstate, tuple(fja), gas)
            cs = corner_sign[s]
            for v in range(nvar):
                rface[v] += cs * f[v]
        lrow = lift[s]
        for a in range(p1):
            i = line[a]
            la = lrow[a]
            if la == 0.0:
                continue
            ai = acc[i]
            for v in range(nvar):
                ai[v] += la * rface[v]


def _gauss_volume(u_elem, op, metrics, vol_flux, gas, include_corner, proj=None):
    require_volume_kind(vol_flux)
    p1 = op.n_nodes
    nvar = u_elem.shape[-1]
    d = nvar - 2
    nn = u_elem.shape[0]
    fn = _face_count(p1, d)
    lines = node_line_lists(p1, d)
    pairs, vf_coefs, lift, corner = hybridized_scatter(op.degree, op.family)
    dirn = flux_function(vol_flux, "directional")
    if proj is None:
        proj = entropy_projection(u_elem, op, gas)
    face_ja = _own_face_ja(metrics.ja, op, d)
    states = u_elem.tolist()
    acc = [[0.0] * nvar for _ in range(nn)]
    for n in range(d):
        jan = metrics.ja[:, n, :].tolist()
        fja = face_ja[n]
        fstates = [
            proj[stacked_face_block(nn, fn, n, s)].tolist() for s in (0, 1)
        ]
        fja_lists = [fja[s].tolist() for s in (0, 1)]
        for m, line in enumerate(lines[n]):
            _gauss_line_terms(
                states,
                line,
                (fstates[0][m], fstates[1][m]),
                jan,
                (fja_lists[0][m], fja_lists[1][m]),
                pairs,
                vf_coefs,
                lift,
                corner,
                dirn,
                gas,
                nvar,
                acc,
                include_corner,
            )
    out = np.asarray(acc)
    out /= metrics.jac[:, None]
    return out


def volume_gauss_fluxdiff(u_elem, hyb, metrics, vol_flux, gas, proj=None):
    """Hybridized flux-differencing volume term: two-point fluxes over the
    stacked volume+face node set, lifted back through [I; R]^T. Zero for a
    constant state (the face consistency flux is part of the operator)."""
    return _gauss_volume(
        u_elem, hyb.op, metrics, vol_flux, gas, include_corner=True, proj=proj
    )


def volume_gauss_surface_correction(u_elem, op, hyb, metrics, vol_flux, gas, proj=None):
    """Gauss volume term in the surface-correction arrangement: the standard
    split-derivative sum over volume nodes plus correction terms from the
    face-coupling blocks, each volume/face crossing evaluated once. Agrees
    with volume_gauss_fluxdiff up to summation order."""
    require_volume_kind(vol_flux)
    p1 = op.n_nodes
    nvar = u_elem.shape[-1]
    d = nvar - 2
    nn = u_elem.shape[0]
    fn = _face_count(p1, d)
    lines = node_line_lists(p1, d)
    pairs = skew_pair_table(op.degree, op.family)
    _, vf_coefs, lift, corner = hybridized_scatter(op.degree, op.family)
    dirn = flux_function(vol_flux, "directional")
    if proj is None:
        proj = entropy_projection(u_elem, op, gas)
    face_ja = _own_face_ja(metrics.ja, op, d)
    states = u_elem.tolist()
    acc = [[0.0] * nvar for _ in range(nn)]
    for n in range(d):
        jan = metrics.ja[:, n, :].tolist()
        fja = face_ja[n]
        fstates = [proj[stacked_face_block(nn, fn, n, s)].tolist() for s in (0, 1)]
        fja_lists = [fja[s].tolist() for s in (0, 1)]
        for m, line in enumerate(lines[n]):
            # split-derivative part over volume nodes
            for a, b, cab, cba in pairs:
                i = line[a]
                k = line[b]
                alpha = tuple(0.5 * (x + y) for x, y in zip(jan[i], jan[k]))
                f = dirn(states[i], states[k], alpha, gas)
                ai = acc[i]
                ak = acc[k]
                for v in range(nvar):
                    fv = f[v]
                    ai[v] += cab * fv
                    ak[v] += cba * fv
            # correction terms: face/volume crossings once each, then the
            # face consistency flux, lifted through R
            for s in (0, 1):
                fstate = fstates[s][m]
                fj = fja_lists[s][m]
                cvol = vf_coefs[s][0]
                cface = vf_coefs[s][1]
                rface = [0.0] * nvar
                for a in range(p1):
                    i = line[a]
                    alpha = tuple(0.5 * (x + y) for x, y in zip(jan[i], fj))
                    f = dirn(states[i], fstate, alpha, gas)
                    ai = acc[i]
                    ca = cvol[a]
                    cf = cface[a]
                    for v in range(nvar):
                        fv = f[v]
                        ai[v] += ca * fv
                        rface[v] += cf * fv
                f = dirn(fstate, fstate, tuple(fj), gas)
                cs = corner[s]
                for v in range(nvar):
                    rface[v] += cs * f[v]
                lrow = lift[s]
                for a in range(p1):
                    la = lrow[a]
                    if la == 0.0:
                        continue
                    i = line[a]
                    ai = acc[i]
                    for v in range(nvar):
                        ai[v] += la * rface[v]
    out = np.asarray(acc)
    out /= metrics.jac[:, None]
    return out


# ---------------------------------------------------------------------------
# mesh-level setup and assembly

@dataclass(frozen=True)
class SpatialSetup:
    """Everything precomputable for RHS evaluations on one mesh/operator."""

    mesh: object
    op: object
    gas: object
    metrics: object
    coords: np.ndarray
    lines: tuple
    plus_neighbor: tuple
    dsplit: object
    hyb: object
    wbar: np.ndarray
    overint: tuple

    @property
    def n_elements(self):
        return self.coords.shape[0]

    @property
    def n_nodes(self):
        return self.coords.shape[1]

    @property
    def d(self):
        return self.mesh.d

    @property
    def dofs(self):
        return self.n_elements * self.n_nodes


def build_setup(mesh, op, gas, overint_degree=None):
    """Precompute geometry, connectivity and operator tables for `rhs`."""
    d = mesh.d
    p1 = op.n_nodes
    coords = element_coords(mesh, op)
    metrics = compute_metrics(mesh, op, coords)
    lines = node_lines(p1, d)
    plus = neighbor_table(mesh)
    dsplit = build_dsplit(op) if op.family == "lgl" else None
    hyb = build_hybridized(op)
    wbar = np.ones(1)
    for n in range(d):
        wbar = np.kron(wbar, op.weights)
    overint = None
    if overint_degree is not None:
        if overint_degree < op.degree:
            raise ConfigurationError(
                "overint_degree: need a degree >= p, got %r" % (overint_degree,)
            )
        transfer = transfer_matrices(op.degree, overint_degree, op.family)
        op_q = make_operator(overint_degree, op.family)
        from .geometry import MetricTerms

        if not mesh.is_cartesian:
            raise ConfigurationError(
                "overint_degree: overintegration supports Cartesian meshes only"
            )
        nnq = op_q.n_nodes**d
        jac_val = 1.0
        for wdt in mesh.widths:
            jac_val *= 0.5 * wdt
        ja_q = np.zeros((nnq, d, d))
        for n in range(d):
            ja_q[:, n, n] = jac_val / (0.5 * mesh.widths[n])
        metrics_q = MetricTerms(ja_q, np.full(nnq, jac_val))
        overint = (op_q, transfer, metrics_q)
    return SpatialSetup(
        mesh,
        op,
        gas,
        metrics,
        coords,
        lines,
        plus,
        dsplit,
        hyb,
        wbar,
        overint,
    )


def _admissibility_gate(u, gas):
    rho = u[..., 0]
    d = u.shape[-1] - 2
    mom = u[..., 1 : d + 1]
    p = (gas.gamma - 1.0) * (u[..., d + 1] - 0.5 * np.sum(mom * mom, axis=-1) / rho)
    bad = ~((rho > 0.0) & (p > 0.0) & np.isfinite(rho) & np.isfinite(p))
    if np.any(bad):
        e, i = np.unravel_index(np.argmax(bad), bad.shape)
        raise AdmissibilityError(
            "inadmissible state at element %d, node %d: rho=%r, p=%r"
            % (int(e), int(i), float(rho[e, i]), float(p[e, i]))
        )
    return p


def _element_terms(setup, e):
    from .geometry import MetricTerms

    return MetricTerms(setup.metrics.ja[e], setup.metrics.jac[e])


def surface_terms(u, setup, surface_flux, subtract_own=False, face_states=None, out=None):
    """Interface coupling: numerical fluxes on interior faces, one evaluation
    per face point, scattered with opposite signs into the two adjacent
    elements (lifted through R^T B N M^{-1}, which for Lobatto nodes touches
    only the boundary nodes).

    subtract_own switches to the strong-form coupling f_num - f(own face
    state). face_states overrides the face values (the gauss path passes
    entropy-projected states and gets its own routine instead; this one
    serves the collocated schemes). Returns the SURF part of
    du/dt = -(VOL + SURF), divided by J.
    """
    mesh = setup.mesh
    op = setup.op
    d = mesh.d
    p1 = op.n_nodes
    nvar = u.shape[-1]
    kernel = flux_function(surface_flux, "directional")
    gas = setup.gas
    if out is None:
        out = np.zeros_like(u)
    lgl = op.family == "lgl"
    jac = setup.metrics.jac
    w1d = op.weights
    for n in range(d):
        lines = setup.lines[n]
        minus_nodes = lines[:, -1]
        plus_nodes = lines[:, 0]
        if face_states is not None:
            vminus, vplus = face_states[n]
        elif lgl:
            vminus = u[:, minus_nodes, :]
            vplus = u[:, plus_nodes, :]
        else:
            u_nd = u.reshape((u.shape[0],) + (p1,) * d + (nvar,))
            moved = np.moveaxis(u_nd, n + 1, -2)
            vminus = np.einsum("...kv,k->...v", moved, op.boundary_interp[1]).reshape(
                u.shape[0], -1, nvar
            )
            vplus = np.einsum("...kv,k->...v", moved, op.boundary_interp[0]).reshape(
                u.shape[0], -1, nvar
            )
        normals = setup.metrics.face_ja[n]
        nb = setup.plus_neighbor[n]
        minus_list = vminus.tolist()
        plus_list = vplus.tolist()
        normal_list = normals.tolist()
        n_faces = u.shape[0]
        fn = normals.shape[1]
        if lgl:
            wm = w1d[-1]
            wp = w1d[0]
            for f in range(n_faces):
                ep = int(nb[f])
                row_m = minus_list[f]
                row_p = plus_list[ep]
                nrm_row = normal_list[f]
                for m in range(fn):
                    ul = row_m[m]
                    ur = row_p[m]
                    nrm = nrm_row[m]
                    fhat = kernel(ul, ur, nrm, gas)
                    im = int(minus_nodes[m])
                    ip = int(plus_nodes[m])
                    if subtract_own:
                        add_one_point(2)
                        fl = _own_flux(ul, nrm, gas)
                        fr = _own_flux(ur, nrm, gas)
                        dm = [a - b for a, b in zip(fhat, fl)]
                        dp = [a - b for a, b in zip(fhat, fr)]
                    else:
                        dm = fhat
                        dp = fhat
                    sm = 1.0 / (wm * jac[f, im])
                    sp = 1.0 / (wp * jac[ep, ip])
                    om = out[f, im]
                    opn = out[ep, ip]
                    for v in range(nvar):
                        om[v] += sm * dm[v]
                        opn[v] -= sp * dp[v]
        else:
            lift_m = op.boundary_interp[1] / w1d
            lift_p = op.boundary_interp[0] / w1d
            for f in range(n_faces):
                ep = int(nb[f])
                row_m = minus_list[f]
                row_p = plus_list[ep]
                nrm_row = normal_list[f]
                for m in range(fn):
                    ul = row_m[m]
                    ur = row_p[m]
                    nrm = nrm_row[m]
                    fhat = np.asarray(kernel(ul, ur, nrm, gas))
                    if subtract_own:
                        add_one_point(2)
                        dm = fhat - np.asarray(_own_flux(ul, nrm, gas))
                        dp = fhat - np.asarray(_own_flux(ur, nrm, gas))
                    else:
                        dm = fhat
                        dp = fhat
                    line_nodes = lines[m]
                    out[f, line_nodes] += (
                        lift_m[:, None] * dm[None, :] / jac[f, line_nodes, None]
                    )
                    out[ep, line_nodes] -= (
                        lift_p[:, None] * dp[None, :] / jac[ep, line_nodes, None]
                    )
    return out


def _own_flux(u, normal, gas):
    """Physical flux of one state contracted with a scaled direction."""
    nvar = len(u)
    d = nvar - 2
    rho = u[0]
    v = [u[1 + i] / rho for i in range(d)]
    ke = 0.0
    for i in range(d):
        ke += v[i] * u[1 + i]
    p = (gas.gamma - 1.0) * (u[d + 1] - 0.5 * ke)
    vn = 0.0
    for i in range(d):
        vn += v[i] * normal[i]
    f = [rho * vn]
    for i in range(d):
        f.append(u[1 + i] * vn + p * normal[i])
    f.append((u[d + 1] + p) * vn)
    return f


def _project_all(u, setup):
    """Entropy-projected face states for every element: per direction n a
    pair (side0, side1) of arrays (n_elem, fn, nvar)."""
    mesh = setup.mesh
    op = setup.op
    d = mesh.d
    p1 = op.n_nodes
    nvar = u.shape[-1]
    gas = setup.gas
    w = entropy_vars(u, gas)
    w_nd = w.reshape((u.shape[0],) + (p1,) * d + (nvar,))
    out = []
    for n in range(d):
        moved = np.moveaxis(w_nd, n + 1, -2)
        sides = []
        for side in (0, 1):
            wf = np.einsum("...kv,k->...v", moved, op.boundary_interp[side])
            wf = wf.reshape(u.shape[0], -1, nvar)
            try:
                sides.append(entropy2cons(wf, gas))
            except AdmissibilityError as err:
                raise AdmissibilityError(
                    "entropy projection produced an inadmissible face state "
                    "(direction %d, side %d): %s" % (n, side, err)
                ) from err
        out.append(tuple(sides))
    return out


def _gauss_surface(u, setup, surface_flux, proj, out):
    """Surface coupling for the gauss schemes: entropy-projected face states,
    each face flux evaluated once per adjacent element (twice per face),
    lifted through the dense R. Accumulates M^{-1}-weighted rows; the caller
    divides by the Jacobian."""
    mesh = setup.mesh
    op = setup.op
    d = mesh.d
    nvar = u.shape[-1]
    gas = setup.gas
    kernel = flux_function(surface_flux, "directional")
    w1d = op.weights
    lift_m = (op.boundary_interp[1] / w1d).tolist()
    lift_p = (op.boundary_interp[0] / w1d).tolist()
    p1 = op.n_nodes
    for n in range(d):
        lines = setup.lines[n].tolist()
        nb = setup.plus_neighbor[n]
        vminus = proj[n][1]
        vplus = proj[n][0]
        minus_list = vminus.tolist()
        plus_list = vplus.tolist()
        normal_list = setup.metrics.face_ja[n].tolist()
        n_faces = u.shape[0]
        fn = len(normal_list[0])
        for f in range(n_faces):
            ep = int(nb[f])
            row_m = minus_list[f]
            row_p = plus_list[ep]
            nrm_row = normal_list[f]
            for m in range(fn):
                ul = row_m[m]
                ur = row_p[m]
                nrm = nrm_row[m]
                line = lines[m]
                # once per side, same arguments, so the values agree
                fhat_m = kernel(ul, ur, nrm, gas)
                om = out[f]
                for a in range(p1):
                    la = lift_m[a]
                    if la == 0.0:
                        continue
                    row = om[line[a]]
                    for v in range(nvar):
                        row[v] += la * fhat_m[v]
                fhat_p = kernel(ul, ur, nrm, gas)
                opn = out[ep]
                for a in range(p1):
                    la = lift_p[a]
                    if la == 0.0:
                        continue
                    row = opn[line[a]]
                    for v in range(nvar):
                        row[v] -= la * fhat_p[v]


def rhs(u, setup, config, counter=None):
    """Assembled right-hand side du/dt = -(VOL + SURF).

    Deterministic for fixed inputs: element loops and pair loops run in a
    fixed order. With config.kernel == "batched" the two-point schemes run
    the lane-parallel kernels; schemes built from one-point fluxes are numpy
    vectorized either way.
    """
    if counter is not None:
        with count_guard(counter):
            return rhs(u, setup, config)
    config.validate(setup)
    u = np.asarray(u, dtype=float)
    _admissibility_gate(u, setup.gas)
    scheme = config.volume_scheme
    n_elem = setup.n_elements
    gas = setup.gas
    if scheme in ("strong", "weak", "overintegration"):
        out = np.empty_like(u)
        for e in range(n_elem):
            terms = _element_terms(setup, e)
            if scheme == "strong":
                out[e] = volume_strong(u[e], setup.op, terms, gas)
            elif scheme == "weak":
                out[e] = volume_weak(u[e], setup.op, terms, gas)
            else:
                op_q, transfer, metrics_q = setup.overint
                out[e] = volume_overintegration(
                    u[e], setup.op, transfer, metrics_q, gas
                )
        # the weak-form volume term (which overintegration projects back
        # from the fine grid) already carries the boundary flux of the
        # element's own state, so only the strong form subtracts it here
        subtract = scheme == "strong"
        surface_terms(u, setup, config.surface_flux, subtract_own=subtract, out=out)
        return -out
    if scheme == "fluxdiff":
        if config.kernel == "batched":
            out = _batched.mesh_fluxdiff_volume(u, setup, config)
            _batched.mesh_surface(u, setup, config.surface_flux, out)
            return -out
        out = np.empty_like(u)
        for e in range(n_elem):
            terms = _element_terms(setup, e)
            pre = (
                precompute_element_data(u[e], gas, config.precompute)
                if config.precompute != "none"
                else None
            )
            out[e] = volume_fluxdiff(
                u[e], setup.dsplit, terms, config.volume_flux, gas, pre
            )
        surface_terms(u, setup, config.surface_flux, out=out)
        return -out
    # gauss schemes: zero-corner volume arrangement plus bare interface
    # fluxes; the face consistency flux of the public per-element ops cancels
    # against the strong-form surface subtraction, so neither is computed
    proj = _project_all(u, setup)
    if config.kernel == "batched":
        out = _batched.mesh_gauss_volume(u, setup, config, proj)
        _batched.mesh_gauss_surface(u, setup, config, proj, out)
        return -out
    acc = [[[0.0] * u.shape[-1] for _ in range(setup.n_nodes)] for _ in range(n_elem)]
    _scalar_gauss_volume(u, setup, scheme, config.volume_flux, proj, acc)
    _gauss_surface(u, setup, config.surface_flux, proj, acc)
    out = np.asarray(acc)
    out /= setup.metrics.jac[:, :, None]
    return -out


def _scalar_gauss_volume(u, setup, scheme, vol_flux, proj, acc):
    """Zero-corner hybridized volume accumulation (not divided by J).

    The two gauss schemes run the same pair structure but draw the
    volume-volume weights from different constructions (hybridized operator
    entries vs the split derivative matrix); the results agree to roundoff.
    """
    require_volume_kind(vol_flux)
    op = setup.op
    d = setup.d
    p1 = op.n_nodes
    nvar = u.shape[-1]
    lines = node_line_lists(p1, d)
    pairs, vf_coefs, lift, _corner = hybridized_scatter(op.degree, op.family)
    if scheme == "gauss_surface_correction":
        pairs = skew_pair_table(op.degree, op.family)
    dirn = flux_function(vol_flux, "directional")
    metrics = setup.metrics
    eja = metrics.elem_face_ja
    for e in range(setup.n_elements):
        states = u[e].tolist()
        acc_e = acc[e]
        for n in range(d):
            jan = metrics.ja[e, :, n, :].tolist()
            fstates = (proj[n][0][e].tolist(), proj[n][1][e].tolist())
            fja = (eja[n][e, 0].tolist(), eja[n][e, 1].tolist())
            for m, line in enumerate(lines[n]):
                _gauss_line_terms(
                    states,
                    line,
                    (fstates[0][m], fstates[1][m]),
                    jan,
                    (fja[0][m], fja[1][m]),
                    pairs,
                    vf_coefs,
                    lift,
                    _corner,
                    dirn,
                    setup.gas,
                    nvar,
                    acc_e,
                    include_corner=False,
                )


def entropy_rate(u, dudt, setup):
    """Normalized semidiscrete entropy production sum_i M_i J_i w_i . du_i.

    The normalization is the sum of the absolute per-node contributions, the
    scale at which roundoff lives, so an entropy-conservative configuration
    sits at O(1e-13) regardless of solution magnitude."""
    w = entropy_vars(u, setup.gas)
    weights = setup.wbar[None, :] * setup.metrics.jac
    contrib = weights * np.sum(w * dudt, axis=-1)
    scale = np.sum(np.abs(weights[..., None] * w * dudt))
    total = float(np.sum(contrib))
    if scale == 0.0:
        return 0.0, 0.0
    return total, total / scale


def conserved_totals(u, setup):
    """Componentwise integral sum_i M_i J_i u_i over the mesh."""
    weights = setup.wbar[None, :] * setup.metrics.jac
    return np.sum(weights[..., None] * u, axis=(0, 1))


def error_norm_l2(u, u_exact, setup):
    """M-weighted discrete L2 error per component."""
    weights = setup.wbar[None, :] * setup.metrics.jac
    diff = u - u_exact
    sq = np.sum(weights[..., None] * diff * diff, axis=(0, 1))
    return np.sqrt(sq)
