import numpy as np
import pytest

from fluxdg import (
    FluxCounter,
    GasParams,
    RhsConfig,
    build_mesh,
    build_setup,
    conserved_totals,
    count_guard,
    entropy_rate,
    error_norm_l2,
    flux_function,
    make_operator,
    prim2cons,
    rhs,
)
from fluxdg.discretization import (
    entropy_projection,
    precompute_element_data,
    stacked_face_block,
    surface_terms,
    volume_fluxdiff,
    volume_gauss_fluxdiff,
    volume_gauss_surface_correction,
    volume_overintegration,
    volume_strong,
    volume_weak,
)
from fluxdg.errors import AdmissibilityError, ConfigurationError
from fluxdg.geometry import element_metrics
from fluxdg.operators import node_lines, transfer_matrices

from .conftest import random_field


def lgl_setup(gas, d=2, dims=None, amplitude=0.0, p=3, **kw):
    mesh = build_mesh(dims or (2,) * d, amplitude=amplitude)
    return build_setup(mesh, make_operator(p, "lgl"), gas, **kw)


def gauss_setup(gas, d=2, dims=None, amplitude=0.0, geo_degree=None, p=3):
    mesh = build_mesh(dims or (2,) * d, amplitude=amplitude, geo_degree=geo_degree)
    return build_setup(mesh, make_operator(p, "gauss"), gas)


def constant_field(setup, gas, prim=(1.0, 0.1, -0.2, 0.3, 1.0)):
    row = np.asarray(prim[: setup.d + 1] + (prim[-1],))
    q = np.tile(row, (setup.n_elements, setup.n_nodes, 1))
    return prim2cons(q, gas)


def matrix_route_fluxdiff(u_elem, dop, metrics, vol_flux, gas):
    """Volume term assembled directly from the split matrix: every ordered
    node pair (i, k) contributes D_split[i,k] F(u_i, u_k, mean metric). The
    production kernel visits unordered pairs once and scatters both weights;
    the two readings must agree up to summation order."""
    op = dop.op
    mat = dop.matrix
    p1 = op.n_nodes
    d = u_elem.shape[-1] - 2
    dirn = flux_function(vol_flux, "directional")
    states = u_elem.tolist()
    acc = np.zeros_like(u_elem)
    for n in range(d):
        for line in node_lines(p1, d)[n]:
            for a in range(p1):
                i = int(line[a])
                for b in range(p1):
                    if a == b or mat[a, b] == 0.0:
                        continue
                    k = int(line[b])
                    alpha = tuple(0.5 * (metrics.ja[i, n] + metrics.ja[k, n]))
                    f = dirn(states[i], states[k], alpha, gas)
                    acc[i] += mat[a, b] * np.asarray(f)
    return acc / metrics.jac[:, None]


# --- configuration validation ------------------------------------------------


def test_config_rejects_unknown_names(gas):
    setup = lgl_setup(gas)
    cases = [
        (RhsConfig(volume_scheme="nope"), "volume_scheme"),
        (RhsConfig(precompute="cached"), "precompute"),
        (RhsConfig(kernel="gpu"), "kernel"),
        (RhsConfig(surface_flux="roe"), "surface_flux"),
        (RhsConfig(volume_flux="llf"), "volume flux"),
    ]
    for cfg, field in cases:
        with pytest.raises(ConfigurationError, match=field):
            cfg.validate(setup)


def test_config_family_constraints(gas):
    lgl = lgl_setup(gas)
    gss = gauss_setup(gas)
    with pytest.raises(ConfigurationError, match="volume_scheme"):
        RhsConfig(volume_scheme="gauss_fluxdiff").validate(lgl)
    with pytest.raises(ConfigurationError, match="volume_scheme"):
        RhsConfig(volume_scheme="fluxdiff").validate(gss)
    RhsConfig(volume_scheme="gauss_surface_correction").validate(gss)


def test_config_overintegration_requirements(gas):
    plain = lgl_setup(gas)
    with pytest.raises(ConfigurationError, match="overint_degree"):
        RhsConfig(volume_scheme="overintegration").validate(plain)
    # setup must have been built for the requested fine degree
    with pytest.raises(ConfigurationError, match="overint_degree"):
        RhsConfig(volume_scheme="overintegration", overint_degree=5).validate(plain)
    curved = lgl_setup(gas, amplitude=0.2)
    with pytest.raises(ConfigurationError, match="volume_scheme"):
        RhsConfig(volume_scheme="overintegration", overint_degree=5).validate(curved)
    ready = lgl_setup(gas, overint_degree=5)
    RhsConfig(volume_scheme="overintegration", overint_degree=5).validate(ready)


def test_build_setup_rejects_low_overint_degree(gas):
    mesh = build_mesh((2, 2))
    with pytest.raises(ConfigurationError, match="overint_degree"):
        build_setup(mesh, make_operator(3, "lgl"), gas, overint_degree=2)


# --- scheme equivalences -----------------------------------------------------


@pytest.mark.parametrize("amplitude", [0.0, 0.2])
def test_strong_equals_weak_assembled(gas, amplitude):
    setup = lgl_setup(gas, dims=(3, 2), amplitude=amplitude)
    u = random_field(setup, gas, seed=3, amp=0.4)
    r_strong = rhs(u, setup, RhsConfig(volume_scheme="strong", surface_flux="llf"))
    r_weak = rhs(u, setup, RhsConfig(volume_scheme="weak", surface_flux="llf"))
    assert np.abs(r_strong - r_weak).max() < 1e-13


def test_central_fluxdiff_equals_strong_on_cartesian(gas):
    # the split matrix with the plain average collapses to the strong
    # derivative; on curved meshes the two differ at truncation order
    # because the metric average moves inside the product rule
    setup = lgl_setup(gas, dims=(3, 3))
    u = random_field(setup, gas, seed=4, amp=0.5)
    r_fd = rhs(u, setup, RhsConfig(volume_flux="central", surface_flux="central"))
    r_strong = rhs(u, setup, RhsConfig(volume_scheme="strong", surface_flux="central"))
    assert np.abs(r_fd - r_strong).max() < 1e-13


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("vol_flux", ["shima", "ranocha"])
def test_fluxdiff_matches_matrix_route(gas, d, vol_flux):
    setup = lgl_setup(gas, d=d, amplitude=0.15)
    u = random_field(setup, gas, seed=5, amp=0.4)
    for e in range(min(2, setup.n_elements)):
        terms = element_metrics(setup.metrics, e)
        got = volume_fluxdiff(u[e], setup.dsplit, terms, vol_flux, gas)
        want = matrix_route_fluxdiff(u[e], setup.dsplit, terms, vol_flux, gas)
        assert np.abs(got - want).max() < 1e-13


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("vol_flux", ["shima", "ranocha"])
def test_fluxdiff_free_stream_curved(gas, d, vol_flux):
    setup = lgl_setup(gas, d=d, dims=(3,) * d, amplitude=0.12)
    u = constant_field(setup, gas)
    cfg = RhsConfig(volume_flux=vol_flux, surface_flux=vol_flux)
    assert np.abs(rhs(u, setup, cfg)).max() < 1e-12


@pytest.mark.parametrize("d,amplitude,geo", [(2, 0.0, None), (2, 0.15, 2), (3, 0.08, 1)])
def test_gauss_forms_agree(gas, d, amplitude, geo):
    dims = (3,) * d
    setup = gauss_setup(gas, dims=dims, amplitude=amplitude, geo_degree=geo)
    u = random_field(setup, gas, seed=6, amp=0.3)
    r_hyb = rhs(u, setup, RhsConfig(volume_scheme="gauss_fluxdiff"))
    r_cor = rhs(u, setup, RhsConfig(volume_scheme="gauss_surface_correction"))
    assert np.abs(r_hyb - r_cor).max() < 1e-13


def test_gauss_volume_forms_agree_per_element(gas):
    setup = gauss_setup(gas, amplitude=0.15, geo_degree=2)
    u = random_field(setup, gas, seed=7, amp=0.3)
    terms = element_metrics(setup.metrics, 1)
    a = volume_gauss_fluxdiff(u[1], setup.hyb, terms, "ranocha", gas)
    b = volume_gauss_surface_correction(u[1], setup.op, setup.hyb, terms, "ranocha", gas)
    assert np.abs(a - b).max() < 1e-13


@pytest.mark.parametrize("vol_flux", ["shima", "ranocha"])
def test_precompute_variants_match_baseline(gas, vol_flux):
    setup = lgl_setup(gas, dims=(3, 2), amplitude=0.1)
    u = random_field(setup, gas, seed=8, amp=0.4)
    base = rhs(u, setup, RhsConfig(volume_flux=vol_flux, surface_flux="llf"))
    for mode in ("primitives", "primitives_and_logs"):
        cfg = RhsConfig(volume_flux=vol_flux, surface_flux="llf", precompute=mode)
        assert np.abs(rhs(u, setup, cfg) - base).max() < 1e-13


def test_precompute_table_modes(gas):
    setup = lgl_setup(gas)
    u = random_field(setup, gas, seed=9, amp=0.4)
    pre = precompute_element_data(u[0], gas, "primitives_and_logs")
    assert len(pre.q[0]) == setup.d + 4
    row = pre.q[3]
    assert row[-2] == pytest.approx(np.log(row[0]), abs=0.0)
    with pytest.raises(ConfigurationError, match="precompute"):
        precompute_element_data(u[0], gas, "none")


def test_overintegration_at_p_equals_weak(gas):
    setup = lgl_setup(gas, dims=(2, 2), overint_degree=3)
    u = random_field(setup, gas, seed=10, amp=0.5)
    r_w = rhs(u, setup, RhsConfig(volume_scheme="weak", surface_flux="llf"))
    cfg = RhsConfig(volume_scheme="overintegration", overint_degree=3, surface_flux="llf")
    assert np.abs(rhs(u, setup, cfg) - r_w).max() < 1e-14


def test_overintegration_dealiases_exactly(gas):
    # q = 2p integrates every flux product the projection can see; the
    # round trip back to the p grid must not disturb a degree-p field
    setup = lgl_setup(gas, overint_degree=6)
    op_q, transfer, metrics_q = setup.overint
    u = random_field(setup, gas, seed=11, amp=0.3)
    got = volume_overintegration(u[0], setup.op, transfer, metrics_q, gas)
    assert got.shape == u[0].shape
    assert np.isfinite(got).all()


# --- volume term structure ---------------------------------------------------


def test_weak_volume_constant_state_lives_on_boundary(gas):
    setup = lgl_setup(gas)
    u = constant_field(setup, gas)
    terms = element_metrics(setup.metrics, 0)
    vol = volume_weak(u[0], setup.op, terms, gas)
    strong = volume_strong(u[0], setup.op, terms, gas)
    # strong derivative of a constant flux is zero; the weak form keeps the
    # boundary part of the summation-by-parts identity
    assert np.abs(strong).max() < 1e-13
    p1 = setup.op.n_nodes
    interior = [
        i
        for i in range(setup.n_nodes)
        if 0 < i % p1 < p1 - 1 and 0 < i // p1 < p1 - 1
    ]
    assert np.abs(vol[interior]).max() < 1e-13
    assert np.abs(vol).max() > 1e-3
    # assembled against the surface term it cancels
    r = rhs(u, setup, RhsConfig(volume_scheme="weak", surface_flux="llf"))
    assert np.abs(r).max() < 1e-12


def test_surface_subtract_own_vanishes_for_constant(gas):
    setup = lgl_setup(gas, dims=(3, 3), amplitude=0.12)
    u = constant_field(setup, gas)
    bare = surface_terms(u, setup, "ranocha")
    corrected = surface_terms(u, setup, "ranocha", subtract_own=True)
    assert np.abs(bare).max() > 1e-3
    assert np.abs(corrected).max() < 1e-13


# --- entropy projection ------------------------------------------------------


def test_entropy_projection_identity_on_lobatto(gas):
    op = make_operator(3, "lgl")
    setup = lgl_setup(gas)
    u = random_field(setup, gas, seed=12, amp=0.3)[0]
    stacked = entropy_projection(u, op, gas)
    nn = u.shape[0]
    p1 = op.n_nodes
    fn = p1 ** (setup.d - 1)
    assert stacked.shape == (nn + 2 * setup.d * fn, setup.d + 2)
    assert np.array_equal(stacked[:nn], u)
    # boundary interpolation picks off Lobatto face nodes, so projection
    # reduces to an entropy-variable round trip there
    lines = node_lines(p1, setup.d)[0]
    face = stacked[stacked_face_block(nn, fn, 0, 1)]
    assert np.abs(face - u[lines[:, -1]]).max() < 1e-11


def test_entropy_projection_preserves_constants(gas):
    op = make_operator(3, "gauss")
    setup = gauss_setup(gas)
    u = constant_field(setup, gas)[0]
    stacked = entropy_projection(u, op, gas)
    assert np.abs(stacked - u[0]).max() < 1e-12


def test_entropy_projection_reports_bad_face_state(gas):
    # every node admissible, but the oscillation is wild enough that the
    # interpolated entropy variables leave the admissible set at a face;
    # the error names direction and side
    setup = gauss_setup(gas)
    u = random_field(setup, gas, seed=0, amp=1.0)
    with pytest.raises(AdmissibilityError, match=r"face state \(direction"):
        for e in range(setup.n_elements):
            entropy_projection(u[e], setup.op, gas)


def test_rhs_admissibility_gate_names_location(gas):
    setup = lgl_setup(gas)
    u = constant_field(setup, gas)
    u[1, 2, -1] = 0.01  # energy below kinetic: negative pressure
    with pytest.raises(AdmissibilityError, match="element 1, node 2"):
        rhs(u, setup, RhsConfig())


# --- evaluation counting -----------------------------------------------------


def test_volume_evaluation_counts(gas):
    p = 3
    q = 5
    d = 2
    setup = lgl_setup(gas, d=d, p=p, overint_degree=q)
    u = random_field(setup, gas, seed=13, amp=0.4)
    terms = element_metrics(setup.metrics, 0)
    nn = (p + 1) ** d

    c = FluxCounter()
    with count_guard(c):
        volume_strong(u[0], setup.op, terms, gas)
    assert c.one_point_evals == d * nn
    assert c.two_point_evals == 0

    c = FluxCounter()
    with count_guard(c):
        volume_weak(u[0], setup.op, terms, gas)
    assert c.one_point_evals == d * nn

    c = FluxCounter()
    with count_guard(c):
        volume_fluxdiff(u[0], setup.dsplit, terms, "ranocha", gas)
    assert c.two_point_evals == d * p * nn // 2
    assert c.logmean_evals == 2 * c.two_point_evals

    op_q, transfer, metrics_q = setup.overint
    c = FluxCounter()
    with count_guard(c):
        volume_overintegration(u[0], setup.op, transfer, metrics_q, gas)
    assert c.one_point_evals == d * (q + 1) ** d


def test_rhs_counter_argument(gas):
    setup = lgl_setup(gas)
    u = random_field(setup, gas, seed=14, amp=0.4)
    c = FluxCounter()
    rhs(u, setup, RhsConfig(), counter=c)
    p, d = 3, 2
    per_elem = d * p * (p + 1) ** d // 2
    n_faces = setup.n_elements * d * (p + 1) ** (d - 1)
    assert c.two_point_evals == setup.n_elements * per_elem + n_faces


# --- functionals -------------------------------------------------------------


def test_conserved_totals_constant_field(gas):
    setup = lgl_setup(gas, dims=(3, 2))
    u = constant_field(setup, gas)
    totals = conserved_totals(u, setup)
    assert np.abs(totals - 100.0 * u[0, 0]).max() < 1e-10


def test_error_norm_l2_constant_offset(gas):
    setup = lgl_setup(gas, dims=(3, 2))
    u = constant_field(setup, gas)
    shifted = u.copy()
    shifted[..., 0] += 0.25
    err = error_norm_l2(shifted, u, setup)
    assert err[0] == pytest.approx(0.25 * 10.0, rel=1e-12)
    assert np.abs(err[1:]).max() == 0.0


def test_entropy_rate_zero_field(gas):
    setup = lgl_setup(gas)
    u = constant_field(setup, gas)
    total, normalized = entropy_rate(u, np.zeros_like(u), setup)
    assert total == 0.0
    assert normalized == 0.0


def test_entropy_rate_sign_of_dissipative_flux(gas):
    # llf interface dissipation can only destroy entropy
    setup = lgl_setup(gas, dims=(3, 3), amplitude=0.1)
    u = random_field(setup, gas, seed=15, amp=0.3)
    r_ec = rhs(u, setup, RhsConfig())
    r_diss = rhs(u, setup, RhsConfig(surface_flux="llf"))
    total_ec, _ = entropy_rate(u, r_ec, setup)
    total_diss, _ = entropy_rate(u, r_diss, setup)
    assert abs(total_ec) < 1e-13
    assert total_diss < -1e-10
