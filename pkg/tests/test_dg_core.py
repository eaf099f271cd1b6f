import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adaptive_dg import dg_core
from adaptive_dg.mesh import build_mesh
from adaptive_dg.problems import unit_square_mesh

import oracles
from conftest import mesh_zoo

ZOO = mesh_zoo()


@pytest.fixture
def unit_edge_pair():
    """Two right triangles of area 1/2 sharing the unit edge x = 0."""
    return build_mesh([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)], [(0, 1, 2), (0, 2, 3)])


def test_interpolate_and_gradients(lshape):
    v = dg_core.interpolate(lambda x, y: 2.0 * x - 3.0 * y + 1.0, lshape)
    assert np.allclose(dg_core.element_gradients(v, lshape), [2.0, -3.0])


def test_as_dg_rejects_wrong_length(two_tri):
    with pytest.raises(ValueError):
        dg_core.as_dg(np.zeros(5), two_tri)


def test_jump_mean_of_linear_trace(two_tri):
    e = int(two_tri.interior_edges[0])
    tm, tp = two_tri.edge_triangles[e]
    a, b = two_tri.edges[e]
    v = np.zeros(6)
    tri_m = two_tri.triangles[tm].tolist()
    v[3 * tm + tri_m.index(a)] = 1.0
    v[3 * tm + tri_m.index(b)] = 3.0
    assert np.allclose(dg_core.jump_mean_projection(v, two_tri)[e], 2.0 * two_tri.normals[e])
    assert np.allclose(oracles.edge_mean_jump(two_tri, e, v), 2.0 * two_tri.normals[e])


@pytest.mark.parametrize("name, mesh", ZOO)
def test_constant_jumps(name, mesh):
    v = np.full(mesh.n_dofs, 2.5)
    pj = dg_core.jump_mean_projection(v, mesh)
    assert np.allclose(pj[mesh.interior_edges], 0.0, atol=1e-15)
    assert np.allclose(pj[mesh.boundary_edges], 2.5 * mesh.normals[mesh.boundary_edges])


@pytest.mark.parametrize("name, mesh", ZOO)
def test_jump_means_match_simpson_oracle(name, mesh):
    v = np.random.default_rng(3).standard_normal(mesh.n_dofs)
    pj = dg_core.jump_mean_projection(v, mesh)
    for e in range(mesh.n_edges):
        assert np.allclose(pj[e], oracles.edge_mean_jump(mesh, e, v), atol=1e-13)
    assert np.allclose(dg_core.jump_operator(mesh) @ v, dg_core.jump_means(v, mesh), atol=1e-15)


@pytest.mark.parametrize("name, mesh", ZOO)
def test_cr_functions_have_no_jump_means(name, mesh):
    c = np.random.default_rng(4).standard_normal(mesh.n_edges)
    c[mesh.is_boundary] = 0.0
    v = dg_core.cr_to_dg(c, mesh)
    assert dg_core.cr_space_defect(v, mesh) < 1e-14
    assert np.allclose(dg_core.midpoint_traces(v, mesh)[mesh.interior_edges, 0], c[mesh.interior_edges])


def test_lift_local_interior_example(unit_edge_pair):
    m = unit_edge_pair
    e = int(m.interior_edges[0])
    r = dg_core.lift_local(e, [1.0, 0.0], m)
    assert np.allclose(r, [[-1.0, 0.0], [-1.0, 0.0]], atol=1e-15)
    oracle = oracles.lift_by_mass_solve(m, {e: np.array([1.0, 0.0])})
    assert np.max(np.abs(r - oracle)) <= 1e-13


def test_lift_local_boundary_example(unit_edge_pair):
    m = unit_edge_pair
    # the edge (0,0)-(1,0) has length 1 and lies on the boundary
    e = next(i for i in m.boundary_edges if m.lengths[i] == 1.0
             and np.allclose(m.midpoints[i], [0.5, 0.0]))
    r = dg_core.lift_local(e, [1.0, 0.0], m)
    t = m.edge_triangles[e, 0]
    assert np.allclose(r[t], [-2.0, 0.0])
    assert np.allclose(np.delete(r, t, axis=0), 0.0)


def test_lift_of_zero_is_zero(lshape):
    assert np.all(dg_core.lift_local(0, [0.0, 0.0], lshape) == 0.0)
    assert np.all(dg_core.lift_global(np.zeros((lshape.n_edges, 2)), lshape) == 0.0)


@pytest.mark.parametrize("name, mesh", ZOO)
def test_lift_global_is_sum_of_local(name, mesh):
    w = np.random.default_rng(5).standard_normal((mesh.n_edges, 2))
    total = sum(dg_core.lift_local(e, w[e], mesh) for e in range(mesh.n_edges))
    assert np.allclose(dg_core.lift_global(w, mesh), total, atol=1e-14)
    single = np.zeros_like(w)
    single[1] = w[1]
    assert np.allclose(dg_core.lift_global(single, mesh), dg_core.lift_local(1, w[1], mesh))


def adjoint_defect(mesh, w):
    """max over basis fields tau of |int r(w).tau + sum_e int_e w.{tau}|."""
    r = dg_core.lift_global(w, mesh)
    worst = 0.0
    for t in range(mesh.n_triangles):
        for k in range(2):
            tau = np.zeros((mesh.n_triangles, 2))
            tau[t, k] = 1.0
            lhs = oracles.l2_inner_pwconst(mesh, r, tau)
            rhs = 0.0
            for e in range(mesh.n_edges):
                tm, tp = oracles.edge_sides(mesh, e)
                if tp is None:
                    avg = tau[tm]
                else:
                    avg = 0.5 * (tau[tm] + tau[tp])
                a, b = mesh.vertices[mesh.edges[e]]
                rhs -= oracles.simpson(lambda x: np.dot(w[e], avg), a, b)
            worst = max(worst, abs(lhs - rhs))
    return worst


@pytest.mark.parametrize("fixture", ["two_tri", "lshape"])
def test_lifting_adjoint_identity(fixture, request):
    mesh = request.getfixturevalue(fixture)
    rng = np.random.default_rng(6)
    for _ in range(5):
        assert adjoint_defect(mesh, rng.standard_normal((mesh.n_edges, 2))) <= 1e-13


def test_lift_closed_form_matches_mass_solve(two_tri):
    rng = np.random.default_rng(7)
    for e in range(two_tri.n_edges):
        w = rng.standard_normal(2)
        oracle = oracles.lift_by_mass_solve(two_tri, {e: w})
        assert np.max(np.abs(dg_core.lift_local(e, w, two_tri) - oracle)) <= 1e-13


def test_norm_1h_examples(two_tri, lshape):
    assert dg_core.norm_1h(np.zeros(6), two_tri) == 0.0
    c = 1.7
    nb = len(lshape.boundary_edges)
    assert dg_core.norm_1h(np.full(lshape.n_dofs, c), lshape) == pytest.approx(c * np.sqrt(nb))
    v = dg_core.interpolate(lambda x, y: x, two_tri)
    jumps = sum(np.sum(oracles.edge_mean_jump(two_tri, e, v) ** 2) for e in two_tri.boundary_edges)
    assert jumps == pytest.approx(1.5)  # edge means of x: 0, 1/2, 1, 1/2
    assert dg_core.norm_1h(v, two_tri) == pytest.approx(np.sqrt(1.0 + jumps), rel=1e-14)


def test_broken_h1_examples(two_tri):
    assert dg_core.broken_h1(np.full(6, 3.0), two_tri) == 0.0
    assert dg_core.broken_h1(dg_core.interpolate(lambda x, y: x, two_tri), two_tri) == pytest.approx(1.0)
    cr = np.random.default_rng(0).standard_normal(two_tri.n_edges)
    assert dg_core.broken_h1(cr, two_tri, space="cr") == pytest.approx(
        dg_core.broken_h1(dg_core.cr_to_dg(cr, two_tri), two_tri, space="dg"))


def test_broken_h1_of_sine_interpolant_approaches_exact():
    vals = []
    for n in (8, 16, 32):
        m = unit_square_mesh(n)
        v = dg_core.interpolate(lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y), m)
        vals.append(dg_core.broken_h1(v, m))
    errs = np.abs(np.array(vals) - np.pi / np.sqrt(2.0))
    assert errs[-1] < 5e-3 and errs[-1] < errs[0]


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 31 - 1), idx=st.integers(0, len(ZOO) - 1),
       scale=st.floats(-5, 5, allow_nan=False, allow_subnormal=False).filter(lambda s: s == 0 or abs(s) > 1e-100))
def test_norm_properties(seed, idx, scale):
    _, mesh = ZOO[idx]
    rng = np.random.default_rng(seed)
    u, v = rng.standard_normal((2, mesh.n_dofs))
    assert dg_core.norm_1h(scale * u, mesh) == pytest.approx(abs(scale) * dg_core.norm_1h(u, mesh),
                                                              rel=1e-12, abs=1e-300)
    assert dg_core.norm_1h(u + v, mesh) <= dg_core.norm_1h(u, mesh) + dg_core.norm_1h(v, mesh) + 1e-12
    assert dg_core.norm_1h(u, mesh) > 0
