import itertools

import numpy as np
import pytest

from polyfw.errors import (
    DegeneratePolytope,
    DimensionMismatch,
    InfeasiblePoint,
    UnknownVertexId,
)
from polyfw.geometry import (
    Polytope,
    active_index_set,
    active_index_set_of_vertex_set,
    enumerate_vertices,
    geometry_constants,
    lmo,
    polytope_from_json,
    probability_simplex,
    unit_box,
    unit_simplex,
)

from conftest import random_polytope


def as_set(V, tol=1e-8):
    return {tuple(np.round(v / tol) * tol) for v in V}


class TestEnumerateVertices:
    def test_unit_box_corners(self):
        V = unit_box(2).vertices
        assert as_set(V) == {(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)}

    def test_unit_simplex_r3(self):
        V = unit_simplex(3).vertices
        expect = {(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)}
        assert as_set(V) == {tuple(float(c) for c in v) for v in expect}

    def test_lexicographic_order(self):
        V = unit_box(2).vertices
        assert [tuple(np.round(v, 9)) for v in V] == sorted(
            tuple(np.round(v, 9)) for v in V
        )

    def test_random_polygon_matches_pairwise_intersection(self, rng):
        # Independent oracle: intersect every constraint pair, keep feasible.
        for _ in range(5):
            P = random_polytope(rng, 2, extra=1)  # 5 constraints in 2-D
            A, b = P.A, P.b
            brute = []
            for i, j in itertools.combinations(range(len(b)), 2):
                M = A[[i, j]]
                if abs(np.linalg.det(M)) < 1e-12:
                    continue
                x = np.linalg.solve(M, b[[i, j]])
                if np.all(A @ x <= b + 1e-9):
                    brute.append(x)
            assert as_set(P.vertices) == as_set(brute)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            Polytope(np.eye(2), np.ones(3))


class TestLMO:
    def test_probability_simplex_min_coordinate(self):
        P = probability_simplex(3)
        v, vid = lmo(P, np.array([3.0, 1.0, 2.0]))
        np.testing.assert_allclose(v, [0.0, 1.0, 0.0], atol=1e-12)
        assert vid == 1  # e2 in lexicographic order (0,0,1) < (0,1,0) < (1,0,0)

    def test_box_sign_pattern(self):
        v, _ = lmo(unit_box(2), np.array([-1.0, 2.0]))
        np.testing.assert_allclose(v, [1.0, 0.0], atol=1e-12)

    def test_matches_explicit_scan_on_random_polytopes(self, rng):
        for _ in range(5):
            P = random_polytope(rng, 3, extra=3)
            V = P.vertices
            for _ in range(100):
                g = rng.standard_normal(3)
                v, vid = lmo(P, g)
                vals = V @ g
                assert np.isclose(v @ g, vals.min())
                assert vid == int(np.argmin(vals))


class TestActiveIndexSets:
    def test_box_edge_point(self):
        P = unit_box(2)
        # rows: x1<=1 (0), x2<=1 (1), -x1<=0 (2), -x2<=0 (3)
        assert active_index_set(P, np.array([1.0, 0.5])) == {0}

    def test_simplex_vertex(self):
        P = unit_simplex(3)
        # rows: -x1,-x2,-x3 (0..2), sum<=1 (3)
        assert active_index_set(P, np.array([1.0, 0.0, 0.0])) == {1, 2, 3}

    def test_infeasible_point_raises(self):
        with pytest.raises(InfeasiblePoint):
            active_index_set(unit_box(2), np.array([1.5, 0.5]))

    def test_vertex_set_singleton(self, rng):
        P = random_polytope(rng, 2, extra=2)
        for vid in range(len(P.vertices)):
            assert active_index_set_of_vertex_set(P, [vid]) == active_index_set(
                P, P.vertex(vid)
            )

    def test_box_bottom_edge(self):
        P = unit_box(2)
        ids = {i for i, v in enumerate(P.vertices) if abs(v[1]) < 1e-12}
        assert active_index_set_of_vertex_set(P, ids) == {3}

    def test_empty_vertex_set_raises(self):
        with pytest.raises(UnknownVertexId):
            active_index_set_of_vertex_set(unit_box(2), [])

    def test_index_set_of_convex_combination(self, rng):
        # I(x) = I(U) for x = sum alpha_v v with all alpha_v > 0.
        checked = 0
        while checked < 100:
            P = random_polytope(rng, 3, extra=rng.integers(0, 4))
            n_v = len(P.vertices)
            k = int(rng.integers(1, min(n_v, 4) + 1))
            ids = rng.choice(n_v, size=k, replace=False)
            alpha = rng.dirichlet(np.ones(k))
            if alpha.min() < 1e-3:
                continue
            x = alpha @ P.vertices[ids]
            assert active_index_set(P, x) == active_index_set_of_vertex_set(P, ids)
            checked += 1


class TestGeometryConstants:
    def test_unit_box(self):
        geo = geometry_constants(unit_box(2))
        assert geo.N == 4
        assert np.isclose(geo.D, np.sqrt(2))
        assert np.isclose(geo.zeta, 1.0)
        assert np.isclose(geo.phi, 1.0)
        assert np.isclose(geo.omega, 1.0)

    def test_unit_simplex_r2(self):
        geo = geometry_constants(unit_simplex(2))
        assert np.isclose(geo.D, np.sqrt(2))
        assert np.isclose(geo.zeta, 1.0)
        assert np.isclose(geo.phi, np.sqrt(2))
        assert np.isclose(geo.omega, 1.0 / np.sqrt(2))

    def test_scaling_b_doubles_zeta_only(self):
        g1 = geometry_constants(unit_box(2))
        g2 = geometry_constants(unit_box(2, scale=2.0))
        assert np.isclose(g2.zeta, 2.0 * g1.zeta)
        assert np.isclose(g2.phi, g1.phi)

    def test_shuffled_vertex_order_gives_identical_values(self, rng):
        P = random_polytope(rng, 3, extra=2)
        geo = geometry_constants(P)
        perm = rng.permutation(len(P.vertices))
        shuffled = Polytope(P.A, P.b, vertices=P.vertices[perm])
        geo2 = geometry_constants(shuffled)
        assert geo2.zeta == geo.zeta
        assert geo2.phi == geo.phi
        assert geo2.D == geo.D

    def test_degenerate_all_active(self):
        P = Polytope([[1.0], [-1.0]], [0.0, 0.0])  # the single point {0}
        with pytest.raises(DegeneratePolytope):
            geometry_constants(P)

    def test_zeta_is_a_lower_bound_on_inspected_slacks(self, rng):
        P = random_polytope(rng, 2, extra=3)
        geo = geometry_constants(P)
        slacks = P.b[None, :] - P.vertices @ P.A.T
        assert np.isclose(geo.zeta, slacks[slacks > 1e-9 * (1 + abs(P.b))].min())


class TestFeasibilityOfOutputs:
    def test_all_vertices_feasible(self, rng):
        for _ in range(10):
            P = random_polytope(rng, int(rng.integers(2, 5)), extra=int(rng.integers(0, 5)))
            assert np.all(P.vertices @ P.A.T <= P.b + 1e-8)


class TestJSON:
    def test_presets(self):
        P = polytope_from_json({"preset": "box", "dim": 2, "scale": 1.0})
        assert as_set(P.vertices) == as_set(unit_box(2).vertices)
        S = polytope_from_json({"preset": "simplex", "dim": 3})
        assert len(S.vertices) == 4

    def test_explicit_h_form(self):
        P = polytope_from_json({"A": [[1.0], [-1.0]], "b": [1.0, 0.0]})
        assert as_set(P.vertices) == {(0.0,), (1.0,)}
