import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polyfw.frank_wolfe import (
    ActiveSet,
    away_fw_step,
    initial_active_set,
    run,
    standard_fw_step,
)
from polyfw.geometry import geometry_constants, lmo, unit_box, unit_simplex
from polyfw.objectives import QuadraticObjective, reference_solution
from polyfw.sampling import NoiseModel, SamplePlan


# unit_box(2) vertices in lexicographic order:
# 0 -> (0,0), 1 -> (0,1), 2 -> (1,0), 3 -> (1,1)
BOX = unit_box(2)


class TestActiveSet:
    def test_point_reconstruction(self):
        a = ActiveSet(BOX, {0: 0.5, 3: 0.5})
        np.testing.assert_allclose(a.point, [0.5, 0.5])

    def test_apply_fw_partial_step(self):
        a = ActiveSet(BOX, {0: 0.5, 3: 0.5})
        a.apply_fw(1, 0.2)
        assert a.weights == pytest.approx({0: 0.4, 3: 0.4, 1: 0.2})

    def test_apply_fw_full_step_collapses(self):
        a = ActiveSet(BOX, {0: 0.5, 3: 0.5})
        a.apply_fw(1, 1.0)
        assert a.weights == {1: 1.0}

    def test_apply_away_interior(self):
        # alpha_v = 0.25, gamma = 0.2: v gets 1.2*0.25 - 0.2 = 0.1.
        a = ActiveSet(BOX, {0: 0.25, 3: 0.75})
        a.apply_away(0, 0.2, at_max=False)
        assert a.weights == pytest.approx({0: 0.1, 3: 0.9})

    def test_apply_away_drop_renormalizes(self):
        a = ActiveSet(BOX, {0: 0.25, 1: 0.25, 3: 0.5})
        a.apply_away(3, 1.0, at_max=True)  # gamma_max = 0.5/0.5
        assert a.weights == pytest.approx({0: 0.5, 1: 0.5})
        a.validate()

    def test_purges_dust(self):
        a = ActiveSet(BOX, {0: 1.0 - 1e-14, 3: 1e-14})
        assert set(a.weights) == {0}
        assert a.weights[0] == 1.0

    def test_away_vertex_tie_breaks_to_smallest_id(self):
        a = ActiveSet(BOX, {1: 0.5, 2: 0.5})  # (0,1) and (1,0)
        vid, alpha = a.away_vertex(np.array([1.0, 1.0]))
        assert vid == 1 and alpha == 0.5

    def test_corrupt_mass_raises(self):
        with pytest.raises(ValueError):
            ActiveSet(BOX, {0: 0.1})

    @given(
        st.lists(
            st.tuples(st.integers(0, 3), st.floats(0.0, 1.0)),
            min_size=1,
            max_size=30,
        )
    )
    @settings(max_examples=100, deadline=None)
    def test_fw_updates_preserve_invariants(self, steps):
        a = ActiveSet(BOX, {0: 1.0})
        for s_id, gamma in steps:
            a.apply_fw(s_id, gamma)
        a.validate()
        assert np.all(BOX.A @ a.point <= BOX.b + 1e-9)


def test_initial_active_set_is_min_ones_vertex():
    a = initial_active_set(unit_simplex(3))
    assert list(a.weights.values()) == [1.0]
    _, vid = lmo(unit_simplex(3), np.ones(3))
    assert set(a.weights) == {vid}


class TestStandardStep:
    def test_gamma_formula(self):
        x = np.array([1.0, 1.0])
        g = np.array([1.0, 1.0])
        x2, info = standard_fw_step(x, g, BOX, epsilon=0.1, L=1.0, D=np.sqrt(2))
        assert info["gamma"] == pytest.approx(0.025)
        assert info["step_type"] == "fw"
        np.testing.assert_allclose(x2, 0.975 * x)

    def test_gamma_capped_at_one(self):
        x = np.array([1.0, 1.0])
        g = np.array([1.0, 1.0])
        x2, info = standard_fw_step(x, g, BOX, epsilon=10.0, L=1.0, D=1.0)
        assert info["gamma"] == 1.0 and info["step_type"] == "fw_max"
        np.testing.assert_allclose(x2, [0.0, 0.0])


class TestAwayStep:
    def test_singleton_takes_fw_branch(self):
        a = ActiveSet(BOX, {3: 1.0})
        new, info = away_fw_step(a, np.array([1.0, 1.0]), BOX, L=1.0)
        assert info["step_type"] == "fw_max"
        assert new.weights == {0: 1.0}

    def test_away_drop_case(self):
        a = ActiveSet(BOX, {0: 0.75, 3: 0.25})  # x = (0.25, 0.25)
        new, info = away_fw_step(a, np.array([1.0, 1.0]), BOX, L=1.0)
        assert info["step_type"] == "away_drop"
        assert info["gamma"] == pytest.approx(1.0 / 3.0)
        assert new.weights == {0: 1.0}

    def test_away_interior_case(self):
        # Same geometry with L = 10 keeps the step interior: gamma = 2/15.
        a = ActiveSet(BOX, {0: 0.75, 3: 0.25})
        new, info = away_fw_step(a, np.array([1.0, 1.0]), BOX, L=10.0)
        assert info["step_type"] == "away"
        assert info["gamma"] == pytest.approx(2.0 / 15.0)
        assert new.weights == pytest.approx({0: 0.85, 3: 0.15})

    def test_g_vs_is_nonnegative(self, rng):
        for _ in range(50):
            a = ActiveSet(BOX, {0: 0.3, 1: 0.3, 3: 0.4})
            _, info = away_fw_step(a, rng.standard_normal(2), BOX, L=5.0)
            assert info["g_vs"] >= 0.0


class TestRun:
    def problem(self):
        P = unit_simplex(3)
        obj = QuadraticObjective([1.0, 2.0, 3.0], z=[0.4, 0.3, 0.2])
        return obj, P

    def test_immediate_stop(self):
        obj, P = self.problem()
        trace = run("standard", obj, P, None, SamplePlan.exact(), 10.0, 50, None)
        assert trace.T_eps == 0
        assert len(trace.records) == 1
        assert trace.records[0].step_type is None
        assert trace.total_samples == 0

    def test_exact_standard_run_is_consistent(self):
        obj, P = self.problem()
        ref = reference_solution(obj, P)
        trace = run(
            "standard", obj, P, None, SamplePlan.exact(), 0.05, 10_000, None,
            check_invariants=True, collect_active_ids=True,
        )
        assert trace.T_eps is not None
        assert trace.final_gap <= 0.05
        gaps = [r.f_gap for r in trace.records]
        assert all(b <= a + 1e-12 for a, b in zip(gaps, gaps[1:]))
        # Recorded gaps match direct evaluation at the reconstructed iterates.
        for rec, (_, x) in zip(trace.records, trace.active_ids):
            assert abs(rec.f_gap - (obj.value(x) - ref.f_star)) <= 1e-12
        assert all(r.good_event for r in trace.records)  # exact gradients

    def test_exact_away_matches_independent_reimplementation(self):
        obj, P = self.problem()
        trace = run(
            "away", obj, P, None, SamplePlan.exact(), 1e-12, 20, None,
            collect_active_ids=True,
        )
        # Oracle: the away-step recursion on a dense weight vector.
        V = P.vertices
        L = obj.L
        _, vid0 = lmo(P, np.ones(3))
        alpha = np.zeros(len(V))
        alpha[vid0] = 1.0
        for ids, x in trace.active_ids:
            xo = alpha @ V
            assert np.linalg.norm(x - xo) <= 1e-12
            assert set(ids) == set(np.nonzero(alpha > 1e-12)[0])
            g = obj.gradient(xo)
            vals = V @ g
            s_id = int(np.argmin(vals))
            active = np.nonzero(alpha > 1e-12)[0]
            v_id = int(active[np.argmax(vals[active])])
            d_fw = V[s_id] - xo
            d_away = xo - V[v_id]
            if -g @ d_fw >= -g @ d_away:
                gamma = min(1.0, float(-g @ d_fw) / (L * d_fw @ d_fw))
                alpha *= 1.0 - gamma
                alpha[s_id] += gamma
            else:
                a_v = alpha[v_id]
                gamma_max = a_v / (1.0 - a_v)
                gamma = min(gamma_max, float(-g @ d_away) / (L * d_away @ d_away))
                alpha *= 1.0 + gamma
                alpha[v_id] = (1.0 + gamma) * a_v - gamma
            alpha[alpha <= 1e-12] = 0.0
            alpha /= alpha.sum()

    def test_max_iter_exhaustion(self):
        obj, P = self.problem()
        trace = run("standard", obj, P, None, SamplePlan.exact(), 1e-8, 3, None)
        assert trace.T_eps is None
        assert trace.records[-1].step_type is None
        assert trace.records[-1].k == 3

    def test_stochastic_run_counts_samples(self, rng):
        obj, P = self.problem()
        noise = NoiseModel.gaussian(0.1, 3)
        trace = run(
            "standard", obj, P, noise, SamplePlan.fixed(40), 0.1, 5000, rng,
            check_invariants=True,
        )
        steps = [r for r in trace.records if r.step_type is not None]
        assert trace.total_samples == 40 * len(steps)
        assert all(r.n_samples == 40 for r in steps)
        assert trace.T_eps is not None

    def test_good_event_flag_matches_threshold(self, rng):
        obj, P = self.problem()
        D = geometry_constants(P).D
        noise = NoiseModel.gaussian(0.5, 3)
        trace = run("standard", obj, P, noise, SamplePlan.fixed(5), 0.1, 200, rng)
        for r in trace.records:
            if r.step_type is not None:
                assert r.good_event == (r.grad_error <= 0.1 / (4.0 * D))

    def test_rejects_bad_arguments(self):
        obj, P = self.problem()
        with pytest.raises(ValueError):
            run("neither", obj, P, None, SamplePlan.exact(), 0.1, 10, None)
        with pytest.raises(ValueError):
            run("standard", obj, P, None, SamplePlan.exact(), -1.0, 10, None)
