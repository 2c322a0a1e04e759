import json

import numpy as np
import pytest

from ppf_dnn.exceptions import NonConvergenceError, SingularJacobianError
from ppf_dnn.grid import Branch, build_ybus, parse_case
from ppf_dnn.powerflow import (
    BranchArrays,
    branch_flows,
    branch_sensitivities,
    bus_injections_from_flows,
    power_injection_derivatives,
    solve_power_flow,
)

from .conftest import FOUR_BUS, TWO_BUS


def _random_state(rng, n_bus, m):
    v = rng.uniform(0.9, 1.1, size=(n_bus, m))
    theta = rng.uniform(-0.3, 0.3, size=(n_bus, m))
    return v, theta


class TestSolver:

    def test_two_bus_closed_form(self, two_bus):
        p, q = two_bus.base_injections()
        sol = solve_power_flow(two_bus, p, q)
        assert sol.converged
        assert sol.theta[0] == 0.0
        assert sol.theta[1] == pytest.approx(-0.050084, abs=1e-6)
        assert sol.v[1] == pytest.approx(0.998746, abs=1e-6)
        # q balance gives V2 = cos(theta2), p balance 5 sin(2 theta2) = -0.5
        assert sol.v[1] == pytest.approx(np.cos(sol.theta[1]), abs=1e-8)
        assert 5 * np.sin(2 * sol.theta[1]) == pytest.approx(-0.5, abs=1e-8)

    def test_zero_injections_flat_solution(self):
        doc = json.loads(json.dumps(TWO_BUS))
        doc["buses"][1]["p_load_mw"] = 0.0
        case = parse_case(json.dumps(doc))
        sol = solve_power_flow(case, np.zeros(2), np.zeros(2))
        assert sol.iterations == 0
        assert np.array_equal(sol.v, case.v_setpoints())
        assert np.array_equal(sol.theta, np.zeros(2))

    def test_case30_base(self, case30):
        p, q = case30.base_injections()
        sol = solve_power_flow(case30, p, q)
        assert sol.converged
        assert sol.iterations <= 10
        assert sol.max_mismatch <= 1e-8
        assert sol.theta[case30.slack] == 0.0

    def test_case118_base(self, case118):
        # 118 buses sit under dense_limit; force the sparse path as well
        p, q = case118.base_injections()
        sol = solve_power_flow(case118, p, q)
        assert sol.converged
        assert sol.max_mismatch <= 1e-8
        assert sol.theta[case118.slack] == 0.0
        sparse = solve_power_flow(case118, p, q, dense_limit=0)
        assert np.allclose(sparse.v, sol.v, atol=1e-10)
        assert np.allclose(sparse.theta, sol.theta, atol=1e-10)

    def test_setpoints_held(self, four_bus):
        p, q = four_bus.base_injections()
        sol = solve_power_flow(four_bus, p, q)
        assert sol.v[0] == 1.02
        assert sol.v[1] == 1.01

    def test_deterministic(self, case30):
        p, q = case30.base_injections()
        a = solve_power_flow(case30, p, q)
        b = solve_power_flow(case30, p, q)
        assert np.array_equal(a.v, b.v)
        assert np.array_equal(a.theta, b.theta)

    def test_sparse_path_matches_dense(self, case30):
        p, q = case30.base_injections()
        dense = solve_power_flow(case30, p, q)
        sparse = solve_power_flow(case30, p, q, dense_limit=0)
        assert np.allclose(dense.v, sparse.v, atol=1e-10)
        assert np.allclose(dense.theta, sparse.theta, atol=1e-10)

    def test_warm_start(self, case30):
        p, q = case30.base_injections()
        cold = solve_power_flow(case30, p, q)
        warm = solve_power_flow(case30, p, q, v0=cold.v, theta0=cold.theta)
        assert warm.iterations <= 1
        assert np.allclose(warm.v, cold.v, atol=1e-9)

    def test_infeasible_load(self, two_bus):
        with pytest.raises((NonConvergenceError, SingularJacobianError)) as err:
            solve_power_flow(two_bus, np.array([0.0, -10.0]), np.zeros(2))
        if isinstance(err.value, NonConvergenceError):
            assert err.value.iterations <= 20
            assert err.value.max_mismatch > 1e-8
            assert err.value.solution is not None

    def test_kirchhoff_balance(self, case30):
        p, q = case30.base_injections()
        sol = solve_power_flow(case30, p, q)
        p_rec, q_rec = bus_injections_from_flows(sol.v, sol.theta, case30)
        pvpq = np.concatenate([case30.pv, case30.pq])
        assert np.max(np.abs(p_rec[pvpq] - p[pvpq])) <= 1e-8
        assert np.max(np.abs(q_rec[case30.pq] - q[case30.pq])) <= 1e-8

    def test_kirchhoff_balance_full_model(self):
        doc = json.loads(json.dumps(FOUR_BUS))
        doc["branches"][0]["tap"] = 0.97
        doc["branches"][2]["b_charge"] = 0.05
        case = parse_case(json.dumps(doc), simplified=False)
        p, q = case.base_injections()
        sol = solve_power_flow(case, p, q)
        p_rec, q_rec = bus_injections_from_flows(sol.v, sol.theta, case)
        assert np.max(np.abs(p_rec[1:] - p[1:])) <= 1e-8
        assert np.max(np.abs(q_rec[case.pq] - q[case.pq])) <= 1e-8

    def test_mismatch_reevaluated(self, four_bus):
        p, q = four_bus.base_injections()
        sol = solve_power_flow(four_bus, p, q)
        p_rec, q_rec = bus_injections_from_flows(sol.v, sol.theta, four_bus)
        pvpq = np.concatenate([four_bus.pv, four_bus.pq])
        worst = max(np.max(np.abs(p_rec[pvpq] - p[pvpq])), np.max(np.abs(q_rec[four_bus.pq] - q[four_bus.pq])))
        assert abs(worst - sol.max_mismatch) <= 1e-10

    def test_solution_csv(self, two_bus, tmp_path):
        p, q = two_bus.base_injections()
        sol = solve_power_flow(two_bus, p, q)
        path = sol.write_csv(tmp_path / "sol.csv", two_bus)
        lines = path.read_text().splitlines()
        assert lines[0] == "bus,v,theta"
        assert lines[2].startswith("2,")
        data = json.loads(sol.write_json(tmp_path / "sol.json", two_bus).read_text())
        assert data["converged"] is True
        assert data["buses"][1]["theta"] == sol.theta[1]


class TestBranchFlows:

    def test_zero_difference_zero_flow(self, two_bus):
        flows = branch_flows(np.ones(2), np.zeros(2), two_bus.branches)
        assert flows.p_from[0] == 0.0
        assert flows.q_from[0] == 0.0

    def test_hand_value(self):
        br = [Branch.create(0, 1, 0.01, 0.1)]
        flows = branch_flows(np.array([1.0, 0.98]), np.array([0.05, 0.0]), br)
        assert flows.p_from[0] == pytest.approx(0.50596, abs=1e-5)

    def test_losses_non_negative(self, case30, rng):
        v, theta = _random_state(rng, case30.n_bus, 200)
        flows = branch_flows(v, theta, case30.branches)
        assert np.all(flows.p_from + flows.p_to >= -1e-10)

    def test_batched_matches_single(self, four_bus, rng):
        v, theta = _random_state(rng, four_bus.n_bus, 5)
        batch = branch_flows(v, theta, four_bus.branches)
        single = branch_flows(v[:, 3], theta[:, 3], four_bus.branches)
        assert np.allclose(batch.q_to[:, 3], single.q_to, rtol=0, atol=1e-15)

    def test_pi_model_reduces_to_series(self, four_bus, rng):
        v, theta = _random_state(rng, four_bus.n_bus, 4)
        a = branch_flows(v, theta, four_bus.branches)
        b = branch_flows(v, theta, four_bus.branches, pi_model=True)
        assert np.allclose(a.p_from, b.p_from, atol=1e-14)
        assert np.allclose(a.q_to, b.q_to, atol=1e-14)


class TestSensitivities:

    def test_flat_point(self, four_bus):
        sens = branch_sensitivities(np.ones(4), np.zeros(4), four_bus.branches)
        br = BranchArrays.of(four_bus.branches)
        assert np.allclose(sens.dp_dtheta_i, -br.b)
        assert np.allclose(sens.dq_dtheta_i, -br.g)
        assert np.allclose(sens.dp_dv_i, br.g)
        assert np.allclose(sens.dq_dv_i, -br.b)

    def test_antisymmetry_exact(self, case30, rng):
        v, theta = _random_state(rng, case30.n_bus, 1000)
        sens = branch_sensitivities(v, theta, case30.branches)
        assert np.array_equal(sens.dp_dtheta_i, -sens.dp_dtheta_j)
        assert np.array_equal(sens.dq_dtheta_i, -sens.dq_dtheta_j)

    def test_matches_finite_differences(self, four_bus, rng):
        m, h = 1000, 1e-6
        v, theta = _random_state(rng, four_bus.n_bus, m)
        br = BranchArrays.of(four_bus.branches)
        sens = branch_sensitivities(v, theta, br)

        def fd(which, end):
            idx = br.f if end == "i" else br.t
            out_p = np.zeros((br.n, m))
            out_q = np.zeros((br.n, m))
            for k in range(br.n):
                vp, vm_, tp, tm = v.copy(), v.copy(), theta.copy(), theta.copy()
                if which == "v":
                    vp[idx[k]] += h
                    vm_[idx[k]] -= h
                else:
                    tp[idx[k]] += h
                    tm[idx[k]] -= h
                up = branch_flows(vp, tp, br)
                dn = branch_flows(vm_, tm, br)
                out_p[k] = (up.p_from[k] - dn.p_from[k]) / (2 * h)
                out_q[k] = (up.q_from[k] - dn.q_from[k]) / (2 * h)
            return out_p, out_q

        for which, end, p_an, q_an in (
            ("theta", "i", sens.dp_dtheta_i, sens.dq_dtheta_i),
            ("theta", "j", sens.dp_dtheta_j, sens.dq_dtheta_j),
            ("v", "i", sens.dp_dv_i, sens.dq_dv_i),
            ("v", "j", sens.dp_dv_j, sens.dq_dv_j),
        ):
            p_fd, q_fd = fd(which, end)
            assert np.allclose(p_an, p_fd, rtol=1e-6, atol=1e-8), (which, end)
            assert np.allclose(q_an, q_fd, rtol=1e-6, atol=1e-8), (which, end)

    def test_reduced_selections(self, four_bus, rng):
        v, theta = _random_state(rng, four_bus.n_bus, 3)
        full = branch_sensitivities(v, theta, four_bus.branches)
        angle = branch_sensitivities(v, theta, four_bus.branches, parts="angle")
        active = branch_sensitivities(v, theta, four_bus.branches, parts="angle_active")
        assert np.array_equal(angle.dq_dtheta_i, full.dq_dtheta_i)
        assert angle.dp_dv_i is None
        assert active.dq_dtheta_i is None
        assert np.array_equal(active.dp_dtheta_i, full.dp_dtheta_i)
        with pytest.raises(ValueError):
            branch_sensitivities(v, theta, four_bus.branches, parts="magnitude")

    def test_jacobian_composition(self, four_bus):
        # nr jacobian dP/dtheta at the solution equals aggregated branch sensitivities
        p, q = four_bus.base_injections()
        sol = solve_power_flow(four_bus, p, q)
        _, ds_dva = power_injection_derivatives(build_ybus(four_bus), sol.v, sol.theta)

        br = BranchArrays.of(four_bus.branches)
        rev = BranchArrays(f=br.t, t=br.f, g=br.g, b=br.b, tap=br.tap, b_charge=br.b_charge)
        fwd = branch_sensitivities(sol.v, sol.theta, br, parts="angle_active")
        back = branch_sensitivities(sol.v, sol.theta, rev, parts="angle_active")

        jac = np.zeros((4, 4))
        for k in range(br.n):
            f, t = br.f[k], br.t[k]
            jac[f, f] += fwd.dp_dtheta_i[k]
            jac[f, t] += fwd.dp_dtheta_j[k]
            jac[t, t] += back.dp_dtheta_i[k]
            jac[t, f] += back.dp_dtheta_j[k]
        assert np.allclose(ds_dva.toarray().real, jac, atol=1e-8)
