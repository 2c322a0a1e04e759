import numpy as np
import pytest

from ppf_dnn.exceptions import DatasetError, DistributionError, ShapeMismatchError
from ppf_dnn.models.enums import LoadRole
from ppf_dnn.models.inputs import (
    Beta,
    BusUncertainty,
    Constant,
    Normal,
    UncertaintySpec,
    Uniform,
    Weibull,
)
from ppf_dnn.powerflow import branch_flows, solve_power_flow
from ppf_dnn.sampling import (
    Normalizer,
    build_dataset,
    draw_samples,
    export_dataset_csv,
    load_dataset,
    save_dataset,
    solve_samples,
)
from ppf_dnn.sampling.dataset import base_start, check_failures, split_fractions, split_sizes


def _spec(n_bus, *entries):
    return UncertaintySpec(n_bus=n_bus, entries=list(entries))


class TestDrawSamples:

    def test_normal_moments(self):
        spec = _spec(1, BusUncertainty(bus=0, role=LoadRole.GENERATION, p=Normal(mean=1.0, std=0.1)))
        x = draw_samples(spec, 100_000, seed=1)
        assert abs(x[0].mean() - 1.0) < 0.002
        assert abs(x[0].std() - 0.1) < 0.002

    def test_zero_std_is_exact(self):
        spec = _spec(1, BusUncertainty(bus=0, role=LoadRole.GENERATION, p=Normal(mean=0.7, std=0.0)))
        x = draw_samples(spec, 50, seed=1)
        assert np.all(x[0] == 0.7)

    def test_same_seed_bit_identical(self, four_bus_spec):
        a = draw_samples(four_bus_spec, 200, seed=9)
        b = draw_samples(four_bus_spec, 200, seed=9)
        assert np.array_equal(a, b)

    def test_different_seed_differs(self, four_bus_spec):
        a = draw_samples(four_bus_spec, 20, seed=1)
        b = draw_samples(four_bus_spec, 20, seed=2)
        assert not np.array_equal(a, b)

    def test_prefix_stable(self, four_bus_spec):
        # a column depends only on seed and spec, not on how many were asked for
        short = draw_samples(four_bus_spec, 10, seed=4)
        long = draw_samples(four_bus_spec, 30, seed=4)
        assert np.array_equal(short, long[:, :10])

    def test_signs_and_rows(self):
        spec = _spec(
            2,
            BusUncertainty(bus=1, role=LoadRole.LOAD, p=Constant(value=0.4), q=Constant(value=0.1)),
            BusUncertainty(bus=1, role=LoadRole.GENERATION, p=Constant(value=0.25)),
        )
        x = draw_samples(spec, 3, seed=0)
        assert x.shape == (4, 3)
        assert np.allclose(x[1], -0.15)
        assert np.allclose(x[3], -0.1)
        assert np.all(x[0] == 0.0)

    def test_renewable_stand_ins(self):
        spec = _spec(
            2,
            BusUncertainty(bus=0, role=LoadRole.GENERATION, p=Beta(a=2.0, b=5.0, scale=0.3)),
            BusUncertainty(bus=1, role=LoadRole.GENERATION, p=Weibull(shape=2.0, scale=0.5)),
            BusUncertainty(bus=1, role=LoadRole.LOAD, q=Uniform(lo=0.1, hi=0.2)),
        )
        x = draw_samples(spec, 20_000, seed=5)
        assert np.all((x[0] >= 0) & (x[0] <= 0.3))
        assert abs(x[0].mean() - 0.3 * 2 / 7) < 0.005
        assert np.all(x[1] >= 0)
        assert np.all((x[3] <= -0.1) & (x[3] >= -0.2))

    def test_bad_parameters(self):
        spec = _spec(1, BusUncertainty(bus=0, p=Normal(mean=1.0, std=-0.1)))
        with pytest.raises(DistributionError):
            draw_samples(spec, 5, seed=0)

    def test_zero_count(self, four_bus_spec):
        with pytest.raises(DistributionError):
            draw_samples(four_bus_spec, 0, seed=0)

    def test_bus_out_of_range(self):
        with pytest.raises(ValueError):
            _spec(2, BusUncertainty(bus=2, p=Constant(value=0.1)))

    def test_from_case(self, four_bus):
        spec = UncertaintySpec.from_case(four_bus, 0.1)
        loads = [e for e in spec.entries if e.role == LoadRole.LOAD]
        assert {e.bus for e in loads} == {1, 2, 3}
        bus3 = next(e for e in loads if e.bus == 2)
        assert bus3.p.std == pytest.approx(0.06)
        # mean of the draws is the scheduled injection
        x = draw_samples(spec, 20_000, seed=0)
        p, q = four_bus.base_injections()
        assert np.allclose(x[:4].mean(axis=1), p, atol=0.003)

    def test_spec_json_round_trip(self, four_bus_spec):
        again = UncertaintySpec.model_validate_json(four_bus_spec.model_dump_json())
        assert again == four_bus_spec


class TestNormalizer:

    def test_population_std(self):
        norm = Normalizer.fit(np.array([[1.0, 2.0, 3.0]]))
        assert norm.mean[0] == 2.0
        assert norm.std[0] == pytest.approx(np.sqrt(2 / 3))
        assert np.allclose(norm.apply(np.array([[1.0, 2.0, 3.0]])), [[-1.2247449, 0.0, 1.2247449]])

    def test_constant_row(self):
        norm = Normalizer.fit(np.array([[5.0, 5.0, 5.0]]))
        assert norm.std[0] == 0.0
        assert bool(norm.degenerate[0])
        assert np.array_equal(norm.apply(np.array([[5.0, 5.0, 5.0]])), np.zeros((1, 3)))
        assert norm.apply(np.array([[6.0]]))[0, 0] == 1.0

    def test_constant_row_mean_exact(self):
        row = np.full((1, 7), 0.1)
        norm = Normalizer.fit(row)
        assert norm.mean[0] == 0.1

    def test_round_trip(self, rng):
        data = rng.normal(3.0, 2.0, size=(5, 40))
        data[2] = 1.5
        norm = Normalizer.fit(data)
        assert np.allclose(norm.invert(norm.apply(data)), data, rtol=0, atol=1e-12)

    def test_one_dimensional(self, rng):
        data = rng.normal(size=(3, 10))
        norm = Normalizer.fit(data)
        assert np.allclose(norm.apply(data[:, 0]), norm.apply(data)[:, 0])

    def test_empty(self):
        with pytest.raises(ValueError):
            Normalizer.fit(np.zeros((2, 0)))

    def test_dict_round_trip(self, rng):
        norm = Normalizer.fit(rng.normal(size=(3, 8)))
        again = Normalizer.from_dict(norm.to_dict())
        assert np.array_equal(again.mean, norm.mean)
        assert np.array_equal(again.std, norm.std)


class TestSplits:

    def test_counts_and_fractions(self):
        assert split_fractions((10000, 2000, 10000)) == pytest.approx((10 / 22, 2 / 22, 10 / 22))
        assert split_fractions((0.5, 0.25, 0.25)) == (0.5, 0.25, 0.25)

    def test_bad_split(self):
        with pytest.raises(ValueError):
            split_fractions((1, 0, 1))
        with pytest.raises(ValueError):
            split_fractions((1, 1))

    def test_sizes_cover_pool(self):
        assert split_sizes(22000, split_fractions((10000, 2000, 10000))) == (10000, 2000, 10000)
        assert sum(split_sizes(7, (0.5, 0.25, 0.25))) == 7
        assert split_sizes(1, (0.5, 0.25, 0.25)) == (1, 0, 0)


class TestDataset:

    def test_shapes(self, four_bus_dataset, four_bus):
        ds = four_bus_dataset
        assert ds.x.shape == (8, 60)
        assert ds.y.shape == (8, 60)
        assert ds.p_br.shape == (5, 60)
        assert ds.q_br.shape == (5, 60)
        assert (len(ds.train_idx), len(ds.val_idx), len(ds.test_idx)) == (40, 10, 10)
        assert ds.discarded == 0
        assert ds.case_name == "four-bus"

    def test_labels_are_solver_output(self, four_bus_dataset, four_bus):
        x, y, _, _ = four_bus_dataset.raw()
        k = 17
        sol = solve_power_flow(four_bus, x[:4, k], x[4:, k])
        assert np.allclose(y[:4, k], sol.v, atol=1e-12)
        assert np.allclose(y[4:, k], sol.theta, atol=1e-12)

    def test_flow_labels_consistent(self, four_bus_dataset, four_bus):
        _, y, p_br, q_br = four_bus_dataset.raw()
        flows = branch_flows(y[:4], y[4:], four_bus.branches)
        assert np.max(np.abs(flows.p_from - p_br)) <= 1e-10
        assert np.max(np.abs(flows.q_from - q_br)) <= 1e-10

    def test_normalizers_fit_on_training_only(self, four_bus_dataset):
        ds = four_bus_dataset
        train = ds.split("train")
        assert np.allclose(train.x[~ds.x_norm.degenerate].mean(axis=1), 0.0, atol=1e-12)
        assert np.allclose(train.x[~ds.x_norm.degenerate].std(axis=1), 1.0, atol=1e-12)
        test = ds.split("test")
        assert not np.allclose(test.x[~ds.x_norm.degenerate].mean(axis=1), 0.0, atol=1e-6)

    def test_constant_outputs_degenerate(self, four_bus_dataset):
        # slack angle, slack and pv magnitudes never move
        deg = four_bus_dataset.y_norm.degenerate
        assert deg[0] and deg[1] and deg[4]
        assert not deg[2]

    def test_single_sample(self, four_bus, four_bus_spec):
        ds = build_dataset(four_bus, four_bus_spec, 1, seed=0, split=(0.5, 0.25, 0.25))
        assert ds.n_samples == 1
        assert np.all(ds.x_norm.std == 0)
        assert np.all(ds.y == 0)

    def test_deterministic_across_workers(self, four_bus, four_bus_spec):
        a = build_dataset(four_bus, four_bus_spec, 30, seed=11, split=(20, 5, 5), workers=1)
        b = build_dataset(four_bus, four_bus_spec, 30, seed=11, split=(20, 5, 5), workers=4)
        assert np.array_equal(a.x, b.x)
        assert np.array_equal(a.y, b.y)
        assert np.array_equal(a.p_br, b.p_br)

    def test_warm_start_reaches_same_points(self, four_bus, four_bus_spec):
        flat = build_dataset(four_bus, four_bus_spec, 30, seed=5, split=(20, 5, 5))
        warm = build_dataset(four_bus, four_bus_spec, 30, seed=5, split=(20, 5, 5), warm_start=True)
        assert np.array_equal(flat.x, warm.x)
        np.testing.assert_allclose(
            warm.y_norm.invert(warm.y), flat.y_norm.invert(flat.y), rtol=0, atol=1e-7
        )

    def test_base_start_is_base_case(self, four_bus):
        v0, theta0 = base_start(four_bus)
        sol = solve_power_flow(four_bus, *four_bus.base_injections())
        assert np.array_equal(v0, sol.v)
        assert np.array_equal(theta0, sol.theta)
        v, theta, ok = solve_samples(
            four_bus, np.concatenate(four_bus.base_injections())[:, None], v0=v0, theta0=theta0
        )
        assert ok.all()
        np.testing.assert_allclose(v[:, 0], sol.v, rtol=0, atol=1e-9)

    def test_spec_bus_count_mismatch(self, four_bus, two_bus):
        spec = UncertaintySpec.from_case(two_bus)
        with pytest.raises(ShapeMismatchError):
            build_dataset(four_bus, spec, 5, seed=0)

    def test_too_many_failures(self, two_bus):
        spec = _spec(2, BusUncertainty(bus=1, p=Uniform(lo=0.3, hi=8.0)))
        with pytest.raises(DatasetError) as err:
            build_dataset(two_bus, spec, 40, seed=0, split=(0.5, 0.25, 0.25))
        assert err.value.total == 40
        assert err.value.failed > 0

    def test_save_load_round_trip(self, four_bus_dataset, tmp_path):
        save_dataset(four_bus_dataset, tmp_path / "ds")
        again = load_dataset(tmp_path / "ds")
        assert np.array_equal(again.x, four_bus_dataset.x)
        assert np.array_equal(again.q_br, four_bus_dataset.q_br)
        assert np.array_equal(again.y_norm.std, four_bus_dataset.y_norm.std)
        assert np.array_equal(again.test_idx, four_bus_dataset.test_idx)
        assert again.manifest() == four_bus_dataset.manifest()

    def test_csv_export(self, four_bus_dataset, tmp_path):
        paths = export_dataset_csv(four_bus_dataset, tmp_path)
        assert [p.name for p in paths] == ["x.csv", "y.csv", "p_br.csv", "q_br.csv"]
        lines = paths[1].read_text().splitlines()
        assert lines[0].startswith("v_0,v_1")
        assert len(lines) == 61

    def test_failure_budget(self):
        check_failures(0, 100)
        check_failures(1, 100)
        with pytest.raises(DatasetError):
            check_failures(2, 100)
