"""Orchestration: config validation, engine dispatch, artifacts on disk."""

import csv
import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from multising import (
    BinaryDataset,
    ConfigError,
    GroupedData,
    LaplaceNonConvergence,
    NumericalError,
    RunConfig,
    engine_chain,
    read_ppi_csv,
    run,
)
from multising.ab import AbConfig
from multising.fb import FbConfig
from multising.runners import ENGINES, _chain_seeds, write_chain_csv


def logit(p):
    return float(np.log(p) - np.log1p(-p))


@pytest.fixture
def data():
    rng = np.random.default_rng(14)
    return GroupedData(
        [
            BinaryDataset(rng.integers(0, 2, size=(25, 3)), f"g{x + 1}")
            for x in range(2)
        ]
    )


class TestRunConfig:
    @pytest.mark.parametrize(
        "kw, message",
        [
            ({"engine": "mc"}, "engine must be one of"),
            ({"iterations": 0}, "iterations must be positive"),
            ({"burn_in": 10, "iterations": 10}, "burn_in must lie"),
            ({"thin": 0}, "thin must be at least 1"),
            ({"chains": 0}, "chains must be at least 1"),
            ({"cutoff": 1.0}, "cutoff must lie"),
            ({"g": 0.0}, "g must be positive"),
            ({"rho": -1.0}, "rho must be positive"),
            ({"gamma": 0.0}, "gamma must be positive"),
            ({"sigma": 0.0}, "sigma must be positive"),
            ({"omega": 1.0}, "omega must lie"),
            ({"alpha": 0.0}, "alpha must be positive"),
            ({"nu_prop_b": -2.0}, "nu_prop_b must be positive"),
            ({"bern": 1.0}, "bern must lie"),
            ({"max_laplace_failure_rate": 1.5}, "max_laplace_failure_rate"),
        ],
    )
    def test_bad_values_rejected(self, kw, message):
        with pytest.raises(ConfigError, match=message):
            RunConfig(**kw).validate()

    def test_exact_engines_cap_p(self):
        RunConfig(engine="ab").validate(p=21)
        for engine in ("fb", "fbs"):
            with pytest.raises(ConfigError, match="p <= 20"):
                RunConfig(engine=engine).validate(p=21)

    def test_engines_constant(self):
        assert ENGINES == ("fb", "ab", "fbs", "abs")

    def test_burn_in_defaults_to_half(self):
        assert RunConfig(iterations=9).resolved_burn_in() == 4
        assert RunConfig(iterations=9, burn_in=2).resolved_burn_in() == 2

    def test_coupled_engines_sample_the_prior(self):
        cc = RunConfig(engine="fb", a=2.0, b=5.0).coupling_config(p=4)
        assert not cc.frozen
        assert cc.nu_fixed is None
        assert cc.hyper.a == 2.0 and cc.hyper.b == 5.0

    def test_uncoupled_engines_freeze_the_offsets(self):
        assert_allclose(
            RunConfig(engine="fbs").coupling_config(p=10).nu_fixed, logit(0.2)
        )
        assert_allclose(
            RunConfig(engine="abs").coupling_config(p=11).nu_fixed, logit(0.1)
        )
        assert_allclose(
            RunConfig(engine="fbs", bern=0.4).coupling_config(p=15).nu_fixed,
            logit(0.4),
        )
        assert RunConfig(engine="abs").coupling_config(p=5).frozen

    def test_engine_config_dispatch(self):
        fb = RunConfig(engine="fb", iterations=40, g=0.7).engine_config(3, seed=5)
        assert isinstance(fb, FbConfig)
        assert fb.g == 0.7 and fb.burn_in == 20 and fb.seed == 5
        ab = RunConfig(
            engine="ab", iterations=40, rho=3.0, record_lambda=True
        ).engine_config(3, seed=6)
        assert isinstance(ab, AbConfig)
        assert ab.rho == 3.0 and ab.record_lambda and ab.seed == 6


class TestEngineChain:
    def test_each_engine_runs(self, data):
        for engine in ENGINES:
            out = engine_chain(engine, data, iterations=30, burn_in=10, seed=1)
            assert out.engine in ("fb", "ab")
            assert out.delta_samples.shape == (30, 2, 3)

    def test_overrides_reach_the_engine(self, data):
        out = engine_chain(
            "fb", data, iterations=20, burn_in=5, seed=1, overrides={"g": 0.5}
        )
        assert out.meta["g"] == [0.5, 0.5]

    def test_uncoupled_variants_keep_offsets_fixed(self, data):
        out = engine_chain("fbs", data, iterations=20, burn_in=5, seed=1)
        assert_allclose(out.nu_samples, logit(0.2))
        assert not out.theta_samples.any()

    def test_bad_config_rejected_before_running(self, data):
        with pytest.raises(ConfigError):
            engine_chain("fb", data, iterations=10, burn_in=10, seed=1)


class TestChainSeeds:
    def test_distinct_and_reproducible(self):
        seeds = _chain_seeds(7, 4)
        assert len(set(seeds)) == 4
        assert seeds == _chain_seeds(7, 4)
        assert seeds != _chain_seeds(8, 4)


class TestRun:
    def config(self, **kw):
        base = dict(engine="fb", iterations=40, burn_in=10, seed=3, g=0.5)
        base.update(kw)
        return RunConfig(**base)

    def test_artifacts_written(self, data, tmp_path):
        result = run(self.config(), data, out_dir=tmp_path)
        expected = {
            "chain_1.csv",
            "ppi.csv",
            "theta_ppi.csv",
            "sec.csv",
            "selected_edges.csv",
            "summary.json",
        }
        assert {p.name for p in tmp_path.iterdir()} == expected
        assert set(result.paths) == {
            "chain_1",
            "ppi",
            "theta_ppi",
            "sec",
            "selected_edges",
            "summary",
        }
        with open(tmp_path / "summary.json") as fh:
            summary = json.load(fh)
        for key in (
            "config",
            "engine",
            "versions",
            "seeds",
            "acceptance",
            "ppi",
            "theta_ppi",
            "selected_edges",
            "sec",
            "expected_fdr",
            "convergence",
        ):
            assert key in summary
        assert summary["engine"] == "fb"
        assert summary["config"]["iterations"] == 40
        assert len(summary["seeds"]) == 1

    def test_repeat_runs_are_byte_identical(self, data, tmp_path):
        run(self.config(), data, out_dir=tmp_path / "one")
        run(self.config(), data, out_dir=tmp_path / "two")
        for name in ("ppi.csv", "chain_1.csv", "sec.csv"):
            assert (tmp_path / "one" / name).read_bytes() == (
                tmp_path / "two" / name
            ).read_bytes()

    def test_ppi_csv_round_trip(self, data, tmp_path):
        result = run(self.config(), data, out_dir=tmp_path)
        table = read_ppi_csv(tmp_path / "ppi.csv")
        assert table.group_labels == ["g1", "g2"]
        assert table.variables == ["v1", "v2", "v3"]
        assert_allclose(table.values, result.ppi_table.values)

    def test_chain_csv_layout(self, data, tmp_path):
        result = run(self.config(iterations=30, burn_in=6, thin=3), data, tmp_path)
        with open(tmp_path / "chain_1.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], rows[1:]
        assert header[0] == "iteration"
        assert header[1] == "delta.g1.2.1"
        assert "theta.1.2" in header and "epsilon.1.2" in header
        assert "nu.2.1" in header
        assert len(body) == result.chains[0].n_kept == 10
        assert len(header) == 1 + 2 * 3 + 1 + 1 + 3

    def test_lambda_columns_present_when_recorded(self, data, tmp_path):
        cfg = self.config(engine="ab", record_lambda=True)
        run(cfg, data, out_dir=tmp_path)
        with open(tmp_path / "chain_1.csv", newline="") as fh:
            header = next(csv.reader(fh))
        assert "lambda.g1.1.1" in header  # main effect: r == j
        assert "lambda.g2.3.2" in header  # interaction in canonical order
        assert len(header) == 1 + 6 + 1 + 1 + 3 + 2 * (3 + 3)

    def test_two_chains_report_convergence(self, data, tmp_path):
        cfg = self.config(chains=2, iterations=60, burn_in=20)
        result = run(cfg, data, out_dir=tmp_path, parallel=False)
        assert len(result.chains) == 2
        assert set(result.summary["convergence"]) == {"chain1-chain2"}
        assert (tmp_path / "chain_2.csv").exists()
        pooled = np.mean(
            [c.delta_accum / c.retained for c in result.chains], axis=0
        )
        assert_allclose(result.ppi_table.values, pooled)

    def test_parallel_chains_match_serial(self, data, tmp_path):
        cfg = self.config(chains=2, iterations=30, burn_in=10)
        serial = run(cfg, data, parallel=False)
        parallel = run(cfg, data, parallel=True)
        assert_allclose(
            serial.ppi_table.values, parallel.ppi_table.values
        )

    def test_laplace_failure_rate_guard(self, data, monkeypatch):
        def failing(y, hyper, delta):
            if np.asarray(delta).any():
                raise LaplaceNonConvergence("forced failure")
            return 0.0

        monkeypatch.setattr("multising.fb.log_marginal", failing)
        with pytest.raises(NumericalError, match="Laplace search failed"):
            run(self.config(), data)
        # Raising the tolerance turns the same run into an all-rejection chain.
        out = run(
            self.config(max_laplace_failure_rate=1.0), data
        ).chains[0]
        assert not out.delta_samples.any()

    def test_write_chain_csv_standalone(self, data, tmp_path):
        out = engine_chain("fb", data, iterations=10, burn_in=2, seed=0)
        path = tmp_path / "c.csv"
        write_chain_csv(out, path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 1 + out.n_kept
