"""Tests for experiment configs, runners and the acceptance suite."""

import json

import pytest

from entropylab.app.core.exceptions import ScaleException, ValidationException
from entropylab.app.schemas.experiments import (
    CjBandConfig,
    EntropyOracleConfig,
    EnvelopeConfig,
    KuhnConfig,
    PartitionFuzzConfig,
    SchuttBandConfig,
    SequenceSpec,
    SlopeConfig,
    SumopNormConfig,
    TreeGenConfig,
    parse_experiment,
)
from entropylab.app.tasks import acceptance as acceptance_module
from entropylab.app.tasks.acceptance import acceptance, run_criterion
from entropylab.app.tasks.experiments import cell_seed, run_experiment
from entropylab.app.tasks.pool import map_cells


class TestParseExperiment:
    """Test config validation."""

    def test_dict(self):
        """Test a dict selects the config class by kind."""
        config = parse_experiment({"kind": "kuhn", "seed": 5})
        assert isinstance(config, KuhnConfig)
        assert config.seed == 5

    def test_json_text(self):
        """Test JSON text is accepted."""
        config = parse_experiment('{"kind": "entropy-oracle", "matrix": [[1.0, 0.0]]}')
        assert isinstance(config, EntropyOracleConfig)
        assert config.p == "inf"

    def test_exponent_spelling(self):
        """Test every spelling of infinity is stored as "inf"."""
        config = EntropyOracleConfig(matrix=[[1.0]], p="Infinity", q=2)
        assert config.p == "inf"
        assert config.q == 2.0

    def test_names_offending_field(self):
        """Test an out-of-range mesh is reported with its field."""
        with pytest.raises(ValidationException) as exc:
            parse_experiment({"kind": "entropy-oracle", "matrix": [[1.0]], "mesh": 2.0})
        assert exc.value.field.endswith("mesh")

    @pytest.mark.parametrize(
        "data",
        [
            {"kind": "cantor"},
            {"kind": "kuhn", "colour": "red"},
            {"kind": "entropy-oracle", "matrix": [[1.0], [1.0, 2.0]]},
            {"kind": "entropy-oracle", "matrix": [[1.0]], "p": 0.5},
            {"kind": "cj-band", "j_min": 5, "j_max": 3},
            {"kind": "envelope", "start": 10, "stop": 6},
            {"kind": "kuhn", "seed": -1},
        ],
    )
    def test_invalid(self, data):
        """Test unknown kinds, extra fields and inconsistent values are refused."""
        with pytest.raises(ValidationException):
            parse_experiment(data)


class TestRunExperiment:
    """Test the runners and their artifacts."""

    def test_entropy_oracle_outputs(self, tmp_path, settings):
        """Test results.csv, report.json and meta.json are written."""
        config = EntropyOracleConfig(matrix=[[1.0]], ks=[1, 2, 3], mesh=0.05, seed=9)
        result = run_experiment(config, out_dir=tmp_path, settings=settings)
        assert result.passed
        assert (tmp_path / "results.csv").read_text().splitlines()[0] == "k,lower,upper,width,method"
        meta = json.loads((tmp_path / "meta.json").read_text())
        assert meta["config"]["seed"] == 9
        assert {"entropylab", "numpy", "scipy", "pandas", "python"} <= set(meta["versions"])
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["kind"] == "entropy-oracle"

    def test_no_output_dir(self, settings):
        """Test nothing is written without an output directory."""
        result = run_experiment(KuhnConfig(), settings=settings)
        assert result.files == []

    def test_kuhn_geometric(self, settings):
        """Test the geometric closed form and its doubling constant."""
        config = KuhnConfig(sequence=SequenceSpec(type="geometric", ratio=0.5), doubling_n=16)
        result = run_experiment(config, settings=settings)
        assert result.passed
        assert result.report["max_relative_error"] <= 1e-12
        assert result.report["expected_doubling"] == pytest.approx(2.0**16)

    def test_tree_gen_writes_tree(self, tmp_path, settings):
        """Test the generated tree is saved next to the level table."""
        result = run_experiment(TreeGenConfig(depth=4), out_dir=tmp_path, settings=settings)
        assert result.passed
        assert result.table["vertices"].tolist() == [1, 2, 4, 8, 16]
        assert len((tmp_path / "tree.txt").read_text().splitlines()) == 31

    def test_partition_fuzz(self, settings):
        """Test a small fuzz campaign passes."""
        result = run_experiment(PartitionFuzzConfig(trees=4, max_vertices=200), settings=settings)
        assert result.passed
        assert result.report["failures"] == 0

    def test_sumop_norm(self, settings):
        """Test ascent estimates agree with exact norms on small trees."""
        result = run_experiment(SumopNormConfig(trees=3, max_vertices=16), settings=settings)
        assert result.passed, result.report
        assert len(result.table) == 12

    def test_cj_band(self, settings):
        """Test the default case-1 weights stay within the band."""
        result = run_experiment(CjBandConfig(j_max=5, extra_depth=3), settings=settings)
        assert result.passed
        assert result.table["j"].tolist() == [2, 3, 4, 5]

    def test_envelope_grid(self, settings):
        """Test the dyadic grid from 2^6 to 2^24."""
        result = run_experiment(EnvelopeConfig(), settings=settings)
        assert len(result.table) == 19
        assert result.table["n"].iloc[0] == 64.0

    def test_slope(self, settings):
        """Test the fitted slope of the default envelope matches its coded exponent."""
        result = run_experiment(SlopeConfig(), settings=settings)
        assert result.passed
        assert result.report["power_error"] <= 0.05

    def test_schutt_band_failure(self, settings):
        """Test a band of 1 cannot hold."""
        config = SchuttBandConfig(dims=[2], exponents=[2.0], ks=[1, 2], mesh=0.25, band=1.0)
        assert not run_experiment(config, settings=settings).passed

    def test_deterministic_csv(self, settings):
        """Test the same seed gives byte-identical tables."""
        config = PartitionFuzzConfig(trees=3, max_vertices=100, seed=42)
        first = run_experiment(config, settings=settings).csv_body()
        second = run_experiment(config, settings=settings).csv_body()
        assert first == second

    def test_library_errors_propagate(self, settings):
        """Test a depth above the guard surfaces the library error."""
        with pytest.raises(ScaleException):
            run_experiment(TreeGenConfig(depth=31), settings=settings)


class TestCells:
    """Test seeding and the worker pool."""

    def test_cell_seeds(self):
        """Test cell seeds are reproducible and distinct."""
        assert cell_seed(1, 0) == cell_seed(1, 0)
        assert len({cell_seed(1, i) for i in range(100)}) == 100
        assert cell_seed(1, 0) != cell_seed(2, 0)

    def test_in_process_order(self):
        """Test results keep the cell order."""
        assert map_cells(abs, [-3, 1, -2]) == [3, 1, 2]

    def test_pool_order(self):
        """Test a process pool returns results in cell order."""
        assert map_cells(abs, [-3, 1, -2, -7], jobs=2) == [3, 1, 2, 7]


class TestAcceptance:
    """Test the acceptance suite driver."""

    def test_empty_suite_is_vacuous(self, settings):
        """Test an empty suite passes vacuously."""
        report = acceptance([], settings=settings)
        assert report.vacuous
        assert report.passed
        assert report.to_dict()["criteria"] == []

    def test_unknown_criterion(self, settings):
        """Test an unknown name is refused."""
        with pytest.raises(ValidationException):
            acceptance(["kuhn", "galaxy"], settings=settings)

    def test_cheap_criteria(self, settings):
        """Test the closed-form criteria pass."""
        report = acceptance(["kuhn", "envelopes", "growth"], settings=settings)
        assert report.passed, report.to_dict()
        assert [r.name for r in report.results] == ["kuhn", "envelopes", "growth"]

    def test_bound_calculus_criterion(self, settings):
        """Test the sum and composition criterion reports a nonnegative worst margin."""
        result = run_criterion("bound-calculus", acceptance_module.Context(settings=settings))
        assert result.passed, result.to_dict()
        assert result.details["min_margin"] >= 0.0

    def test_duplicate_names_run_once(self, settings):
        """Test a repeated name runs once."""
        report = acceptance(["kuhn", "kuhn"], settings=settings)
        assert len(report.results) == 1

    def test_library_error_fails_criterion(self, monkeypatch, settings):
        """Test a raising check is recorded as a failure with its error code."""

        def boom(ctx):
            raise ValidationException("bad input", field="x")

        monkeypatch.setitem(acceptance_module.CRITERIA, "boom", (boom, 1.0))
        result = run_criterion("boom", acceptance_module.Context(settings=settings))
        assert not result.passed
        assert result.error.startswith("VALIDATION_ERROR")
        assert result.to_dict()["details"]["error_code"] == "VALIDATION_ERROR"
