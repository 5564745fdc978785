"""Tests for the service layer result dictionaries and export helpers."""
import json

import numpy as np
import pytest

from core.averages import FORMULA_IDS
from core.config_manager import FORMULAS, ConfigManager
from core.errors import EXIT_INPUT, EXIT_OK
from services import AverageService, ExportService, MeasureService, VerifyService
from services.export_service import render_csv, render_records


class TestExport:

    def test_csv_header_and_floats(self):
        text = render_csv([{"a": 0.1, "b": True}], ["a", "b", "c"])
        assert text == "a,b,c\n0.1,true,\n"

    def test_records_keep_column_order(self):
        text = render_records([{"b": 2, "a": 1}], ["a", "b"])
        assert list(json.loads(text)) == ["a", "b"]

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            ExportService().render([], ["a"], "xml")

    def test_write_file(self, tmp_path):
        path = str(tmp_path / "rows.csv")
        result = ExportService().write([{"a": 1}], ["a"], "csv", path)
        assert result["success"]
        assert open(path, encoding="utf-8").read() == "a\n1\n"


class TestMeasureService:

    def test_table_cache_truncates(self):
        service = MeasureService(ConfigManager())
        big = service.get_table(8)
        small = service.get_table(4)
        assert small.n_max == 4
        assert small.a[2] == big.a[2]

    def test_error_becomes_result(self):
        config = ConfigManager()
        config.apply_overrides({"weight.family": "tabulated"})
        result = MeasureService(config).recurrence()
        assert not result["success"]
        assert result["exit_code"] == EXIT_INPUT


class TestAverageService:

    def test_required_degree(self):
        service = AverageService(ConfigManager())
        assert service.required_degree("product", 2, 3) == 4
        assert service.required_degree("two_point_product", 2, 3) == 5
        assert service.required_degree("inverse", 0, 0) == 1

    def test_compute_record(self):
        config = ConfigManager()
        config.apply_overrides({"shift.mu": ["3"], "shift.eps": ["2"]})
        result = AverageService(config).compute()
        assert result["success"]
        assert result["exit_code"] == EXIT_OK
        record = result["records"][0]
        assert record["mu"] == "3.0"
        assert record["K"] == 1 and record["M"] == 1


class TestFormulaDispatch:

    @pytest.mark.parametrize("formula", FORMULA_IDS)
    def test_every_formula_id_dispatches(self, formula):
        service = AverageService(ConfigManager())
        result = service.evaluate(formula, [3.0], [2.5], [2.0], 2)
        assert result.formula_id == formula
        assert np.isfinite(result.value)

    def test_config_accepts_exactly_the_formula_ids(self):
        assert FORMULAS == FORMULA_IDS


class TestVerifyService:

    def test_no_suite(self):
        result = VerifyService(ConfigManager()).run("none")
        assert result["success"]
        assert result["rows"] == []

    def test_transforms_rows(self):
        config = ConfigManager()
        messages = []
        result = VerifyService(config).run("transforms", progress_callback=messages.append)
        assert result["success"], result["message"]
        assert len(result["rows"]) == len(messages)
        assert {r["suite"] for r in result["rows"]} == {"transforms"}

    def test_averages_cover_acceptance_ranges(self, monkeypatch):
        from core import oracle
        calls = []
        original = oracle.brute_force_average

        def recording(measure, mu, eps, N, cfg):
            calls.append((len(mu), len(eps), N, tuple(mu)))
            return original(measure, mu, eps, N, cfg)

        monkeypatch.setattr(oracle, "brute_force_average", recording)
        result = VerifyService(ConfigManager()).run("averages")
        assert result["success"], result["message"]
        heine = {(N, mu[0]) for K, M, N, mu in calls if K == 1 and M == 0}
        assert {(N, 2.0 + 1.0j) for N in (1, 2, 3, 4)} <= heine
        assert (4, 10.0) in heine
        for case in ((1, 1, 1), (1, 1, 2), (2, 1, 2), (2, 2, 2), (2, 2, 3)):
            assert case in {c[:3] for c in calls}
        assert {N for K, M, N, _ in calls if K == 0 and M == 2} == {2, 3}
        products = {(K, N) for K, M, N, _ in calls if K >= 2 and M == 0}
        assert products == {(L, N) for L in (2, 3) for N in (1, 2, 3)}
