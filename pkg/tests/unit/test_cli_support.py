"""
命令行支撑单元测试
参数解析、结果渲染与原子写入
"""

import argparse

import orjson
import pandas as pd
import pytest
import structlog

import main as main_module
from config.settings import get_settings
from core.command_registry import CommandOutput, add_model_arguments
from core.error_handler import ConfigurationError, DataIOError
from core.output_writer import atomic_write_text, render_csv, render_json, round_significant
from main import close_log_file, setup_logging
from modules.design.layout import build_standard_design, layout_to_json
from schemas.cli_models import CorrelationArgs, LayoutArgs, PowerArgs, TruthArgs
from tools.common import resolve_layout, resolve_params, resolve_truth

pytestmark = pytest.mark.unit


class TestResolveLayout:
    def test_standard_flag(self):
        layout = resolve_layout(LayoutArgs(standard="18,7,50"))
        assert (layout.I, layout.J, layout.K, layout.ell) == (18, 7, 50, 1)

    def test_inline_sizes(self):
        layout = resolve_layout(LayoutArgs(clusters=8, periods=5, cluster_size=3, ell=2))
        assert layout.n_sequences == 4 and layout.ell == 2

    def test_standard_conflicts_with_inline(self):
        with pytest.raises(ConfigurationError):
            resolve_layout(LayoutArgs(standard="18,7,50", clusters=12))

    def test_file_wins_when_consistent(self, tmp_path):
        path = tmp_path / "layout.json"
        path.write_text(layout_to_json(build_standard_design(8, 5, 3)), encoding="utf-8")
        layout = resolve_layout(LayoutArgs(layout=str(path), periods=5))
        assert layout.I == 8

    def test_file_conflict_is_error(self, tmp_path):
        path = tmp_path / "layout.json"
        path.write_text(layout_to_json(build_standard_design(8, 5, 3)), encoding="utf-8")
        with pytest.raises(ConfigurationError):
            resolve_layout(LayoutArgs(layout=str(path), standard="12,5,3"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataIOError):
            resolve_layout(LayoutArgs(layout=str(tmp_path / "absent.json")))

    def test_treatment_vector(self):
        layout = resolve_layout(LayoutArgs(design="0,1,1,0,0,1,0,1,1", periods=3, cluster_size=4))
        assert [(s.adopt, s.count) for s in layout.sequences] == [(2, 2), (3, 1)]

    def test_treatment_vector_needs_periods(self):
        with pytest.raises(ConfigurationError):
            resolve_layout(LayoutArgs(design="0,1,1", cluster_size=4))

    def test_nothing_given(self):
        with pytest.raises(ConfigurationError):
            resolve_layout(LayoutArgs())


class TestResolveParams:
    def test_planning_convention(self, planning_layout):
        params = resolve_params(CorrelationArgs(rho=0.1), planning_layout)
        assert params.tau_sq == pytest.approx(0.1 / 0.9)

    def test_variance_components(self, planning_layout):
        params = resolve_params(CorrelationArgs(tau_sq=0.2, sigma_sq=2.0), planning_layout)
        assert params.rho == pytest.approx(0.2 / 2.2)

    def test_exactly_one_source(self, planning_layout):
        with pytest.raises(ConfigurationError):
            resolve_params(CorrelationArgs(rho=0.1, tau_sq=0.2), planning_layout)
        with pytest.raises(ConfigurationError):
            resolve_params(CorrelationArgs(), planning_layout)


class TestResolveTruth:
    def test_constant_effect(self):
        truth = resolve_truth(TruthArgs(truth="hh-ant", effect=0.1, gamma=0.02), J=5)
        assert truth.effect == 0.1 and truth.gamma == 0.02

    def test_named_sinusoidal_curve(self):
        truth = resolve_truth(TruthArgs(truth="ETI", curve_name="sinusoidal", effect=0.12), J=9)
        assert truth.tate(9) == pytest.approx(0.12)

    def test_constant_curve_from_effect(self):
        truth = resolve_truth(TruthArgs(truth="ETI", effect=0.3), J=4)
        assert truth.effect_curve == [0.3, 0.3, 0.3]

    def test_curve_length_checked(self):
        with pytest.raises(ConfigurationError):
            resolve_truth(TruthArgs(truth="ETI", curve="0.1,0.2"), J=5)

    def test_anticipation_needs_anticipation_model(self):
        with pytest.raises(ConfigurationError):
            resolve_truth(TruthArgs(truth="HH", effect=0.1, gamma=0.2), J=5)

    def test_missing_effect(self):
        with pytest.raises(ConfigurationError):
            resolve_truth(TruthArgs(truth="HH"), J=5)


class TestRendering:
    @pytest.fixture
    def output(self):
        return CommandOutput(
            command="power",
            config={"model": "HH", "rho": 0.1},
            result={"power": 0.812345678, "se": 0.0123456789},
            table=pd.DataFrame({"rho": [0.1, 0.2], "mde": [0.123456789, 0.2]}),
        )

    def test_csv_header_echoes_config(self, output):
        lines = render_csv(output).splitlines()
        assert lines[0] == '# power config={"model":"HH","rho":0.1}'
        assert lines[1].startswith("# result=")
        assert lines[2] == "rho,mde"
        assert lines[3] == "0.1,0.123457"

    def test_full_precision(self, output):
        assert "0.123456789" in render_csv(output, "full")

    def test_scalar_result_as_single_row(self):
        output = CommandOutput(command="variance", config={}, result={"se": 0.5, "constants": {"U": 1}})
        lines = render_csv(output).splitlines()
        assert lines[1:] == ["se", "0.5"]

    def test_json_document(self, output):
        document = orjson.loads(render_json(output))
        assert document["command"] == "power"
        assert document["result"]["power"] == 0.812346
        assert document["table"][1] == {"rho": 0.2, "mde": 0.2}

    def test_round_significant_keeps_non_finite(self):
        assert round_significant({"a": [float("inf"), 1.23456789]}, "3") == {"a": [float("inf"), 1.23]}

    def test_atomic_write(self, tmp_path):
        target = tmp_path / "nested" / "out.csv"
        atomic_write_text(target, "a,b\n1,2\n")
        assert target.read_text(encoding="utf-8") == "a,b\n1,2\n"
        assert [p.name for p in target.parent.iterdir()] == ["out.csv"]

    def test_write_failure(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(DataIOError):
            atomic_write_text(blocker / "out.csv", "text")


class TestArgumentGeneration:
    def test_aliases_and_suppressed_defaults(self):
        parser = argparse.ArgumentParser()
        add_model_arguments(parser, PowerArgs)
        parsed = vars(parser.parse_args(["--model", "HH", "--I", "18", "--trt", "0.2", "--sigma_sq", "2"]))
        assert parsed == {"model": "HH", "clusters": 18, "effect": 0.2, "sigma_sq": 2.0}

    def test_list_fields_are_strings(self):
        parser = argparse.ArgumentParser()
        add_model_arguments(parser, TruthArgs)
        parsed = parser.parse_args(["--truth", "ETI", "--curve", "0.1,0.2"])
        assert TruthArgs(**vars(parsed)).curve == [0.1, 0.2]


class TestLogFile:
    """日志文件句柄的复用与关闭"""

    def test_handle_reused_then_closed(self, tmp_path):
        settings = get_settings()
        settings.logging.file_path = tmp_path / "swcrt.log"
        settings.logging.level = "INFO"

        setup_logging(settings)
        first = main_module._log_file
        setup_logging(settings)
        assert main_module._log_file is first
        assert not first.closed

        structlog.get_logger("swcrt.test").info("写入日志文件")
        close_log_file()
        assert first.closed
        assert main_module._log_file is None
        assert "写入日志文件" in settings.logging.file_path.read_text(encoding="utf-8")

    def test_switching_path_closes_previous(self, tmp_path):
        settings = get_settings()
        settings.logging.file_path = tmp_path / "a.log"
        setup_logging(settings)
        first = main_module._log_file

        settings.logging.file_path = tmp_path / "b.log"
        setup_logging(settings)
        assert first.closed
        assert main_module._log_file.name == str(tmp_path / "b.log")

        settings.logging.file_path = None
        setup_logging(settings)
        assert main_module._log_file is None
