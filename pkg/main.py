"""
阶梯楔形试验设计与分析命令行入口
日志配置、命令加载与 argparse 前端
"""

import argparse
import atexit
import logging
import sys
from pathlib import Path
from typing import List, Optional, TextIO

import structlog

from config.settings import Settings, get_settings, reload_settings
from core.command_registry import CommandRegistry, get_command_registry
from core.error_handler import ConfigurationError, SwcrtBaseException, get_error_handler
from core.output_writer import dumps_json, write_output


GLOBAL_OPTIONS = ("command", "config", "log_level", "log_format", "format", "precision", "output")


_log_file: Optional[TextIO] = None


def _log_sink(path: Optional[Path]) -> TextIO:
    """日志目标; 文件句柄只在路径变化时重开, 旧句柄随即关闭"""
    global _log_file
    if path is None:
        close_log_file()
        return sys.stderr
    if _log_file is None or _log_file.closed or Path(_log_file.name) != Path(path):
        close_log_file()
        _log_file = Path(path).open("a", encoding="utf-8")
    return _log_file


def close_log_file() -> None:
    global _log_file
    if _log_file is not None and not _log_file.closed:
        _log_file.close()
    _log_file = None


atexit.register(close_log_file)


def setup_logging(settings: Settings) -> None:
    """配置日志系统; 日志写到标准错误或文件, 标准输出只留给结果"""
    processors = [
        structlog.processors.TimeStamper(fmt="iso"),
        structlog.processors.add_log_level,
        structlog.processors.CallsiteParameterAdder(
            parameters=[structlog.processors.CallsiteParameter.FILENAME,
                        structlog.processors.CallsiteParameter.FUNC_NAME,
                        structlog.processors.CallsiteParameter.LINENO]
        ),
    ]

    if settings.logging.format == "json":
        processors.append(structlog.processors.JSONRenderer())
    elif settings.logging.format == "structured":
        processors.append(structlog.dev.ConsoleRenderer(colors=False))
    else:
        processors.append(structlog.processors.KeyValueRenderer())

    structlog.configure(
        processors=processors,
        wrapper_class=structlog.make_filtering_bound_logger(
            getattr(logging, settings.logging.level.upper(), logging.WARNING)
        ),
        logger_factory=structlog.WriteLoggerFactory(
            file=_log_sink(settings.logging.file_path)
        ),
        cache_logger_on_first_use=False,
    )


def load_commands() -> CommandRegistry:
    """导入命令模块 (导入即注册)"""
    from tools import analysis_tools, bias_tools, design_tools, power_tools, simulation_tools  # noqa: F401

    registry = get_command_registry()
    structlog.get_logger(__name__).debug("命令加载完成", **registry.get_registry_info())
    return registry


class _ArgumentParser(argparse.ArgumentParser):
    """参数错误转为 E_CONFIG 而非直接退出"""

    def error(self, message: str):
        raise ConfigurationError("arguments", None, message)


def build_parser(registry: CommandRegistry) -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="swcrt",
        allow_abbrev=False,
        description="阶梯楔形整群随机试验: 预期效应与暴露时间异质性的偏倚、功效与模拟",
    )
    parser.add_argument("--config", help="YAML/JSON 配置文件")
    parser.add_argument("--log-level", help="日志级别")
    parser.add_argument("--log-format", choices=["structured", "json", "simple"], help="日志格式")
    parser.add_argument("--format", choices=["csv", "json"], help="输出格式")
    parser.add_argument("--precision", help="有效数字位数或 full")
    parser.add_argument("--output", help="输出文件 (缺省为标准输出)")

    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    for name in registry.list_commands():
        command = registry.get_command(name)
        sub = subparsers.add_parser(
            name, help=command.metadata.description, description=command.metadata.description, allow_abbrev=False
        )
        command.add_arguments(sub)
    return parser


def _emit_error(error: SwcrtBaseException) -> int:
    """标准错误上输出一行 JSON 错误报告"""
    report = error.to_error_report().model_dump(mode="json")
    sys.stderr.write(dumps_json(report, indent=False).decode("utf-8") + "\n")
    sys.stderr.flush()
    return error.exit_status


def main(argv: Optional[List[str]] = None) -> int:
    """运行一个子命令并返回退出码"""
    setup_logging(get_settings())
    registry = load_commands()
    parser = build_parser(registry)
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise ConfigurationError("command", None, f"需要子命令, 可选 {sorted(registry.list_commands())}")

        settings = reload_settings(args.config) if args.config else get_settings()
        if args.log_level:
            settings.logging.level = args.log_level
        if args.log_format:
            settings.logging.format = args.log_format
        setup_logging(settings)

        fmt = args.format or settings.output.format
        precision = args.precision or settings.output.precision
        if precision != "full" and not precision.isdigit():
            raise ConfigurationError("precision", precision, "须为正整数或 full")

        arguments = {k: v for k, v in vars(args).items() if k not in GLOBAL_OPTIONS}
        output = registry.call_command(args.command, arguments)
        write_output(output, fmt, precision, args.output)
        return 0
    except SwcrtBaseException as e:
        return _emit_error(e)
    except Exception as e:
        return _emit_error(get_error_handler().to_domain_exception(e))


def cli_main() -> None:
    """CLI入口函数"""
    sys.exit(main())


if __name__ == "__main__":
    cli_main()
