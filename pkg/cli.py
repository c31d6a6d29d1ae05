"""
Command-line front end: simulate, chain-compare, verify, pickands, tau

    python cli.py chain-compare --copula gaussian:rho=0.9 --lambdas 0.02,0.02 --periods 100
    python cli.py verify --copula '{"family": "GumbelHougaard", "theta": 3}'

Exit codes: 0 success, 2 configuration or domain error, 3 numerical failure.
Errors are reported on stderr as {"error": ..., "field": ...}.
"""
import argparse
import json
import logging
import re
import sys
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ValidationError

from chaining import chain_report, verify_self_chaining
from config import DEFAULT_LOG_LEVEL, DEFAULT_SEED, DEFAULT_WORKERS, configure_logging
from errors import ConfigError, DomainError, NumericalError
from extreme_value import (
    evaluate_pickands, kendall_tau_analytic, kendall_tau_empirical, pickands_for_spec
)
from models import (
    ChainReport, CommandName, OutputFormat, PickandsEvaluation, RunConfig, TauReport,
    VerificationReport
)
from numerics import RngStream, run_batches
from samplers import sample_copula, to_arrival_times, write_samples_csv
from utils import one_row_csv, pickands_csv, report_payload, to_canonical_json, write_output

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

# CLI flag (argparse dest) -> RunConfig field
_FLAG_FIELDS = {
    "copula": "copula",
    "lambdas": "lambdas",
    "periods": "N",
    "dt": "T",
    "scenarios": "scenarios",
    "seed": "seed",
    "workers": "workers",
    "out": "output_path",
    "format": "format",
    "arrival_times": "arrival_times",
    "grid_size": "grid_size",
}

# Commands whose natural output is a table
_CSV_BY_DEFAULT = {CommandName.SIMULATE.value, CommandName.PICKANDS.value}


def parse_copula(text: str) -> Dict[str, Any]:
    """
    Parse --copula as a JSON object or the inline form family[:key=value,...]

    Inline examples: "gumbel:theta=2", "mo:alpha1=0.2,alpha2=0.9",
    "gaussian:rho=0.9", "independence:dim=3". rho expands to a 2x2 matrix.
    """
    text = text.strip()
    if text.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"copula is not valid JSON: {e.msg}", "copula")
        if not isinstance(data, dict):
            raise ConfigError("copula JSON must be an object", "copula")
        return data

    family, _, params = text.partition(":")
    data: Dict[str, Any] = {"family": family}
    for item in filter(None, (p.strip() for p in params.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"expected key=value in copula parameters, got '{item}'", "copula")
        try:
            number = float(value)
        except ValueError:
            raise ConfigError(f"copula parameter {key} is not a number: '{value}'", "copula")
        key = key.strip()
        if key == "rho":
            data["corr"] = [[1.0, number], [number, 1.0]]
        elif key == "dim":
            data["dim"] = int(number)
        else:
            data[key] = number
    return data


def parse_lambdas(text: str) -> List[float]:
    """Comma-separated intensities, e.g. '0.02,0.02'"""
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"lambdas must be comma-separated numbers, got '{text}'", "lambdas")


def _load_config_file(path: str) -> Dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as e:
        raise ConfigError(f"cannot read config file: {e.strerror}", "config")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file is not valid JSON: {e.msg}", "config")
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object", "config")
    return data


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """
    Merge flags over the --config file over environment defaults

    Args:
        args: Parsed command line

    Returns:
        Validated RunConfig
    """
    values: Dict[str, Any] = _load_config_file(args.config) if args.config else {}
    values.pop("command", None)

    for dest, field in _FLAG_FIELDS.items():
        flag_value = getattr(args, dest, None)
        if flag_value is not None:
            values[field] = flag_value

    if isinstance(values.get("copula"), str):
        values["copula"] = parse_copula(values["copula"])
    if isinstance(values.get("lambdas"), str):
        values["lambdas"] = parse_lambdas(values["lambdas"])
    if "copula" not in values:
        raise ConfigError("a copula is required (--copula or the config file)", "copula")

    if args.command in _CSV_BY_DEFAULT:
        values.setdefault("format", OutputFormat.CSV.value)
    values.setdefault("seed", DEFAULT_SEED)
    values.setdefault("workers", DEFAULT_WORKERS)
    values["command"] = args.command
    return RunConfig.model_validate(values)


def _render(config: RunConfig, report: BaseModel) -> str:
    payload = report_payload(config, report)
    if config.format == OutputFormat.CSV:
        return one_row_csv(payload)
    return to_canonical_json(payload)


def _sample(config: RunConfig) -> np.ndarray:
    """config.scenarios copula draws, batched so the result ignores the worker count"""
    batches = run_batches(
        config.scenarios,
        RngStream(config.seed),
        lambda size, stream: sample_copula(config.copula, size, stream),
        workers=config.workers
    )
    return np.vstack(batches)


def cmd_chain_compare(config: RunConfig) -> ChainReport:
    """One-shot vs multi-step survival, analytic and simulated"""
    report = chain_report(
        config.model(), config.N, config.T, config.scenarios, RngStream(config.seed), config.workers
    )
    write_output(_render(config, report), config.output_path)
    return report


def cmd_verify(config: RunConfig) -> VerificationReport:
    """Axioms plus the three self-chaining characterizations"""
    report = verify_self_chaining(config.copula, RngStream(config.seed))
    write_output(_render(config, report), config.output_path)
    return report


def cmd_simulate(config: RunConfig) -> np.ndarray:
    """
    Copula samples, or arrival times with --arrival-times

    CSV rows are the samples themselves; JSON wraps them with the config.
    """
    rows = _sample(config)
    prefix = "u"
    if config.arrival_times:
        rows = to_arrival_times(rows, config.lambdas)
        prefix = "tau"

    if config.format == OutputFormat.CSV:
        write_samples_csv(config.output_path, rows, prefix)
    else:
        payload = {
            "config": config.model_dump(mode="json", exclude_none=True),
            "columns": [f"{prefix}{i + 1}" for i in range(rows.shape[1])],
            "rows": rows.tolist(),
        }
        write_output(to_canonical_json(payload), config.output_path)
    return rows


def cmd_pickands(config: RunConfig) -> PickandsEvaluation:
    """A(t) on a uniform grid; CSV is the (t, A) plotting hand-off"""
    pickands = pickands_for_spec(config.copula)
    if pickands is None:
        raise ConfigError(
            f"{config.copula.family.value} copula (dim {config.copula.dim}) has no Pickands function",
            "copula"
        )
    evaluation = evaluate_pickands(pickands, config.grid_size)
    if config.format == OutputFormat.CSV:
        write_output(pickands_csv(evaluation.t, evaluation.values), config.output_path)
    else:
        write_output(to_canonical_json(report_payload(config, evaluation)), config.output_path)
    return evaluation


def cmd_tau(config: RunConfig) -> TauReport:
    """Kendall's tau of the first two coordinates, empirical and closed form"""
    samples = _sample(config)
    report = TauReport(
        copula=config.copula,
        analytic=kendall_tau_analytic(config.copula),
        empirical=kendall_tau_empirical(samples[:, :2]),
        n_samples=config.scenarios,
        seed=config.seed
    )
    write_output(_render(config, report), config.output_path)
    return report


COMMANDS: Dict[CommandName, Callable[[RunConfig], Any]] = {
    CommandName.SIMULATE: cmd_simulate,
    CommandName.CHAIN_COMPARE: cmd_chain_compare,
    CommandName.VERIFY: cmd_verify,
    CommandName.PICKANDS: cmd_pickands,
    CommandName.TAU: cmd_tau,
}


_ARGUMENT_ERROR = re.compile(r"^argument (?:--)?([\w-]+)")


class CommandParser(argparse.ArgumentParser):
    """ArgumentParser that raises ConfigError instead of printing usage and exiting"""

    def error(self, message: str):
        match = _ARGUMENT_ERROR.match(message)
        field = None
        if match:
            dest = match.group(1).replace("-", "_")
            field = _FLAG_FIELDS.get(dest, dest)
        raise ConfigError(message, field)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    common.add_argument("--copula", help="JSON object or family[:key=value,...]")
    common.add_argument("--lambdas", help="Comma-separated intensities, one per coordinate")
    common.add_argument("--periods", help="Number of sub-periods N")
    common.add_argument("--dt", help="Sub-period length T")
    common.add_argument("--scenarios", help="Monte Carlo scenarios / sample size")
    common.add_argument("--seed", help="64-bit seed (default COPULA_SEED)")
    common.add_argument("--workers", help="Worker threads (default COPULA_WORKERS)")
    common.add_argument("--out", help="Output file; '-' or absent for stdout")
    common.add_argument("--format", choices=[f.value for f in OutputFormat])
    common.add_argument("--log-level", default=None, help=f"Logging level (default {DEFAULT_LOG_LEVEL})")

    parser = CommandParser(
        prog="cli.py",
        description="Copula-coupled exponential arrival times and self-chaining checks"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", parents=[common], help="Sample the copula")
    simulate.add_argument(
        "--arrival-times", dest="arrival_times", action="store_const", const=True, default=None,
        help="Emit arrival times -ln(U)/lambda instead of uniforms"
    )
    sub.add_parser("chain-compare", parents=[common], help="One-shot vs multi-step survival")
    sub.add_parser("verify", parents=[common], help="Certify self-chaining")
    pickands = sub.add_parser("pickands", parents=[common], help="Tabulate the Pickands function")
    pickands.add_argument("--grid-size", dest="grid_size", help="Number of t grid points")
    sub.add_parser("tau", parents=[common], help="Kendall's tau, empirical and analytic")
    return parser


def _report_error(message: str, field: Optional[str] = None) -> None:
    _write_error(ConfigError(message, field).to_dict())


def _write_error(payload: Dict[str, Any]) -> None:
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")


def _validation_field(error: ValidationError) -> Optional[str]:
    details = error.errors()
    if not details or not details[0].get("loc"):
        return None
    return ".".join(str(part) for part in details[0]["loc"])


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as e:
        _write_error(e.to_dict())
        return EXIT_CONFIG

    try:
        configure_logging(args.log_level)
    except ValueError as e:
        _report_error(str(e), "log_level")
        return EXIT_CONFIG

    try:
        config = resolve_config(args)
        logger.info("running %s with seed %d", config.command.value, config.seed)
        COMMANDS[config.command](config)
    except ValidationError as e:
        _report_error(e.errors()[0]["msg"] if e.errors() else str(e), _validation_field(e))
        return EXIT_CONFIG
    except ConfigError as e:
        _write_error(e.to_dict())
        return EXIT_CONFIG
    except DomainError as e:
        _report_error(str(e))
        return EXIT_CONFIG
    except NumericalError as e:
        _report_error(str(e))
        return EXIT_NUMERICAL
    except OSError as e:
        _report_error(f"cannot write output: {e.strerror}", "output_path")
        return EXIT_CONFIG

    logger.info("%s finished", config.command.value)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
