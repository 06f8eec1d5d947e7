"""
Command-line entry point for the EGL toolkit.

    egl fit --dataset bladder --family egl
    egl compare --dataset bank
    egl eval --params 1,1,1 --which hazard --grid 0:10:101 --format csv
    egl sample --params 1,1,1 --n 1000 --seed 7 --method transform
    egl describe --params 0.936,0.5878,0.6457

Every report is wrapped in an envelope holding the toolkit version, the seed,
the dataset digest and the full run configuration.
"""

import argparse
import io
import json
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import ValidationError

from egl_toolkit import __version__
from egl_toolkit.core.config import settings
from egl_toolkit.core.exceptions import EXIT_DATA, EXIT_OK, DomainError, EGLError, UsageError
from egl_toolkit.models.dataset import Dataset
from egl_toolkit.models.distribution import FAMILY_PARAMETERS, EglParams, Family, SamplingMethod
from egl_toolkit.models.fitting import FitOptions, InformationMode
from egl_toolkit.models.run import Command, EvalQuantity, GridSpec, OutputFormat, ReportEnvelope, RunConfig
from egl_toolkit.services.datasets import dataset_service
from egl_toolkit.services.egl_core import EGLDistribution
from egl_toolkit.services.estimation import estimation_service
from egl_toolkit.services.gof import comparison_service, report_from_fit

logger = logging.getLogger(__name__)

# Families compared by default for each builtin dataset
DEFAULT_COMPARISON = {
    "bladder": [Family.EGL, Family.LINDLEY_EXPONENTIAL, Family.POWER_LINDLEY, Family.LINDLEY, Family.NGLD],
    "bank": list(Family),
}
DEFAULT_SAMPLE_SIZE = 100
DEFAULT_GRID = "0:10:101"


class ArgumentParser(argparse.ArgumentParser):
    """argparse parser that reports misuse as a UsageError."""

    def error(self, message: str):
        raise UsageError(message)


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="egl", description="Extended Generalized Lindley distribution toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    common = ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (default: EGL_DEFAULT_SEED)")
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--format", choices=[f.value for f in OutputFormat], default=settings.output_format)
    common.add_argument("--log-level", default=None, help="logging level (default: EGL_LOG_LEVEL)")

    source = ArgumentParser(add_help=False)
    source.add_argument("--dataset", default=None, help=f"builtin dataset: {', '.join(dataset_service.available())}")
    source.add_argument("--data", default=None, help="CSV or Excel file of observations")
    source.add_argument("--column", default=None, help="column name or index in --data")
    source.add_argument("--family", default=None, help="family tag(s), comma separated")
    source.add_argument("--level", type=float, default=settings.confidence_level, help="confidence level")
    source.add_argument(
        "--information",
        choices=[m.value for m in InformationMode],
        default=InformationMode.OBSERVED.value,
        help="information matrix behind the EGL covariance",
    )

    model = ArgumentParser(add_help=False)
    model.add_argument("--params", required=True, help="EGL parameters lambda,theta,alpha")

    subparsers.add_parser(Command.FIT.value, parents=[common, source], help="fit one family")
    subparsers.add_parser(Command.COMPARE.value, parents=[common, source], help="fit and rank several families")

    eval_parser = subparsers.add_parser(Command.EVAL.value, parents=[common, model], help="tabulate a function")
    eval_parser.add_argument("--which", choices=[q.value for q in EvalQuantity], default=EvalQuantity.PDF.value)
    eval_parser.add_argument("--grid", default=DEFAULT_GRID, help="start:stop:count")

    sample_parser = subparsers.add_parser(Command.SAMPLE.value, parents=[common, model], help="draw variates")
    sample_parser.add_argument("--n", type=int, default=DEFAULT_SAMPLE_SIZE)
    sample_parser.add_argument(
        "--method",
        choices=[m.value for m in SamplingMethod],
        default=SamplingMethod.INVERSE_TRANSFORM.value,
    )

    describe_parser = subparsers.add_parser(Command.DESCRIBE.value, parents=[common, model], help="summary measures")
    describe_parser.add_argument("--zeta", type=float, default=2.0, help="Renyi entropy order")

    return parser


def _parse_families(text: Optional[str]) -> Optional[List[Family]]:
    if text is None:
        return None
    try:
        return [Family.parse(tag) for tag in text.split(",") if tag.strip()]
    except ValueError as exc:
        raise UsageError(f"unknown family in '{text}': {exc}") from exc


def _parse_params(text: str):
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise UsageError(f"--params must be three numbers lambda,theta,alpha, got '{text}'") from exc
    if len(values) != 3:
        raise UsageError(f"--params must be three numbers lambda,theta,alpha, got '{text}'")
    return values


def build_config(args: argparse.Namespace) -> RunConfig:
    """Turn parsed arguments into an explicit, fully resolved RunConfig."""
    command = Command(args.command)
    fields: Dict[str, Any] = {
        "command": command,
        "seed": settings.default_seed if args.seed is None else args.seed,
        "out": args.out,
        "format": OutputFormat(args.format),
    }

    if command in (Command.FIT, Command.COMPARE):
        if (args.dataset is None) == (args.data is None):
            raise UsageError("give exactly one of --dataset or --data")
        families = _parse_families(args.family)
        if families is None:
            if command is Command.FIT:
                families = [Family.EGL]
            else:
                families = DEFAULT_COMPARISON.get((args.dataset or "").lower(), list(Family))
        if not families:
            raise UsageError("the family list is empty")
        if command is Command.FIT and len(families) != 1:
            raise UsageError("fit takes exactly one family; use compare for several")
        fields.update(
            dataset=args.dataset,
            data=args.data,
            column=args.column,
            families=families,
            level=args.level,
            information=InformationMode(args.information),
        )
    else:
        fields["params"] = _parse_params(args.params)

    if command is Command.EVAL:
        try:
            fields["grid"] = GridSpec.parse(args.grid)
        except (ValueError, ValidationError) as exc:
            raise DomainError(f"invalid grid '{args.grid}': {exc}") from exc
        fields["which"] = EvalQuantity(args.which)
    elif command is Command.SAMPLE:
        fields["n"] = args.n
        fields["method"] = SamplingMethod(args.method)
    elif command is Command.DESCRIBE:
        fields["zeta"] = args.zeta

    return RunConfig(**fields)


# ----------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------

def _load_dataset(config: RunConfig) -> Dataset:
    return dataset_service.resolve(dataset=config.dataset, data=config.data, column=config.column)


def _fit_options(config: RunConfig) -> FitOptions:
    return FitOptions(seed=config.seed, level=config.level, information=config.information)


def _distribution(config: RunConfig) -> EGLDistribution:
    return EGLDistribution(EglParams.from_sequence(config.params))


def cmd_fit(config: RunConfig) -> Dict[str, Any]:
    data = _load_dataset(config)
    fit = estimation_service.fit(config.families[0], data, _fit_options(config))
    report = report_from_fit(fit, data)
    result = {
        "dataset": data.summary(),
        "fit": fit.model_dump(mode="json"),
        "gof": report.model_dump(mode="json"),
    }
    egl_params = fit.model.egl_params()
    if egl_params is not None:
        result["hazard_shape"] = EGLDistribution(egl_params).classify_hazard_shape().value
    return result


def cmd_compare(config: RunConfig) -> Dict[str, Any]:
    data = _load_dataset(config)
    reports = comparison_service.compare(config.families, data, _fit_options(config))
    return {
        "dataset": data.summary(),
        "reports": [r.model_dump(mode="json") for r in reports],
    }


def cmd_eval(config: RunConfig) -> Dict[str, Any]:
    dist = _distribution(config)
    grid = config.grid.points()
    which = config.which

    if which is EvalQuantity.QUANTILE:
        values = np.atleast_1d(dist.quantile(grid))
    elif which is EvalQuantity.MRL:
        values = np.array([dist.mean_residual_life(float(t)) for t in grid])
    else:
        evaluate = {
            EvalQuantity.PDF: dist.pdf,
            EvalQuantity.CDF: dist.cdf,
            EvalQuantity.SURVIVAL: dist.survival,
            EvalQuantity.HAZARD: dist.hazard,
        }[which]
        values = np.atleast_1d(evaluate(grid))

    return {
        "which": which.value,
        "rows": [[float(x), float(v)] for x, v in zip(grid, values)],
    }


def cmd_sample(config: RunConfig) -> Dict[str, Any]:
    dist = _distribution(config)
    values = dist.sample(config.n, config.seed, config.method)
    return {"method": config.method.value, "values": [float(v) for v in values]}


def cmd_describe(config: RunConfig) -> Dict[str, Any]:
    dist = _distribution(config)
    mode = dist.mode()
    return {
        "params": dist.params.model_dump(),
        "mean": dist.mean(),
        "variance": dist.variance(),
        "skewness": dist.skewness(),
        "kurtosis": dist.kurtosis(),
        "median": dist.median(),
        "mode": mode.model_dump(),
        "hazard_shape": dist.classify_hazard_shape().value,
        "hazard_peak": dist.hazard_peak(),
        "shannon_entropy": dist.shannon_entropy(),
        "renyi_entropy": {"zeta": config.zeta, "value": dist.renyi_entropy(config.zeta)},
    }


COMMANDS = {
    Command.FIT: cmd_fit,
    Command.COMPARE: cmd_compare,
    Command.EVAL: cmd_eval,
    Command.SAMPLE: cmd_sample,
    Command.DESCRIBE: cmd_describe,
}


# ----------------------------------------------------------------------
# Output
# ----------------------------------------------------------------------

def _csv_table(config: RunConfig, result: Dict[str, Any]) -> str:
    buffer = io.StringIO()
    if config.command is Command.EVAL:
        pd.DataFrame(result["rows"], columns=["x", result["which"]]).to_csv(buffer, index=False)
    elif config.command is Command.SAMPLE:
        pd.DataFrame({"value": result["values"]}).to_csv(buffer, index=False, header=False)
    elif config.command is Command.COMPARE:
        rows = [
            {
                "family": r["family"],
                "params": "" if r["model"] is None else ";".join(repr(v) for v in r["model"]["params"]),
                "neg_loglik": r["neg_loglik"],
                "aic": r["aic"],
                "bic": r["bic"],
                "ks": r["ks"],
                "n": r["n"],
                "q": r["q"],
                "converged": r["converged"],
                "error": r["error"] or "",
            }
            for r in result["reports"]
        ]
        pd.DataFrame(rows).to_csv(buffer, index=False)
    elif config.command is Command.FIT:
        fit, gof = result["fit"], result["gof"]
        names = FAMILY_PARAMETERS[Family(fit["model"]["family"])]
        row = {"family": fit["model"]["family"], **dict(zip(names, fit["model"]["params"]))}
        row.update(
            neg_loglik=gof["neg_loglik"],
            aic=gof["aic"],
            bic=gof["bic"],
            ks=gof["ks"],
            converged=fit["converged"],
            score_norm=fit["score_norm"],
            boundary="" if fit["boundary"] is None else fit["boundary"]["model"],
            boundary_neg_loglik=None if fit["boundary"] is None else fit["boundary"]["neg_loglik"],
        )
        pd.DataFrame([row]).to_csv(buffer, index=False)
    else:
        flat = {k: v for k, v in result.items() if not isinstance(v, dict)}
        pd.DataFrame([flat]).to_csv(buffer, index=False)
    return buffer.getvalue()


def _csv_preamble(config: RunConfig, digest: Optional[str]) -> str:
    """The report envelope as '#' comment lines above a CSV table."""
    lines = [
        f"# version={__version__}",
        f"# seed={config.seed}",
        f"# dataset_digest={digest or ''}",
        f"# config={config.model_dump_json()}",
    ]
    return "\n".join(lines) + "\n"


def render(config: RunConfig, result: Dict[str, Any], digest: Optional[str]) -> str:
    if config.format is OutputFormat.CSV:
        return _csv_preamble(config, digest) + _csv_table(config, result)
    envelope = ReportEnvelope(
        version=__version__,
        seed=config.seed,
        dataset_digest=digest,
        config=config,
        result=result,
    )
    return json.dumps(envelope.model_dump(mode="json"), indent=2) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text)
        logger.info(f"Report written to {out}")


def _fail(payload: Dict[str, Any]) -> int:
    sys.stderr.write(json.dumps(payload) + "\n")
    return payload["exit_code"]


def _error(kind: str, detail: str, exit_code: int) -> Dict[str, Any]:
    return {"error": kind, "detail": detail, "exit_code": exit_code}


def run(config: RunConfig) -> str:
    """Execute a resolved configuration and return the rendered report."""
    result = COMMANDS[config.command](config)
    digest = result.get("dataset", {}).get("digest") if isinstance(result.get("dataset"), dict) else None
    return render(config, result, digest)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            level=(args.log_level or settings.log_level).upper(),
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
            stream=sys.stderr,
        )
        config = build_config(args)
        logger.info(f"Running {config.command.value} with seed {config.seed}")
        _emit(run(config), config.out)
        return EXIT_OK
    except EGLError as exc:
        return _fail(exc.to_dict())
    except ValidationError as exc:
        return _fail(_error("InvalidData", str(exc), EXIT_DATA))
    except OSError as exc:
        return _fail(_error("IoError", str(exc), EXIT_DATA))
    except Exception as exc:
        logger.exception("Unhandled error")
        detail = str(exc) if settings.debug else type(exc).__name__
        return _fail(_error("InternalError", detail, 1))


if __name__ == "__main__":
    raise SystemExit(main())
