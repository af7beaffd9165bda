"""renyi-sharp command-line interface.

Exit codes: 0 success, 1 usage or input error, 2 partial results (some
sweep cells failed), 3 size budget exceeded.
"""

import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import IO, Any, Callable, Dict, Iterator, List, Optional, Tuple

import click
import numpy as np
import typer
from hermitian_ops import DimensionMismatchError
from pydantic import ValidationError
from rich.markup import escape

from .channel_div import (
    capacity_curve,
    capacity_refinement,
    copies_for_accuracy,
    d_geometric_channel,
    d_sharp_channel,
    hierarchy_bound,
    max_rains_bound,
    sandwiched_channel_lower_bound,
    strong_converse_curve,
    two_way_rate_bound,
)
from .cli_util import (
    load_state,
    parse_channel,
    parse_channel_family,
    parse_grid,
    parse_int_list,
    parse_output_format,
)
from .concurrency import CellOutcome, run_cells
from .config import Preset, RunConfig, SolverConfig, load_config
from .divergence import d_geometric, d_max, d_pinched, d_sandwiched, d_sharp_state
from .errors import SizeBudgetError, SolverFailureError
from .logging_config import setup_logging
from .models import CellStatus, OutputFormat
from .quantum import QChannel, entangled_pair, tensor_power
from .result_console import ResultPrinter, Row
from .selftest import SUITES, run_selftest

app = typer.Typer(
    name="renyi-sharp",
    help="Geometric-mean Rényi divergences, channel hierarchies and capacity bounds",
    add_completion=False,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARTIAL = 2
EXIT_BUDGET = 3

STATE_COLUMNS = [
    "alpha",
    "D_sharp_lo",
    "D_sharp_hi",
    "D_sandwiched",
    "D_geometric",
    "D_max",
    "Q_sharp",
    "iterations",
    "status",
    "D_pinched",
]
CHANNEL_COLUMNS = [
    "alpha",
    "m",
    "D_sharp_lo",
    "D_sharp_hi",
    "epigraph_t",
    "D_geometric_uniform",
    "D_sandwiched_lower",
    "iterations",
    "status",
]
HIERARCHY_COLUMNS = ["alpha", "m", "upper", "lower", "correction", "status"]
CAPACITY_COLUMNS = ["gamma", "best_alpha", "bound", "status", "failed_alphas"]
REFINEMENT_COLUMNS = ["gamma", "alpha", "m", "bound", "status"]
MAX_RAINS_COLUMNS = ["gamma", "bound", "status"]
DISCRIM_COLUMNS = ["r", "exponent", "best_alpha", "status", "failed_alphas"]
RATE_COLUMNS = [
    "epsilon",
    "n",
    "bound",
    "best_alpha",
    "correction",
    "status",
    "failed_alphas",
]

ALPHAS_OPTION = typer.Option(
    None, "--alphas", help="Alpha grid: '1.5,2' or inclusive 'start:stop:step'"
)
ALPHA_OPTION = typer.Option(None, "--alpha", "-a", help="Single alpha > 1")
BITS_OPTION = typer.Option(
    None, "--bits", help="Dyadic level l for 1/alpha brackets (2..14)"
)
TOL_OPTION = typer.Option(None, "--tol", help="Solver tolerance (1e-10..1e-4)")
MAX_ITER_OPTION = typer.Option(None, "--max-iter", help="Solver iteration limit")
SIZE_BUDGET_OPTION = typer.Option(
    None, "--size-budget", help="Largest realified program dimension to attempt"
)
JOBS_OPTION = typer.Option(
    None, "--jobs", "-j", help="Parallel sweep cells (default: number of cores)"
)
JSON_OPTION = typer.Option(False, "--json", help="Emit rows as JSON objects")
FORMAT_OPTION = typer.Option(
    None, "--format", "-f", help="Output format: csv (default), json, table"
)
OUT_OPTION = typer.Option(None, "--out", "-o", help="Write rows to this file")
PRESET_OPTION = typer.Option(
    None, "--preset", help="Named reproduction preset from the config file"
)
CONFIG_OPTION = typer.Option(
    None, "--config", "-c", help="Path to config file (default: config.yaml if present)"
)
DUMP_OPTION = typer.Option(
    None, "--dump", help="Directory for text dumps of every solved program"
)


@contextmanager
def _handle_errors() -> Iterator[None]:
    """Map library exceptions to exit codes."""
    try:
        yield
    except typer.Exit:
        raise
    except SizeBudgetError as e:
        logger.error(
            f"[red]Error: {escape(str(e))}[/red] "
            f"(dimension {e.dimension}, raise --size-budget to attempt it)"
        )
        raise typer.Exit(EXIT_BUDGET)
    except (typer.BadParameter, ValueError, KeyError, OSError) as e:
        message = e.format_message() if isinstance(e, click.ClickException) else str(e)
        logger.error(f"[red]Error: {type(e).__name__}: {escape(message)}[/red]")
        raise typer.Exit(EXIT_ERROR)
    except SolverFailureError as e:
        logger.error(f"[red]Error: {escape(str(e))}[/red]")
        raise typer.Exit(EXIT_ERROR)


def _validation_message(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(p) for p in item["loc"]) or "input"
        parts.append(f"{location}: {item['msg']}")
    return "; ".join(parts)


def _prepare(
    config_file: Optional[str], preset_name: Optional[str], **values: Any
) -> Tuple[RunConfig, SolverConfig, Optional[Preset]]:
    """Merge config-file defaults, an optional preset and command-line values.

    Raises:
        BadParameter: If the merged values fail RunConfig validation
    """
    config = load_config(config_file)
    preset = None
    if preset_name:
        try:
            preset = config.preset(preset_name)
        except KeyError as e:
            raise typer.BadParameter(str(e.args[0]))

    merged: Dict[str, Any] = {
        "bits": config.solver.bits,
        "tol": config.solver.tol,
        "max_iter": config.solver.max_iter,
        "size_budget": config.solver.size_budget,
    }
    if preset is not None:
        if preset.alphas:
            merged["alphas"] = preset.alphas
        if preset.gammas:
            merged["gammas"] = preset.gammas
        if preset.bits is not None:
            merged["bits"] = preset.bits
        merged["m"] = [preset.m]
    merged.update({k: v for k, v in values.items() if v is not None and v != []})

    try:
        run = RunConfig(**merged)
    except ValidationError as e:
        raise typer.BadParameter(_validation_message(e))
    return run, run.solver_config(config.solver), preset


def _alpha_values(
    alpha: Optional[float], alphas: Optional[str]
) -> Optional[List[float]]:
    values = parse_grid(alphas, "--alphas")
    if alpha is not None:
        values = [alpha] + values
    return values or None


def _require(values: List[Any], what: str) -> None:
    if not values:
        raise typer.BadParameter(f"{what} is required (or use --preset)")


@contextmanager
def _output_stream(path: Optional[str]) -> Iterator[Optional[IO[str]]]:
    if path is None:
        yield None
        return
    with open(path, "w", newline="") as stream:
        yield stream
    logger.info(f"Wrote {path}")


def _emit(
    columns: List[str],
    rows: List[Row],
    output_format: OutputFormat,
    out: Optional[str],
    title: str,
) -> None:
    with _output_stream(out) as stream:
        ResultPrinter(output_format, stream).print_rows(columns, rows, title)


def _failed_row(key_columns: Dict[str, Any], error: BaseException) -> Row:
    logger.warning(f"Cell {key_columns} failed: {error}")
    return {**key_columns, "status": CellStatus.FAILED.value}


def _collect(
    outcomes: List[CellOutcome],
    key_columns: Callable[[Tuple], Dict[str, Any]],
) -> Tuple[List[Row], bool]:
    """Rows from sweep outcomes; solver failures become 'failed' rows.

    Any other cell error is re-raised so input problems still exit 1.
    """
    rows: List[Row] = []
    partial = False
    for outcome in outcomes:
        if outcome.ok:
            rows.append(outcome.value)
            continue
        if isinstance(outcome.error, SolverFailureError):
            partial = True
            rows.append(_failed_row(key_columns(outcome.key), outcome.error))
            continue
        raise outcome.error
    return rows, partial


def _alpha_list(alphas: List[float]) -> str:
    return ";".join(f"{a:g}" for a in alphas)


def _finish(partial: bool) -> None:
    if partial:
        logger.warning("Some cells failed; output is partial")
        raise typer.Exit(EXIT_PARTIAL)


def _state_row(
    rho: np.ndarray, sigma: np.ndarray, alpha: float, options: SolverConfig
) -> Row:
    result = d_sharp_state(rho, sigma, alpha, options)
    return {
        "alpha": alpha,
        "D_sharp_lo": result.d_bracket[0],
        "D_sharp_hi": result.d_bracket[1],
        "D_sandwiched": d_sandwiched(rho, sigma, alpha),
        "D_geometric": d_geometric(rho, sigma, alpha),
        "D_max": d_max(rho, sigma),
        "Q_sharp": result.value_Q,
        "iterations": result.iterations,
        "status": result.status,
        "D_pinched": d_pinched(rho, sigma, alpha),
    }


def _entangled_row(eps: float, alpha: float, options: SolverConfig) -> Row:
    rho, sigma = entangled_pair(eps)
    return {"eps": eps, **_state_row(rho.matrix, sigma.matrix, alpha, options)}


@app.command()
def state_div(
    rho_file: Optional[str] = typer.Argument(None, help="State JSON file for rho"),
    sigma_file: Optional[str] = typer.Argument(None, help="State JSON file for sigma"),
    family: Optional[str] = typer.Option(
        None, "--family", help="Built-in state family instead of files: entangled"
    ),
    eps: Optional[str] = typer.Option(
        None, "--eps", help="Epsilon grid for --family entangled"
    ),
    alpha: Optional[float] = ALPHA_OPTION,
    alphas: Optional[str] = ALPHAS_OPTION,
    bits: Optional[int] = BITS_OPTION,
    tol: Optional[float] = TOL_OPTION,
    max_iter: Optional[int] = MAX_ITER_OPTION,
    size_budget: Optional[int] = SIZE_BUDGET_OPTION,
    jobs: Optional[int] = JOBS_OPTION,
    json_output: bool = JSON_OPTION,
    output_format: Optional[str] = FORMAT_OPTION,
    out: Optional[str] = OUT_OPTION,
    preset: Optional[str] = PRESET_OPTION,
    config_file: Optional[str] = CONFIG_OPTION,
    dump: Optional[str] = DUMP_OPTION,
) -> None:
    """D#_alpha(rho||sigma) with its dyadic bracket and closed-form references."""
    setup_logging()
    with _handle_errors():
        fmt = parse_output_format(output_format, json_output)
        run, options, chosen = _prepare(
            config_file,
            preset,
            alphas=_alpha_values(alpha, alphas),
            bits=bits,
            tol=tol,
            max_iter=max_iter,
            size_budget=size_budget,
            jobs=jobs,
            output_path=out,
            dump_dir=dump,
        )
        _require(run.alphas, "--alpha/--alphas")

        epsilons = parse_grid(eps, "--eps")
        if not epsilons and chosen is not None:
            epsilons = list(chosen.epsilons)

        cells: Dict[Tuple, Callable[[], Row]] = {}
        if family is not None or (epsilons and rho_file is None):
            if (family or "entangled") != "entangled":
                raise typer.BadParameter(f"Unknown state family '{family}'")
            _require(epsilons, "--eps")
            columns = ["eps"] + STATE_COLUMNS
            for value in epsilons:
                for a in run.alphas:
                    cells[(value, a)] = lambda e=value, a=a: _entangled_row(
                        e, a, options
                    )
        else:
            if rho_file is None or sigma_file is None:
                raise typer.BadParameter("Give RHO_FILE and SIGMA_FILE, or --family")
            rho_state, sigma_state = load_state(rho_file), load_state(sigma_file)
            if rho_state.dim != sigma_state.dim:
                raise DimensionMismatchError(
                    f"{rho_file} has dimension {rho_state.dim} "
                    f"but {sigma_file} has {sigma_state.dim}"
                )
            columns = STATE_COLUMNS
            for a in run.alphas:
                cells[(a,)] = lambda a=a: _state_row(
                    rho_state.matrix, sigma_state.matrix, a, options
                )

        outcomes = run_cells(cells, run.jobs)
        rows, partial = _collect(
            outcomes,
            lambda key: {"eps": key[0], "alpha": key[1]}
            if len(key) == 2
            else {"alpha": key[0]},
        )
        _emit(columns, rows, fmt, run.output_path, "State divergences")
        _finish(partial)


def _channel_row(
    n: QChannel,
    m_channel: QChannel,
    alpha: float,
    power: int,
    options: SolverConfig,
    seed: int,
) -> Row:
    result = d_sharp_channel(n, m_channel, alpha, options, power=power)
    n_power = tensor_power(n, power, options.size_budget)
    m_power = tensor_power(m_channel, power, options.size_budget)
    rng = np.random.default_rng([seed, power])
    return {
        "alpha": alpha,
        "m": power,
        "D_sharp_lo": result.d_bracket[0],
        "D_sharp_hi": result.d_bracket[1],
        "epigraph_t": result.epigraph_t,
        "D_geometric_uniform": d_geometric_channel(n_power, m_power, alpha),
        "D_sandwiched_lower": sandwiched_channel_lower_bound(
            n_power, m_power, alpha, rng=rng
        ),
        "iterations": result.iterations,
        "status": result.status,
    }


@app.command()
def channel_div(
    n_channel: str = typer.Argument(..., help="Channel N: 'ad:0.5', ... or JSON file"),
    m_channel: str = typer.Argument(..., help="Channel M: 'ad:0.5', ... or JSON file"),
    alpha: Optional[float] = ALPHA_OPTION,
    alphas: Optional[str] = ALPHAS_OPTION,
    m: Optional[str] = typer.Option(None, "--m", help="Tensor powers, e.g. '1,2'"),
    seed: int = typer.Option(0, "--seed", help="Seed for sampled input states"),
    bits: Optional[int] = BITS_OPTION,
    tol: Optional[float] = TOL_OPTION,
    max_iter: Optional[int] = MAX_ITER_OPTION,
    size_budget: Optional[int] = SIZE_BUDGET_OPTION,
    jobs: Optional[int] = JOBS_OPTION,
    json_output: bool = JSON_OPTION,
    output_format: Optional[str] = FORMAT_OPTION,
    out: Optional[str] = OUT_OPTION,
    preset: Optional[str] = PRESET_OPTION,
    config_file: Optional[str] = CONFIG_OPTION,
    dump: Optional[str] = DUMP_OPTION,
) -> None:
    """D#_alpha(N||M) on tensor powers, with geometric and sandwiched references."""
    setup_logging()
    with _handle_errors():
        fmt = parse_output_format(output_format, json_output)
        run, options, _ = _prepare(
            config_file,
            preset,
            alphas=_alpha_values(alpha, alphas),
            m=parse_int_list(m, "--m"),
            seed=seed,
            bits=bits,
            tol=tol,
            max_iter=max_iter,
            size_budget=size_budget,
            jobs=jobs,
            output_path=out,
            dump_dir=dump,
        )
        _require(run.alphas, "--alpha/--alphas")
        n, mc = parse_channel(n_channel), parse_channel(m_channel)
        if (n.dim_in, n.dim_out) != (mc.dim_in, mc.dim_out):
            raise DimensionMismatchError(
                f"N acts {n.dim_in}->{n.dim_out} but M acts {mc.dim_in}->{mc.dim_out}"
            )

        cells = {
            (a, power): (
                lambda a=a, p=power: _channel_row(n, mc, a, p, options, run.seed)
            )
            for a in run.alphas
            for power in run.m
        }
        outcomes = run_cells(cells, run.jobs)
        rows, partial = _collect(outcomes, lambda key: {"alpha": key[0], "m": key[1]})
        _emit(CHANNEL_COLUMNS, rows, fmt, run.output_path, "Channel divergences")
        _finish(partial)


def _hierarchy_row(
    n: QChannel, m_channel: QChannel, alpha: float, power: int, options: SolverConfig
) -> Row:
    bound = hierarchy_bound(n, m_channel, alpha, power, options)
    return bound.model_dump(include=set(HIERARCHY_COLUMNS))


@app.command()
def hierarchy(
    n_channel: str = typer.Argument(..., help="Channel N: 'ad:0.5', ... or JSON file"),
    m_channel: str = typer.Argument(..., help="Channel M: 'ad:0.5', ... or JSON file"),
    alpha: Optional[float] = ALPHA_OPTION,
    alphas: Optional[str] = ALPHAS_OPTION,
    m: Optional[str] = typer.Option(None, "--m", help="Tensor powers, e.g. '1,2'"),
    delta: Optional[float] = typer.Option(
        None, "--delta", help="Also report the copies needed for this accuracy"
    ),
    bits: Optional[int] = BITS_OPTION,
    tol: Optional[float] = TOL_OPTION,
    max_iter: Optional[int] = MAX_ITER_OPTION,
    size_budget: Optional[int] = SIZE_BUDGET_OPTION,
    jobs: Optional[int] = JOBS_OPTION,
    json_output: bool = JSON_OPTION,
    output_format: Optional[str] = FORMAT_OPTION,
    out: Optional[str] = OUT_OPTION,
    preset: Optional[str] = PRESET_OPTION,
    config_file: Optional[str] = CONFIG_OPTION,
    dump: Optional[str] = DUMP_OPTION,
) -> None:
    """Upper and lower members of the tensor-power hierarchy."""
    setup_logging()
    with _handle_errors():
        fmt = parse_output_format(output_format, json_output)
        run, options, _ = _prepare(
            config_file,
            preset,
            alphas=_alpha_values(alpha, alphas),
            m=parse_int_list(m, "--m"),
            bits=bits,
            tol=tol,
            max_iter=max_iter,
            size_budget=size_budget,
            jobs=jobs,
            output_path=out,
            dump_dir=dump,
        )
        _require(run.alphas, "--alpha/--alphas")
        n, mc = parse_channel(n_channel), parse_channel(m_channel)

        cells = {
            (a, power): (lambda a=a, p=power: _hierarchy_row(n, mc, a, p, options))
            for a in run.alphas
            for power in run.m
        }
        outcomes = run_cells(cells, run.jobs)
        rows, partial = _collect(outcomes, lambda key: {"alpha": key[0], "m": key[1]})

        columns = HIERARCHY_COLUMNS
        if delta is not None:
            columns = HIERARCHY_COLUMNS + ["copies_for_delta"]
            d = n.dim_in * n.dim_out
            for r in rows:
                r["copies_for_delta"] = copies_for_accuracy(r["alpha"], d, delta)
        _emit(columns, rows, fmt, run.output_path, "Tensor-power hierarchy")
        _finish(partial)


def _max_rains_row(
    family: Callable[[float], QChannel], gamma: float, options: SolverConfig
) -> Row:
    return {
        "gamma": gamma,
        "bound": max_rains_bound(family(gamma), options),
        "status": CellStatus.OK.value,
    }


def _refinement_row(
    family: Callable[[float], QChannel],
    gamma: float,
    alpha: float,
    power: int,
    options: SolverConfig,
) -> Row:
    refined = capacity_refinement(family(gamma), alpha, power, options)
    return {
        "gamma": gamma,
        "alpha": alpha,
        "m": power,
        "bound": refined.upper,
        "status": refined.status,
    }


@app.command()
def capacity(
    channel: str = typer.Option(
        "ad", "--channel", help="Channel family: ad, depol, dephase"
    ),
    gammas: Optional[str] = typer.Option(
        None, "--gammas", help="Family parameter grid, e.g. '0,0.5,1'"
    ),
    alpha: Optional[float] = ALPHA_OPTION,
    alphas: Optional[str] = ALPHAS_OPTION,
    bound: str = typer.Option(
        "sharp", "--bound", help="sharp (D#) or dmax (max-Rains)"
    ),
    m: Optional[int] = typer.Option(
        None, "--m", help="Refine with M fixed at --alpha's minimizer over m copies"
    ),
    bits: Optional[int] = BITS_OPTION,
    tol: Optional[float] = TOL_OPTION,
    max_iter: Optional[int] = MAX_ITER_OPTION,
    size_budget: Optional[int] = SIZE_BUDGET_OPTION,
    jobs: Optional[int] = JOBS_OPTION,
    json_output: bool = JSON_OPTION,
    output_format: Optional[str] = FORMAT_OPTION,
    out: Optional[str] = OUT_OPTION,
    preset: Optional[str] = PRESET_OPTION,
    config_file: Optional[str] = CONFIG_OPTION,
    dump: Optional[str] = DUMP_OPTION,
) -> None:
    """Upper bounds on the two-way assisted capacity of a channel family."""
    setup_logging()
    with _handle_errors():
        fmt = parse_output_format(output_format, json_output)
        family = parse_channel_family(channel)
        run, options, _ = _prepare(
            config_file,
            preset,
            alphas=_alpha_values(alpha, alphas),
            gammas=parse_grid(gammas, "--gammas"),
            m=[m] if m is not None else None,
            bits=bits,
            tol=tol,
            max_iter=max_iter,
            size_budget=size_budget,
            jobs=jobs,
            output_path=out,
            dump_dir=dump,
        )
        _require(run.gammas, "--gammas")

        if bound == "dmax":
            cells = {
                (g,): (lambda g=g: _max_rains_row(family, g, options))
                for g in run.gammas
            }
            rows, partial = _collect(
                run_cells(cells, run.jobs), lambda key: {"gamma": key[0]}
            )
            _emit(MAX_RAINS_COLUMNS, rows, fmt, run.output_path, "Max-Rains bound")
            _finish(partial)
            return
        if bound != "sharp":
            raise typer.BadParameter(f"Unknown bound '{bound}'. Valid: sharp, dmax")

        _require(run.alphas, "--alpha/--alphas")
        power = run.m[0]
        if power > 1:
            if len(run.alphas) != 1:
                raise typer.BadParameter("--m > 1 needs a single --alpha")
            a = run.alphas[0]
            cells = {
                (g,): (lambda g=g: _refinement_row(family, g, a, power, options))
                for g in run.gammas
            }
            rows, partial = _collect(
                run_cells(cells, run.jobs), lambda key: {"gamma": key[0]}
            )
            _emit(REFINEMENT_COLUMNS, rows, fmt, run.output_path, "Refined bound")
            _finish(partial)
            return

        curve = capacity_curve(
            run.gammas, run.alphas, options, jobs=run.jobs, family=family
        )
        rows = [
            {
                "gamma": r.gamma,
                "best_alpha": r.best_alpha,
                "bound": r.value,
                "status": r.status.value,
                "failed_alphas": _alpha_list(r.failed_alphas),
            }
            for r in curve
        ]
        _emit(CAPACITY_COLUMNS, rows, fmt, run.output_path, "Capacity bound")
        _finish(any(r.status != CellStatus.OK for r in curve))


@app.command()
def discrim(
    n_channel: str = typer.Argument(..., help="Channel N: 'ad:0.5', ... or JSON file"),
    m_channel: str = typer.Argument(..., help="Channel M: 'ad:0.5', ... or JSON file"),
    rates: str = typer.Option(..., "--rates", "-r", help="Rate grid, e.g. '0:2:0.25'"),
    alpha: Optional[float] = ALPHA_OPTION,
    alphas: Optional[str] = ALPHAS_OPTION,
    m: Optional[int] = typer.Option(None, "--m", help="Hierarchy level for U_alpha"),
    bits: Optional[int] = BITS_OPTION,
    tol: Optional[float] = TOL_OPTION,
    max_iter: Optional[int] = MAX_ITER_OPTION,
    size_budget: Optional[int] = SIZE_BUDGET_OPTION,
    jobs: Optional[int] = JOBS_OPTION,
    json_output: bool = JSON_OPTION,
    output_format: Optional[str] = FORMAT_OPTION,
    out: Optional[str] = OUT_OPTION,
    preset: Optional[str] = PRESET_OPTION,
    config_file: Optional[str] = CONFIG_OPTION,
    dump: Optional[str] = DUMP_OPTION,
) -> None:
    """Certified lower bounds on the strong converse exponent of N vs M."""
    setup_logging()
    with _handle_errors():
        fmt = parse_output_format(output_format, json_output)
        run, options, _ = _prepare(
            config_file,
            preset,
            alphas=_alpha_values(alpha, alphas),
            m=[m] if m is not None else None,
            bits=bits,
            tol=tol,
            max_iter=max_iter,
            size_budget=size_budget,
            jobs=jobs,
            output_path=out,
            dump_dir=dump,
        )
        _require(run.alphas, "--alpha/--alphas")
        r_values = parse_grid(rates, "--rates")
        _require(r_values, "--rates")
        n, mc = parse_channel(n_channel), parse_channel(m_channel)
        curve = strong_converse_curve(
            n,
            mc,
            r_values,
            run.alphas,
            m=run.m[0],
            options=options,
            jobs=run.jobs,
        )
        rows = [
            {
                **row.model_dump(include={"r", "exponent", "best_alpha"}),
                "status": row.status.value,
                "failed_alphas": _alpha_list(row.failed_alphas),
            }
            for row in curve
        ]
        _emit(DISCRIM_COLUMNS, rows, fmt, run.output_path, "Strong converse exponent")
        _finish(any(row.status != CellStatus.OK for row in curve))


@app.command()
def rate_bound(
    channel: str = typer.Argument(..., help="Channel: 'ad:0.5', ... or JSON file"),
    epsilon: float = typer.Option(
        ..., "--epsilon", "-e", help="Error probability in [0, 1)"
    ),
    n: int = typer.Option(..., "--n", help="Number of channel uses"),
    alpha: Optional[float] = ALPHA_OPTION,
    alphas: Optional[str] = ALPHAS_OPTION,
    bits: Optional[int] = BITS_OPTION,
    tol: Optional[float] = TOL_OPTION,
    max_iter: Optional[int] = MAX_ITER_OPTION,
    size_budget: Optional[int] = SIZE_BUDGET_OPTION,
    jobs: Optional[int] = JOBS_OPTION,
    json_output: bool = JSON_OPTION,
    output_format: Optional[str] = FORMAT_OPTION,
    out: Optional[str] = OUT_OPTION,
    preset: Optional[str] = PRESET_OPTION,
    config_file: Optional[str] = CONFIG_OPTION,
    dump: Optional[str] = DUMP_OPTION,
) -> None:
    """Finite-n bound on two-way assisted rates at error epsilon."""
    setup_logging()
    with _handle_errors():
        fmt = parse_output_format(output_format, json_output)
        run, options, _ = _prepare(
            config_file,
            preset,
            alphas=_alpha_values(alpha, alphas),
            epsilon=epsilon,
            n=n,
            bits=bits,
            tol=tol,
            max_iter=max_iter,
            size_budget=size_budget,
            jobs=jobs,
            output_path=out,
            dump_dir=dump,
        )
        _require(run.alphas, "--alpha/--alphas")
        result = two_way_rate_bound(
            parse_channel(channel),
            run.alphas,
            run.epsilon,
            run.n,
            options,
            jobs=run.jobs,
        )
        row = {
            "epsilon": run.epsilon,
            "n": run.n,
            "bound": result.value,
            "best_alpha": result.best_alpha,
            "correction": result.correction,
            "status": result.status.value,
            "failed_alphas": _alpha_list(result.failed_alphas),
        }
        _emit(RATE_COLUMNS, [row], fmt, run.output_path, "Two-way rate bound")
        _finish(result.status != CellStatus.OK)


@app.command()
def selftest(
    seed: int = typer.Option(0, "--seed", help="Seed of the random suites"),
    suite: Optional[List[str]] = typer.Option(
        None,
        "--suite",
        "-s",
        help=f"Run only these suites (repeatable). Available: {', '.join(SUITES)}",
    ),
    count: Optional[int] = typer.Option(
        None,
        "--count",
        min=1,
        help="Instances per random suite (default: suite counts)",
    ),
    out: Optional[str] = OUT_OPTION,
    config_file: Optional[str] = CONFIG_OPTION,
) -> None:
    """Run the property and golden-value suites and print a JSON report."""
    setup_logging()
    with _handle_errors():
        config = load_config(config_file)
        try:
            report = run_selftest(seed, suite or None, count, config.solver)
        except KeyError as e:
            raise typer.BadParameter(str(e.args[0]))
        text = report.to_json()
        if out is not None:
            Path(out).write_text(text)
        else:
            sys.stdout.write(text)
        if not report.passed:
            failed = ", ".join(s.name for s in report.suites if not s.passed)
            logger.error(f"[red]Failed suites: {failed}[/red]")
            raise typer.Exit(EXIT_ERROR)


def main() -> None:
    """Console entry point; usage errors exit 1 instead of click's 2."""
    try:
        code = app(standalone_mode=False)
    except click.exceptions.Abort:
        sys.stderr.write("Aborted\n")
        code = 130
    except click.ClickException as e:
        e.show()
        code = EXIT_ERROR
    sys.exit(code or EXIT_OK)


if __name__ == "__main__":
    main()
