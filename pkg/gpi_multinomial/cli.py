"""
``gpi``: evaluate the GPI gaps at single points, sweep (m, d) grids, study
finite-N convergence and run the cross-check battery.

Machine-readable results go to stdout; logs and summary tables go to stderr.
"""
import json
import logging
import sys
from typing import Any, Final

import click
from dotenv import load_dotenv

from gpi_multinomial.combinatorics import sign
from gpi_multinomial.common import (
    parse_ints,
    render_float,
    render_rational,
    split_list,
)
from gpi_multinomial.config import get_settings
from gpi_multinomial.exceptions import (
    BudgetExceededException,
    DimensionMismatchException,
    InvalidInputException,
)
from gpi_multinomial.gaussian import gaussian_gpi_gap
from gpi_multinomial.multinomial import MultinomialSpec, ProbVector, scaled_gap_finite
from gpi_multinomial.sampling import Sampler
from gpi_multinomial.sweep import (
    DEFAULT_GRID,
    DEFAULT_SAMPLES_PER_CELL,
    VARIANTS,
    SweepConfig,
    render_csv,
    render_json,
    render_summary_table,
    run_convergence,
    run_sweep,
    variant_gap,
)
from gpi_multinomial.verify import verify_all

logger = logging.getLogger(__name__)

EXIT_INVARIANT_FAILED: Final = 1
EXIT_INVALID_INPUT: Final = 2
EXIT_BUDGET_EXCEEDED: Final = 3

LOG_LEVELS: Final = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class GpiGroup(click.Group):
    """Maps domain errors onto the documented exit codes."""

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except BudgetExceededException as ex:
            click.echo(f"Error: {ex}", err=True)
            ctx.exit(EXIT_BUDGET_EXCEEDED)
        except InvalidInputException as ex:
            click.echo(f"Error: {ex}", err=True)
            ctx.exit(EXIT_INVALID_INPUT)


def _echo_json(document: Any) -> None:
    click.echo(json.dumps(document, indent=2))


def _exact(value) -> dict[str, str]:
    return {"exact": render_rational(value), "float": render_float(value)}


def _point(p: str, d: int | None = None) -> ProbVector:
    point = ProbVector.parse(p)
    if d is not None and point.d != d:
        raise DimensionMismatchException(f"--d is {d} but --p has {point.d} entries")
    return point


m_option = click.option("--m", "m", type=int, required=True, help="Half the moment order")
p_option = click.option(
    "--p", "p", required=True, help='Cell probabilities, e.g. "1/2,1/4"'
)


@click.group(cls=GpiGroup)
@click.option(
    "--log-level",
    type=click.Choice(LOG_LEVELS, case_sensitive=False),
    default=None,
    help="Overrides GPI_LOG_LEVEL",
)
def main(log_level: str | None):
    """Exact checks of the Gaussian product inequality for multinomial covariances"""
    load_dotenv()
    get_settings.cache_clear()
    logging.basicConfig(
        stream=sys.stderr,
        level=(log_level or get_settings().log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


@main.command()
@m_option
@p_option
@click.option("--d", "d", type=int, default=None, help="Dimension, checked against --p")
@click.option(
    "--variant",
    type=click.Choice(VARIANTS),
    default="equality",
    show_default=True,
)
def gap(m: int, p: str, d: int | None, variant: str):
    """Theorem-condition gap at a single point"""
    point = _point(p, d)
    value = variant_gap(point, m, variant)
    _echo_json(
        {
            "m": m,
            "d": point.d,
            "p": point.render(),
            "variant": variant,
            "theorem_gap": _exact(value),
            "sign": sign(value),
        }
    )


@main.command()
@m_option
@p_option
def oracle(m: int, p: str):
    """Gaussian-limit gap at a single point"""
    point = _point(p)
    value = gaussian_gpi_gap(point, m)
    _echo_json(
        {
            "m": m,
            "d": point.d,
            "p": point.render(),
            "gaussian_gap": _exact(value),
            "sign": sign(value),
        }
    )


@main.command("finite-n")
@m_option
@p_option
@click.option("--N", "trials", type=int, required=True, help="Number of trials")
def finite_n(m: int, p: str, trials: int):
    """Scaled finite-N gap at a single point"""
    point = _point(p)
    value = scaled_gap_finite(MultinomialSpec(trials, point), m)
    _echo_json(
        {
            "m": m,
            "d": point.d,
            "p": point.render(),
            "N": trials,
            "scaled_gap": _exact(value),
        }
    )


@main.command()
@click.option("--m-max", type=int, default=4, show_default=True)
@click.option("--d-max", type=int, default=4, show_default=True)
@click.option(
    "--samples", type=int, default=DEFAULT_SAMPLES_PER_CELL, show_default=True
)
@click.option(
    "--sampler",
    type=click.Choice([sampler.value for sampler in Sampler]),
    default=Sampler.DIRICHLET_RAMP.value,
    show_default=True,
)
@click.option("--grid", type=int, default=DEFAULT_GRID, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option(
    "--variants",
    default="equality,slack",
    show_default=True,
    help=f"Any of {', '.join(VARIANTS)}",
)
@click.option("--no-oracle", is_flag=True, help="Skip the Gaussian gap")
@click.option("--finite-n", default=None, help='Also evaluate finite N, e.g. "64,128"')
@click.option(
    "--fixed-p",
    multiple=True,
    help="A point for the fixed sampler; repeat for more points",
)
@click.option("--workers", type=int, default=None, help="Overrides GPI_WORKERS")
@click.option(
    "--format",
    "output_format",
    type=click.Choice(["csv", "json"]),
    default="csv",
    show_default=True,
)
@click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None)
@click.option("--timings", is_flag=True, help="Include wall times (not reproducible)")
def sweep(
    m_max: int,
    d_max: int,
    samples: int,
    sampler: str,
    grid: int,
    seed: int,
    variants: str,
    no_oracle: bool,
    finite_n: str | None,
    fixed_p: tuple[str, ...],
    workers: int | None,
    output_format: str,
    out: str | None,
    timings: bool,
):
    """Sweep an m by d grid of sampled points"""
    config = SweepConfig(
        m_max=m_max,
        d_max=d_max,
        samples_per_cell=samples,
        sampler=Sampler(sampler),
        denominator_grid=grid,
        seed=seed,
        variants=tuple(split_list(variants)),
        oracle=not no_oracle,
        finite_n=parse_ints(finite_n) if finite_n else (),
        fixed_points=tuple(ProbVector.parse(point) for point in fixed_p),
        workers=workers or get_settings().workers,
        include_timings=timings,
    )
    result = run_sweep(config)
    text = render_csv(result) if output_format == "csv" else render_json(result)
    if out:
        with open(out, "w", newline="\n") as stream:
            stream.write(text)
        logger.info(f"Wrote {len(result.records)} records to {out}")
    else:
        click.echo(text, nl=False)

    kinds = ["gaussian"] if config.oracle else []
    kinds += [f"theorem:{variant}" for variant in config.variants]
    for kind in kinds:
        click.echo(render_summary_table(result, kind), err=True)
    if result.findings:
        click.echo(f"{len(result.findings)} sign disagreement(s) found", err=True)


@main.command()
@m_option
@p_option
@click.option(
    "--N-list",
    "n_list",
    default="32,64,128,256",
    show_default=True,
    help="Ascending trial counts",
)
def converge(m: int, p: str, n_list: str):
    """Finite-N gaps against the Gaussian limit"""
    point = _point(p)
    rows = run_convergence(point, m, parse_ints(n_list))
    _echo_json(
        {
            "m": m,
            "p": point.render(),
            "gaussian_gap": _exact(gaussian_gpi_gap(point, m)),
            "rows": [row.as_dict() for row in rows],
        }
    )


@main.command()
@click.option("--no-survey", is_flag=True, help="Hard invariants only")
@click.option("--seed", type=int, default=0, show_default=True)
@click.pass_context
def verify(ctx: click.Context, no_survey: bool, seed: int):
    """Run every cross-check; exit 1 if a hard invariant fails"""
    report = verify_all(survey=not no_survey, seed=seed)
    _echo_json(report.as_dict())
    if not report.ok:
        ctx.exit(EXIT_INVARIANT_FAILED)


if __name__ == "__main__":
    main()
