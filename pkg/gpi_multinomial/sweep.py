"""
Parameter sweeps over (m, d) grids of sampled simplex points, and finite-N
convergence studies against the Gaussian limit.
"""
import csv
import io
import json
import logging
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Final, Iterator, Sequence

from gpi_multinomial.combinatorics import sign
from gpi_multinomial.common import ExactRational, render_float, render_rational
from gpi_multinomial.config import get_settings
from gpi_multinomial.exceptions import BudgetExceededException, InvalidInputException
from gpi_multinomial.gaussian import gaussian_gpi_gap
from gpi_multinomial.gpi_condition import (
    ConstraintVariant,
    script_literal_gap,
    theorem_gap,
)
from gpi_multinomial.multinomial import MultinomialSpec, ProbVector, scaled_gap_finite
from gpi_multinomial.sampling import Sampler, cell_generator, sample_simplex

logger = logging.getLogger(__name__)

SCRIPT_VARIANT: Final = "script"
VARIANTS: Final = (
    ConstraintVariant.EQUALITY.value,
    ConstraintVariant.SLACK.value,
    SCRIPT_VARIANT,
)
DEFAULT_SAMPLES_PER_CELL: Final = 25
DEFAULT_GRID: Final = 10_000
MIN_GRID: Final = 10


def variant_gap(p: ProbVector, m: int, variant: str) -> ExactRational:
    """Theorem-condition gap for a sweep variant name."""
    if variant == SCRIPT_VARIANT:
        return script_literal_gap(p, m)
    if variant not in VARIANTS:
        raise InvalidInputException(
            f"unknown variant {variant!r}, expected one of {', '.join(VARIANTS)}"
        )
    return theorem_gap(p, m, ConstraintVariant(variant))


@dataclass(frozen=True)
class SweepConfig:
    m_max: int = 4
    d_max: int = 4
    samples_per_cell: int = DEFAULT_SAMPLES_PER_CELL
    sampler: Sampler = Sampler.DIRICHLET_RAMP
    denominator_grid: int = DEFAULT_GRID
    seed: int = 0
    variants: tuple[str, ...] = (
        ConstraintVariant.EQUALITY.value,
        ConstraintVariant.SLACK.value,
    )
    oracle: bool = True
    finite_n: tuple[int, ...] = ()
    fixed_points: tuple[ProbVector, ...] = ()
    workers: int = field(default_factory=lambda: get_settings().workers)
    include_timings: bool = False

    def __post_init__(self):
        object.__setattr__(self, "sampler", Sampler(self.sampler))
        if self.m_max < 1 or self.d_max < 1:
            raise InvalidInputException(
                f"m_max and d_max must be >= 1, got {self.m_max}, {self.d_max}"
            )
        if self.samples_per_cell < 1:
            raise InvalidInputException("samples_per_cell must be >= 1")
        if self.denominator_grid < max(MIN_GRID, self.d_max + 1):
            raise InvalidInputException(
                f"denominator_grid must be >= {max(MIN_GRID, self.d_max + 1)},"
                f" got {self.denominator_grid}"
            )
        if not self.variants or any(v not in VARIANTS for v in self.variants):
            raise InvalidInputException(
                f"variants must be drawn from {', '.join(VARIANTS)},"
                f" got {self.variants}"
            )
        if any(n < 1 for n in self.finite_n):
            raise InvalidInputException(f"finite N values must be >= 1: {self.finite_n}")
        if self.workers < 1:
            raise InvalidInputException(f"workers must be >= 1, got {self.workers}")
        if self.sampler is Sampler.FIXED and not self.fixed_points:
            raise InvalidInputException("the fixed sampler needs at least one point")

    def as_dict(self) -> dict[str, Any]:
        # Worker count and timings are left out so the output does not depend on them
        return {
            "m_max": self.m_max,
            "d_max": self.d_max,
            "samples_per_cell": self.samples_per_cell,
            "sampler": self.sampler.value,
            "denominator_grid": self.denominator_grid,
            "seed": self.seed,
            "variants": list(self.variants),
            "oracle": self.oracle,
            "finite_n": list(self.finite_n),
            "fixed_points": [p.render() for p in self.fixed_points],
        }


@dataclass(frozen=True)
class GapRecord:
    m: int
    d: int
    sample: int
    p: tuple[ExactRational, ...]
    variant: str
    theorem_gap: ExactRational | None
    gaussian_gap: ExactRational | None = None
    finite_gaps: tuple[tuple[int, ExactRational | None], ...] = ()
    error: str | None = None
    wall_ms: float = 0.0

    @property
    def theorem_sign(self) -> int | None:
        return None if self.theorem_gap is None else sign(self.theorem_gap)

    @property
    def gaussian_sign(self) -> int | None:
        return None if self.gaussian_gap is None else sign(self.gaussian_gap)

    @property
    def is_finding(self) -> bool:
        """The condition and the Gaussian gap disagree on nonnegativity."""
        if self.theorem_sign is None or self.gaussian_sign is None:
            return False
        return (self.theorem_sign < 0) != (self.gaussian_sign < 0)

    def as_dict(self, include_timings: bool = False) -> dict[str, Any]:
        row: dict[str, Any] = {
            "m": self.m,
            "d": self.d,
            "sample": self.sample,
            "variant": self.variant,
            "p": [render_rational(p) for p in self.p],
            "p_float": [render_float(p) for p in self.p],
            "theorem_gap": _exact(self.theorem_gap),
            "theorem_gap_float": _float(self.theorem_gap),
            "theorem_sign": self.theorem_sign,
            "gaussian_gap": _exact(self.gaussian_gap),
            "gaussian_gap_float": _float(self.gaussian_gap),
            "gaussian_sign": self.gaussian_sign,
            "finite_n_gaps": [
                {"N": n, "gap": _exact(gap), "gap_float": _float(gap), "sign": _sign(gap)}
                for n, gap in self.finite_gaps
            ],
            "finding": self.is_finding,
            "error": self.error,
        }
        if include_timings:
            row["wall_ms"] = round(self.wall_ms, 3)
        return row


def _exact(value: ExactRational | None) -> str | None:
    return None if value is None else render_rational(value)


def _float(value: ExactRational | None) -> str | None:
    return None if value is None else render_float(value)


def _sign(value: ExactRational | None) -> int | None:
    return None if value is None else sign(value)


@dataclass(frozen=True)
class KindSummary:
    evaluated: int
    minimum: ExactRational | None
    median: ExactRational | None
    negatives: int

    @classmethod
    def of(cls, values: Sequence[ExactRational | None]) -> "KindSummary":
        known = [value for value in values if value is not None]
        return cls(
            evaluated=len(known),
            minimum=min(known) if known else None,
            median=Fraction(statistics.median(known)) if known else None,
            negatives=sum(1 for value in known if value < 0),
        )

    def as_dict(self) -> dict[str, Any]:
        return {
            "evaluated": self.evaluated,
            "min": _exact(self.minimum),
            "min_float": _float(self.minimum),
            "median": _exact(self.median),
            "median_float": _float(self.median),
            "negatives": self.negatives,
        }


@dataclass(frozen=True)
class CellSummary:
    m: int
    d: int
    kinds: dict[str, KindSummary]
    findings: int

    def as_dict(self) -> dict[str, Any]:
        return {
            "m": self.m,
            "d": self.d,
            "kinds": {kind: summary.as_dict() for kind, summary in self.kinds.items()},
            "findings": self.findings,
        }


@dataclass(frozen=True)
class SweepResult:
    config: SweepConfig
    records: tuple[GapRecord, ...]
    # summary[m - 1][d - 1]
    summary: tuple[tuple[CellSummary, ...], ...]

    @property
    def findings(self) -> tuple[GapRecord, ...]:
        return tuple(record for record in self.records if record.is_finding)


@dataclass(frozen=True)
class _CellTask:
    m: int
    d: int
    sample: int
    p: ProbVector
    variants: tuple[str, ...]
    oracle: bool
    finite_n: tuple[int, ...]


def _timed(compute, errors: list[str]) -> tuple[Any, float]:
    started = time.perf_counter()
    try:
        value = compute()
    except BudgetExceededException as ex:
        errors.append(str(ex))
        value = None
    return value, (time.perf_counter() - started) * 1000


def _evaluate_cell(task: _CellTask) -> list[GapRecord]:
    shared_errors: list[str] = []
    gaussian, gaussian_ms = (
        _timed(lambda: gaussian_gpi_gap(task.p, task.m), shared_errors)
        if task.oracle
        else (None, 0.0)
    )
    finite_gaps = []
    finite_ms = 0.0
    for trials in task.finite_n:
        spec = MultinomialSpec(trials, task.p)
        gap, elapsed = _timed(lambda: scaled_gap_finite(spec, task.m), shared_errors)
        finite_gaps.append((trials, gap))
        finite_ms += elapsed

    records = []
    for variant in task.variants:
        errors = list(shared_errors)
        gap, elapsed = _timed(lambda: variant_gap(task.p, task.m, variant), errors)
        records.append(
            GapRecord(
                m=task.m,
                d=task.d,
                sample=task.sample,
                p=task.p.entries,
                variant=variant,
                theorem_gap=gap,
                gaussian_gap=gaussian,
                finite_gaps=tuple(finite_gaps),
                error="; ".join(errors) or None,
                wall_ms=elapsed + gaussian_ms + finite_ms,
            )
        )
    return records


def _cell_points(config: SweepConfig, m: int, d: int) -> list[ProbVector]:
    if config.sampler is Sampler.FIXED:
        return [p for p in config.fixed_points if p.d == d]
    return [
        sample_simplex(
            d,
            config.sampler,
            config.denominator_grid,
            cell_generator(config.seed, m, d, sample),
        )
        for sample in range(config.samples_per_cell)
    ]


def _tasks(config: SweepConfig) -> Iterator[_CellTask]:
    for m in range(1, config.m_max + 1):
        for d in range(1, config.d_max + 1):
            for sample, p in enumerate(_cell_points(config, m, d)):
                yield _CellTask(
                    m=m,
                    d=d,
                    sample=sample,
                    p=p,
                    variants=config.variants,
                    oracle=config.oracle,
                    finite_n=config.finite_n,
                )


def summarize(config: SweepConfig, records: Sequence[GapRecord]) -> tuple:
    rows = []
    for m in range(1, config.m_max + 1):
        row = []
        for d in range(1, config.d_max + 1):
            cell = [record for record in records if record.m == m and record.d == d]
            kinds: dict[str, KindSummary] = {}
            if config.oracle:
                # One Gaussian value per sample, repeated across variant records
                first_variant = config.variants[0]
                kinds["gaussian"] = KindSummary.of(
                    [r.gaussian_gap for r in cell if r.variant == first_variant]
                )
            for variant in config.variants:
                kinds[f"theorem:{variant}"] = KindSummary.of(
                    [r.theorem_gap for r in cell if r.variant == variant]
                )
            for trials in config.finite_n:
                kinds[f"finite:{trials}"] = KindSummary.of(
                    [
                        gap
                        for r in cell
                        if r.variant == config.variants[0]
                        for n, gap in r.finite_gaps
                        if n == trials
                    ]
                )
            row.append(
                CellSummary(
                    m=m,
                    d=d,
                    kinds=kinds,
                    findings=sum(1 for r in cell if r.is_finding),
                )
            )
        rows.append(tuple(row))
    return tuple(rows)


def run_sweep(config: SweepConfig) -> SweepResult:
    """
    Evaluate every (m, d, sample, variant) record. Records come back in that
    order whatever the worker count, since cells are mapped in order and each
    cell draws from its own stream.
    """
    tasks = list(_tasks(config))
    logger.info(
        f"Sweeping {len(tasks)} points over m <= {config.m_max}, d <= {config.d_max}"
        f" with {config.workers} worker(s)"
    )
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            per_cell = list(pool.map(_evaluate_cell, tasks))
    else:
        per_cell = [_evaluate_cell(task) for task in tasks]

    records = tuple(record for cell in per_cell for record in cell)
    for record in records:
        if record.error:
            logger.warning(
                f"m={record.m}, d={record.d}, sample={record.sample},"
                f" {record.variant}: {record.error}"
            )
        if record.is_finding:
            logger.warning(
                f"Sign disagreement at m={record.m}, d={record.d},"
                f" p={','.join(map(render_rational, record.p))}, {record.variant}:"
                f" condition {record.theorem_sign}, Gaussian {record.gaussian_sign}"
            )
        if record.gaussian_sign is not None and record.gaussian_sign < 0:
            logger.error(
                f"Negative Gaussian gap at m={record.m},"
                f" p={','.join(map(render_rational, record.p))}: {record.gaussian_gap}"
            )

    return SweepResult(config=config, records=records, summary=summarize(config, records))


CSV_COLUMNS: Final = (
    "m",
    "d",
    "sample",
    "variant",
    "p",
    "p_float",
    "theorem_gap",
    "theorem_gap_float",
    "theorem_sign",
    "gaussian_gap",
    "gaussian_gap_float",
    "gaussian_sign",
    "finite_n_gaps",
    "finding",
    "error",
)


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        if value and isinstance(value[0], dict):
            return " ".join(f"{entry['N']}:{entry['gap'] or ''}" for entry in value)
        return " ".join(value)
    return str(value)


def render_csv(result: SweepResult) -> str:
    columns = CSV_COLUMNS + (("wall_ms",) if result.config.include_timings else ())
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for record in result.records:
        row = record.as_dict(result.config.include_timings)
        writer.writerow([_csv_cell(row[column]) for column in columns])
    return buffer.getvalue()


def render_json(result: SweepResult) -> str:
    document = {
        "config": result.config.as_dict(),
        "records": [
            record.as_dict(result.config.include_timings) for record in result.records
        ],
        "summary": [[cell.as_dict() for cell in row] for row in result.summary],
        "findings": len(result.findings),
    }
    return json.dumps(document, indent=2) + "\n"


def render_summary_table(result: SweepResult, kind: str) -> str:
    """Median of one gap kind as an m (rows) by d (columns) text matrix."""
    lines = [f"{kind} (median; rows m = 1..{result.config.m_max}, columns d = 1..)"]
    for row in result.summary:
        cells = []
        for cell in row:
            summary = cell.kinds.get(kind)
            median = None if summary is None else summary.median
            if median is None:
                cells.append(f"{'-':>14}")
            else:
                cells.append(f"{float(median):>14.6g}")
        lines.append(" ".join(cells))
    return "\n".join(lines)


@dataclass(frozen=True)
class ConvergenceRow:
    trials: int
    scaled_gap: ExactRational | None
    error: ExactRational | None
    ratio: float | None
    skipped: bool = False
    reason: str | None = None

    def as_dict(self) -> dict[str, Any]:
        return {
            "N": self.trials,
            "scaled_gap": _exact(self.scaled_gap),
            "scaled_gap_float": _float(self.scaled_gap),
            "error": _exact(self.error),
            "error_float": _float(self.error),
            "ratio": None if self.ratio is None else format(self.ratio, ".17g"),
            "skipped": self.skipped,
            "reason": self.reason,
        }


def run_convergence(
    p: ProbVector, m: int, n_list: Sequence[int], budget: int | None = None
) -> list[ConvergenceRow]:
    """
    Scaled finite-N gaps against the Gaussian limit, with the ratio of each
    error to the next one (about 2 per doubling of N for an O(1/N) error).
    """
    if not n_list or any(n < 1 for n in n_list):
        raise InvalidInputException(f"N list must hold positive integers: {n_list}")
    if any(later <= earlier for earlier, later in zip(n_list, n_list[1:])):
        raise InvalidInputException(f"N list must be strictly ascending: {n_list}")

    limit = gaussian_gpi_gap(p, m)
    rows = []
    previous_error: ExactRational | None = None
    for trials in n_list:
        try:
            gap = scaled_gap_finite(MultinomialSpec(trials, p), m, budget=budget)
        except BudgetExceededException as ex:
            logger.warning(f"Skipping N={trials}: {ex}")
            rows.append(ConvergenceRow(trials, None, None, None, True, str(ex)))
            previous_error = None
            continue
        error = abs(gap - limit)
        ratio = (
            float(previous_error / error)
            if previous_error is not None and error
            else None
        )
        rows.append(ConvergenceRow(trials, gap, error, ratio))
        previous_error = error
    return rows
