import csv
import logging
import os
import typing
from dataclasses import dataclass

from halognn._utils.text import render_table
from halognn.gnn.config import PRESETS, GnnConfig, Preset
from halognn.gnn.model import init_params
from halognn.graph.features import EdgeFeatureSet
from halognn.harness.consistency import ConsistencyReport, ConsistencyRow, EquivalenceReport
from halognn.harness.scaling import ScalingReport, ScalingRow
from halognn.nn.mlp import NormPlacement
from halognn.nn.params import param_count

log = logging.getLogger(__name__)

PUBLISHED_PARAMETER_COUNTS: dict[Preset, int] = {"small": 3979, "large": 91459}
_CONVENTIONS: tuple[tuple[NormPlacement, EdgeFeatureSet], ...] = (("hidden", "full"), ("output", "geometric"))


@dataclass(slots=True, frozen=True)
class ParameterRow:
    preset: Preset
    norm_placement: NormPlacement
    edge_features: EdgeFeatureSet
    count: int
    target: int

    @property
    def deviation(self) -> int:
        return self.count - self.target


def parameter_report() -> list[ParameterRow]:
    """Trainable parameter counts of both presets under both MLP conventions, beside the published targets."""
    rows = []
    for preset in PRESETS:
        for placement, edge_features in _CONVENTIONS:
            config = GnnConfig.preset(preset, norm_placement=placement, edge_features=edge_features)
            rows.append(
                ParameterRow(preset, placement, edge_features, param_count(init_params(config)), PUBLISHED_PARAMETER_COUNTS[preset])
            )
    return rows


def format_parameter_report(rows: typing.Sequence[ParameterRow]) -> str:
    return render_table(
        ("preset", "norm", "edge features", "parameters", "target", "deviation"),
        [(r.preset, r.norm_placement, r.edge_features, r.count, r.target, r.deviation) for r in rows],
    )


def _write(path: str | os.PathLike, header: typing.Sequence[str], rows: typing.Iterable[typing.Sequence], seed: int) -> None:
    with open(path, "w", newline="") as f:
        f.write(f"# seed={seed}\n")
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)
    log.info(f"Wrote {path}")


def write_consistency_csv(report: ConsistencyReport, path: str | os.PathLike) -> None:
    _write(path, ConsistencyRow.CSV_HEADER, [row.as_tuple() for row in report.rows], report.seed)


def write_scaling_csv(report: ScalingReport, path: str | os.PathLike) -> None:
    _write(path, ScalingRow.CSV_HEADER, [row.as_tuple() for row in report.rows], report.config.seed)


def write_equivalence_csv(report: EquivalenceReport, path: str | os.PathLike, seed: int) -> None:
    header = ("iteration", "loss_reference", "loss_consistent", "loss_inconsistent", "deviation", "deviation_inconsistent")
    _write(path, header, report.rows(), seed)


def read_csv(path: str | os.PathLike) -> tuple[list[str], list[str], list[list[str]]]:
    """(comment lines, header, rows) of a report CSV."""
    with open(path, newline="") as f:
        lines = f.read().splitlines()
    comments = [line for line in lines if line.startswith("#")]
    records = list(csv.reader(line for line in lines if line and not line.startswith("#")))
    if not records:
        return comments, [], []
    return comments, records[0], records[1:]


def _cell(value: str) -> typing.Any:
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            continue
    return value


def render_csv(path: str | os.PathLike) -> str:
    """Aligned text table of any report CSV, preceded by its comment lines."""
    comments, header, rows = read_csv(path)
    table = render_table(header, [[_cell(c) for c in row] for row in rows]) if header else ""
    return "\n".join([*comments, table])


def format_consistency_summary(report: ConsistencyReport) -> str:
    rows = [
        (row.num_ranks, row.loss_consistent, row.loss_deviation, row.loss_deviation_inconsistent, row.output_deviation_inconsistent)
        for row in report.rows
    ]
    table = render_table(("R", "loss", "rel dev", "rel dev (none)", "output dev (none)"), rows)
    verdict = "PASSED" if report.passed else "FAILED:\n  " + "\n  ".join(report.failures())
    return f"{table}\nmode={report.mode} seed={report.seed}: {verdict}"
