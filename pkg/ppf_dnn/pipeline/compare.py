"""
Train every requested mode on the same dataset and seed, then score each one
on the test split.

fixed-epochs trains exactly max_epochs (patience is switched off) so rows
differ only in what the mode changes. stop-on-accuracy stops each mode once
the validation split meets the target proportion.
"""

from pathlib import Path
from typing import List, Sequence

from ..exceptions import NonFiniteGradientError, TrainingDivergedError
from ..grid import NetworkCase
from ..io.writer import write_csv_table, write_json_report
from ..logging_config import get_logger
from ..models.enums import Mode, Protocol
from ..models.inputs import TrainConfig
from ..models.outputs import ComparisonReport, ComparisonRow
from ..training.trainer import DEFAULT_HIDDEN, train
from .metrics import evaluate_indexes

logger = get_logger("pipeline")

CSV_COLUMNS = [
    "mode", "v_loss", "p_vm", "p_va", "p_pf", "p_qf", "n_epoch", "seconds_per_epoch",
    "stop_reason", "error",
]


def protocol_config(base: TrainConfig, mode: Mode, protocol: Protocol, seed: int) -> TrainConfig:
    update = {"mode": mode, "seed": seed}
    if protocol == Protocol.FIXED_EPOCHS:
        update["stop_on_accuracy"] = False
        update["patience"] = base.max_epochs + 1
    else:
        update["stop_on_accuracy"] = True
    return base.model_copy(update=update)


def compare_methods(
    modes: Sequence[Mode],
    dataset,
    case: NetworkCase,
    protocol: Protocol = Protocol.FIXED_EPOCHS,
    base: TrainConfig = None,
    seed: int = 0,
    hidden: Sequence[int] = DEFAULT_HIDDEN,
) -> ComparisonReport:
    """
    One row per mode, in the order given. A mode that diverges gets a row
    with its error and no metrics; the others still run.
    """
    base = base or TrainConfig()
    report = ComparisonReport(case=case.name, protocol=protocol, seed=seed)

    for mode in modes:
        cfg = protocol_config(base, Mode(mode), protocol, seed)
        try:
            model, history = train(cfg, dataset, case, hidden=hidden)
        except (TrainingDivergedError, NonFiniteGradientError) as e:
            logger.error(f"{mode}: {e}")
            report.rows.append(ComparisonRow(mode=mode, error=str(e)))
            continue

        metrics = evaluate_indexes(
            model, dataset, case, cfg.thresholds, split="test", n_epoch=history.n_epochs
        )
        report.rows.append(ComparisonRow(
            mode=mode,
            metrics=metrics,
            n_epoch=history.n_epochs,
            seconds_per_epoch=history.seconds_per_epoch(),
            stop_reason=history.stop_reason,
        ))
        logger.info(
            f"{mode}: p_vm {metrics.p_vm:.2%} p_va {metrics.p_va:.2%} "
            f"p_pf {metrics.p_pf:.2%} p_qf {metrics.p_qf:.2%} after {history.n_epochs} epochs"
        )

    return report


def comparison_rows(report: ComparisonReport) -> List[list]:
    rows = []
    for r in report.rows:
        m = r.metrics
        scores = [m.v_loss, m.p_vm, m.p_va, m.p_pf, m.p_qf] if m else ["", "", "", "", ""]
        rows.append([
            r.mode.value, *scores, r.n_epoch, r.seconds_per_epoch,
            r.stop_reason.value if r.stop_reason else "", r.error or "",
        ])
    return rows


def export_comparison(report: ComparisonReport, out_dir: Path) -> List[Path]:
    """comparison.json and comparison.csv"""
    out_dir = Path(out_dir)
    return [
        write_json_report(report, out_dir / "comparison.json"),
        write_csv_table(out_dir / "comparison.csv", CSV_COLUMNS, comparison_rows(report)),
    ]
