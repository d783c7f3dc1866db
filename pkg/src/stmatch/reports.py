"""CSV emission for reports and ranked lists.

All files are RFC-4180-style: a header row, comma separation, ``\n`` line
ends.  Numeric fields use ``repr`` so a float round-trips exactly.  Every
row carries the run seed and the full JSON-encoded run configuration as its
trailing columns, which makes each artifact self-describing; byte-identical
runs therefore produce byte-identical files.
"""

from __future__ import annotations

import csv
import json

from .evaluation import EvalReport
from .identification import RankedList
from .model import FitReport


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_config_json(config_echo: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config_echo, fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_fit_report_csv(report: FitReport, path, seed: int, config_json: str,
                         fold: int | str = "all") -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(["fold", "iteration", "objective", "converged", "seed", "run_config"])
        for i, obj in enumerate(report.objective_trace, start=1):
            w.writerow([fold, i, _fmt(obj), report.converged, seed, config_json])


def write_summary_csv(report: EvalReport, path, config_json: str) -> None:
    """Per-fold rank-1/rank-5 rows followed by mean and std rows."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(["protocol", "fold", "rank1", "rank5",
                    "gallery_identities", "seed", "run_config"])
        for i in range(report.n_folds):
            w.writerow([report.protocol, i, _fmt(report.fold_rank1[i]),
                        _fmt(report.fold_rank5[i]),
                        report.gallery_identity_counts[i],
                        report.seed, config_json])
        w.writerow([report.protocol, "mean", _fmt(report.mean_rank1),
                    _fmt(report.mean_rank5), "", report.seed, config_json])
        w.writerow([report.protocol, f"std({report.std_convention})",
                    _fmt(report.std_rank1), _fmt(report.std_rank5), "",
                    report.seed, config_json])


def write_cmc_csv(report: EvalReport, path, config_json: str) -> None:
    """Plot-ready (rank, accuracy) rows, one block per fold."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(["protocol", "fold", "rank", "accuracy", "seed", "run_config"])
        for i, curve in enumerate(report.fold_curves):
            for rank, acc in enumerate(curve.accuracy_at_rank, start=1):
                w.writerow([report.protocol, i, rank, _fmt(acc),
                            report.seed, config_json])


def write_fold_fit_reports_csv(report: EvalReport, path, config_json: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(["fold", "iteration", "objective", "converged", "seed", "run_config"])
        for i, fr in enumerate(report.fit_reports):
            for j, obj in enumerate(fr.objective_trace, start=1):
                w.writerow([i, j, _fmt(obj), fr.converged, report.seed, config_json])


def write_ranked_csv(ranked: RankedList, path, seed: int, config_json: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(["rank", "identity", "distance", "seed", "run_config"])
        for position, (identity, distance) in enumerate(ranked.entries, start=1):
            w.writerow([position, identity, _fmt(distance), seed, config_json])
