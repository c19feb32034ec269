import csv
import statistics
from collections import defaultdict
from dataclasses import asdict, dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Union

from src.harness.experiment import ResultRecord

SUMMARY_HEADER = ["dataset", "partition", "alpha", "clients", "depth", "method", "n", "mean", "std", "single_trial"]


@dataclass(frozen=True)
class SummaryRow:
    dataset: str
    partition: str
    alpha: Optional[float]
    clients: int
    depth: str
    method: str
    n: int
    mean: float
    std: float
    single_trial: bool

    def to_dict(self) -> Dict:
        return asdict(self)


def _field(record: Union[ResultRecord, Mapping], name: str):
    return record[name] if isinstance(record, Mapping) else getattr(record, name)


def _alpha_key(alpha) -> float:
    return -1.0 if alpha is None else float(alpha)


def summarize(records: Iterable[Union[ResultRecord, Mapping]]) -> List[SummaryRow]:
    """Mean and sample std of accuracy per (setting, method).

    Rows come back sorted by setting then method. A group of one trial gets
    std 0 and is flagged.
    """
    groups = defaultdict(list)
    for record in records:
        alpha = _field(record, "alpha")
        key = (
            _field(record, "dataset"),
            _field(record, "partition"),
            None if alpha in (None, "") else float(alpha),
            int(_field(record, "clients")),
            str(_field(record, "depth")),
            _field(record, "method"),
        )
        groups[key].append(float(_field(record, "accuracy")))

    rows = []
    for key in sorted(groups, key=lambda k: (k[0], k[1], _alpha_key(k[2]), k[3], k[4], k[5])):
        accuracies = groups[key]
        n = len(accuracies)
        std = statistics.stdev(accuracies) if n > 1 else 0.0
        rows.append(SummaryRow(*key, n=n, mean=statistics.fmean(accuracies), std=std, single_trial=n == 1))
    return rows


def format_table(rows: List[SummaryRow]) -> str:
    lines = [f"{'dataset':<10} {'partition':<13} {'alpha':>7} {'J':>3} {'depth':>5} {'method':<18} "
             f"{'n':>3} {'mean':>8} {'std':>8}"]
    for row in rows:
        alpha = "-" if row.alpha is None else f"{row.alpha:g}"
        flag = " *" if row.single_trial else ""
        lines.append(f"{row.dataset:<10} {row.partition:<13} {alpha:>7} {row.clients:>3} {row.depth:>5} "
                     f"{row.method:<18} {row.n:>3} {row.mean * 100:>7.2f}% {row.std * 100:>7.2f}%{flag}")
    if any(row.single_trial for row in rows):
        lines.append("* single trial, std reported as 0")
    return "\n".join(lines)


def write_summary_csv(rows: List[SummaryRow], path: str) -> str:
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=SUMMARY_HEADER)
        writer.writeheader()
        for row in rows:
            data = row.to_dict()
            data["alpha"] = "" if row.alpha is None else repr(row.alpha)
            writer.writerow(data)
    return path
