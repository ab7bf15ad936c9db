"""Rubric scores, judge-output parsing, aggregation, and report emission.

The rubric totals ten points over four capped components: analysis (3),
mitigation (3), depth (2), clarity (2). Judges answer with a mandatory
machine-readable block (two SCORES lines) followed by prose justification.
Human-expert scores travel through the same verdict CSV with judge ids of
the form ``human:<name>`` and are aggregated separately from the judge
ensemble, never mixed into it.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass
from pathlib import Path

from .errors import VerdictError

PHASES = ("pre", "post")

#: Component caps, in verdict-CSV column order; they sum to ten.
CAPS = {"analysis": 3.0, "mitigation": 3.0, "depth": 2.0, "clarity": 2.0}


def is_human_judge(judge_id: str) -> bool:
    return judge_id.startswith("human:")


@dataclass(frozen=True)
class RubricScore:
    """One scored response: four capped components plus justification."""

    analysis: float
    mitigation: float
    depth: float
    clarity: float
    justification: str = ""

    def __post_init__(self) -> None:
        for name, cap in CAPS.items():
            value = getattr(self, name)
            if not 0.0 <= value <= cap:
                raise VerdictError(f"{name} score {value} outside [0, {cap:g}]")

    @property
    def total(self) -> float:
        return self.analysis + self.mitigation + self.depth + self.clarity


@dataclass(frozen=True)
class JudgeVerdict:
    """One judge's scores for a scenario's pre (A) and post (B) responses."""

    judge_id: str
    scenario_id: str
    score_pre: RubricScore
    score_post: RubricScore


_SCORES_RE = {
    label: re.compile(
        rf"SCORES\s+{label}\s*:\s*(\S+)\s*/\s*3\s+(\S+)\s*/\s*3\s+(\S+)\s*/\s*2\s+(\S+)\s*/\s*2",
        re.IGNORECASE,
    )
    for label in ("A", "B")
}


def _parse_block(text: str, label: str) -> tuple[float, float, float, float]:
    m = _SCORES_RE[label].search(text)
    if m is None:
        raise VerdictError(f"judge output is missing the 'SCORES {label}:' block")
    values = []
    for component, raw in zip(CAPS, m.groups()):
        try:
            values.append(float(raw))
        except ValueError:
            raise VerdictError(f"SCORES {label}: non-numeric {component} value {raw!r}") from None
    return tuple(values)  # type: ignore[return-value]


def parse_judge_response(text: str, judge_id: str = "", scenario_id: str = "") -> JudgeVerdict:
    """Parse the two mandatory SCORES lines; the rest is justification.

    The block format is ``SCORES A: a/3 m/3 d/2 c/2`` (whitespace-tolerant,
    decimals allowed), once for A (pre) and once for B (post). Components
    are validated against their caps.
    """
    a = _parse_block(text, "A")
    b = _parse_block(text, "B")
    prose_lines = [
        line for line in text.splitlines() if not re.match(r"\s*SCORES\s+[AB]\s*:", line, re.IGNORECASE)
    ]
    justification = "\n".join(prose_lines).strip()
    return JudgeVerdict(
        judge_id=judge_id,
        scenario_id=scenario_id,
        score_pre=RubricScore(*a, justification=justification),
        score_post=RubricScore(*b, justification=justification),
    )


@dataclass
class EvaluationReport:
    """Per-(dataset, judge) means with dataset and overall summaries.

    ``cells[dataset][judge_id]`` holds mean_pre/mean_post/delta/n for the
    verdicts observed in that cell; absent cells simply do not appear.
    Summaries carry the judge-ensemble means (mean of per-judge means,
    non-human judges only) and, when present, the human means.
    """

    cells: dict[str, dict[str, dict[str, float]]]
    datasets: dict[str, dict[str, float]]
    overall: dict[str, float]

    def to_dict(self) -> dict:
        return {"cells": self.cells, "datasets": self.datasets, "overall": self.overall}

    @classmethod
    def from_dict(cls, obj: dict) -> "EvaluationReport":
        return cls(
            cells=obj.get("cells", {}),
            datasets=obj.get("datasets", {}),
            overall=obj.get("overall", {}),
        )


def _mean(values: list[float]) -> float:
    return sum(values) / len(values)


def _summary(cells: dict[str, dict[str, float]]) -> dict[str, float]:
    judges = sorted(j for j in cells if not is_human_judge(j))
    humans = sorted(j for j in cells if is_human_judge(j))
    summary: dict[str, float] = {"n_judges": len(judges), "n_human": len(humans)}
    if judges:
        pre = _mean([cells[j]["mean_pre"] for j in judges])
        post = _mean([cells[j]["mean_post"] for j in judges])
        summary.update(judges_mean_pre=pre, judges_mean_post=post, judges_delta=pre - post)
    if humans:
        pre = _mean([cells[j]["mean_pre"] for j in humans])
        post = _mean([cells[j]["mean_post"] for j in humans])
        summary.update(human_mean_pre=pre, human_mean_post=post, human_delta=pre - post)
    return summary


def aggregate(verdicts: list[JudgeVerdict], dataset_map: dict[str, str] | None = None) -> EvaluationReport:
    """Mean pre/post totals per (dataset, judge), plus summary rows.

    ``dataset_map`` sends scenario ids to dataset names; with None every
    verdict lands in the dataset "all". A scenario id missing from the map
    is an error. Cells without verdicts are absent, never zero-filled.
    """
    if not verdicts:
        raise VerdictError("cannot aggregate zero verdicts")
    pre: dict[tuple[str, str], list[float]] = {}
    post: dict[tuple[str, str], list[float]] = {}
    for verdict in verdicts:
        if dataset_map is None:
            dataset = "all"
        else:
            try:
                dataset = dataset_map[verdict.scenario_id]
            except KeyError:
                raise VerdictError(f"scenario id {verdict.scenario_id!r} is not in the dataset map") from None
        key = (dataset, verdict.judge_id)
        pre.setdefault(key, []).append(verdict.score_pre.total)
        post.setdefault(key, []).append(verdict.score_post.total)

    cells: dict[str, dict[str, dict[str, float]]] = {}
    for (dataset, judge_id), totals in pre.items():
        mean_pre = _mean(totals)
        mean_post = _mean(post[(dataset, judge_id)])
        cells.setdefault(dataset, {})[judge_id] = {
            "mean_pre": mean_pre,
            "mean_post": mean_post,
            "delta": mean_pre - mean_post,
            "n": len(totals),
        }

    datasets = {ds: _summary(judge_cells) for ds, judge_cells in cells.items()}
    flat: dict[str, dict[str, float]] = {}
    for ds in cells:
        for judge_id, cell in cells[ds].items():
            merged = flat.setdefault(judge_id, {"mean_pre": 0.0, "mean_post": 0.0, "_n": 0})
            n = merged["_n"]
            merged["mean_pre"] = (merged["mean_pre"] * n + cell["mean_pre"]) / (n + 1)
            merged["mean_post"] = (merged["mean_post"] * n + cell["mean_post"]) / (n + 1)
            merged["_n"] = n + 1
    overall = _summary(flat)
    return EvaluationReport(cells=cells, datasets=datasets, overall=overall)


def emit_report(report: EvaluationReport, format: str = "json") -> str:
    """Render the report: lossless JSON, chart-ready CSV, or Markdown."""
    if format == "json":
        return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    if format == "csv":
        lines = ["dataset,judge_id,phase,mean_total,n_verdicts"]
        for dataset in sorted(report.cells):
            for judge_id in sorted(report.cells[dataset]):
                cell = report.cells[dataset][judge_id]
                for phase in PHASES:
                    lines.append(
                        f"{dataset},{judge_id},{phase},{cell['mean_' + phase]:.6f},{int(cell['n'])}"
                    )
        return "\n".join(lines) + "\n"
    if format == "markdown":
        return _markdown_report(report)
    raise VerdictError(f"unknown report format {format!r}; expected json, csv, or markdown")


def _markdown_report(report: EvaluationReport) -> str:
    datasets = sorted(report.cells)
    judges = sorted({j for ds in datasets for j in report.cells[ds]})
    header = ["Judge"]
    for ds in datasets:
        header += [f"{ds} pre", f"{ds} post", f"{ds} delta"]
    lines = [
        "| " + " | ".join(header) + " |",
        "|" + "---|" * len(header),
    ]

    def row(name: str, values: list[str]) -> str:
        return "| " + " | ".join([name] + values) + " |"

    for judge_id in judges:
        values = []
        for ds in datasets:
            cell = report.cells[ds].get(judge_id)
            if cell is None:
                values += ["-", "-", "-"]
            else:
                values += [f"{cell['mean_pre']:.2f}", f"{cell['mean_post']:.2f}", f"{cell['delta']:.2f}"]
        lines.append(row(judge_id, values))
    ensemble = []
    human = []
    for ds in datasets:
        summary = report.datasets[ds]
        if "judges_mean_pre" in summary:
            ensemble += [
                f"{summary['judges_mean_pre']:.2f}",
                f"{summary['judges_mean_post']:.2f}",
                f"{summary['judges_delta']:.2f}",
            ]
        else:
            ensemble += ["-", "-", "-"]
        if "human_mean_pre" in summary:
            human += [
                f"{summary['human_mean_pre']:.2f}",
                f"{summary['human_mean_post']:.2f}",
                f"{summary['human_delta']:.2f}",
            ]
        else:
            human += ["-", "-", "-"]
    lines.append(row("judge ensemble", ensemble))
    lines.append(row("human experts", human))
    return "\n".join(lines) + "\n"


def load_verdicts_csv(path: str | Path) -> list[JudgeVerdict]:
    """Read the verdict CSV; every (scenario, judge) needs a pre and a post row."""
    path = Path(path)
    if not path.is_file():
        raise VerdictError(f"verdict CSV not found: {path}")
    expected = ["scenario_id", "judge_id", "phase", "analysis", "mitigation", "depth", "clarity", "justification"]
    rows: dict[tuple[str, str], dict[str, RubricScore]] = {}
    order: list[tuple[str, str]] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise VerdictError(f"{path}: empty file") from None
        if [h.strip() for h in header] != expected:
            raise VerdictError(f"{path}: line 1: expected header {','.join(expected)!r}")
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(expected):
                raise VerdictError(f"{path}: line {line}: expected {len(expected)} fields, got {len(row)}")
            scenario_id, judge_id, phase = row[0], row[1], row[2]
            if phase not in PHASES:
                raise VerdictError(f"{path}: line {line}: invalid phase {phase!r}")
            try:
                components = [float(v) for v in row[3:7]]
            except ValueError:
                raise VerdictError(f"{path}: line {line}: non-numeric score component") from None
            try:
                score = RubricScore(*components, justification=row[7])
            except VerdictError as exc:
                raise VerdictError(f"{path}: line {line}: {exc}") from None
            key = (scenario_id, judge_id)
            if key not in rows:
                rows[key] = {}
                order.append(key)
            if phase in rows[key]:
                raise VerdictError(f"{path}: line {line}: duplicate {phase} row for {key}")
            rows[key][phase] = score
    verdicts: list[JudgeVerdict] = []
    for key in order:
        scenario_id, judge_id = key
        phases = rows[key]
        if set(phases) != set(PHASES):
            missing = set(PHASES) - set(phases)
            raise VerdictError(f"{path}: ({scenario_id}, {judge_id}) is missing its {missing.pop()} row")
        verdicts.append(
            JudgeVerdict(
                judge_id=judge_id,
                scenario_id=scenario_id,
                score_pre=phases["pre"],
                score_post=phases["post"],
            )
        )
    return verdicts


def save_verdicts_csv(verdicts: list[JudgeVerdict], path: str | Path) -> None:
    """Write verdicts in the same CSV schema load_verdicts_csv reads."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["scenario_id", "judge_id", "phase", "analysis", "mitigation", "depth", "clarity", "justification"])
        for v in verdicts:
            for phase, score in (("pre", v.score_pre), ("post", v.score_post)):
                writer.writerow(
                    [
                        v.scenario_id,
                        v.judge_id,
                        phase,
                        f"{score.analysis:g}",
                        f"{score.mitigation:g}",
                        f"{score.depth:g}",
                        f"{score.clarity:g}",
                        score.justification,
                    ]
                )
