"""Report rendering: JSON for machines, aligned text tables for people."""

from typing import Any, List

import pandas as pd

from styleadapt.domain.models import EvalReport, PipelineReport


class ReportRenderer:
    """Helpers producing the human-readable views of reports."""

    @classmethod
    def eval_table(cls, report: EvalReport) -> str:
        """Per-class accuracy table followed by the confusion matrix."""
        per_class = pd.DataFrame(
            {
                "class": report.class_names,
                "samples": [sum(row) for row in report.confusion_matrix],
                "accuracy": [
                    cls._fmt(report.per_class_accuracy.get(name))
                    for name in report.class_names
                ],
            }
        )
        confusion = pd.DataFrame(
            report.confusion_matrix, index=report.class_names, columns=report.class_names
        )
        lines: List[str] = [
            f"method: {report.method}",
            f"top-1 accuracy: {report.top1_accuracy:.4f} ({report.sample_count} samples)",
            "",
            per_class.to_string(index=False),
            "",
            "confusion (rows true, columns predicted):",
            confusion.to_string(),
        ]
        return "\n".join(lines)

    @classmethod
    def pipeline_table(cls, report: PipelineReport) -> str:
        rows = [{"model": report.adapted.method, "top1": cls._fmt(report.adapted.top1_accuracy)}]
        if report.baseline is not None:
            rows.append({"model": report.baseline.method, "top1": cls._fmt(report.baseline.top1_accuracy)})
        summary = pd.DataFrame(rows)
        lines = [
            f"method: {report.method}  seed: {report.seed}  target pool: {report.target_pool_size}",
            "",
            summary.to_string(index=False),
        ]
        if report.gain is not None:
            lines.append(f"gain over photo-only: {report.gain:+.4f}")
        if report.modality is not None:
            lines.append(f"modality head accuracy: {report.modality.accuracy:.4f}")
        lines += ["", cls.eval_table(report.adapted)]
        return "\n".join(lines)

    @staticmethod
    def _fmt(value: Any) -> str:
        return "n/a" if value is None else f"{value:.4f}"
