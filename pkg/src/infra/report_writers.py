import json
import logging
from typing import Any, Mapping, Sequence

import pandas as pd

from core.errors import ConfigError
from core.verification.models import VerificationReport
from core.verification.services import ReportWriter

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


class PandasReportWriter(ReportWriter):
    """JSON through the json module, CSV and aligned tables through pandas."""

    def render_json(self, payload: Mapping[str, Any]) -> str:
        return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    def render_report(self, report: VerificationReport, fmt: str) -> str:
        if fmt == "json":
            return self.render_json(report.to_json_dict())
        rows = [
            {**record.model_dump(mode="json", by_alias=True), "notes": "; ".join(record.notes)}
            for record in report.checks
        ]
        summary = report.summary
        header = [
            f"schema {report.schema_version}, tool {report.tool_version}",
            f"{summary.passed}/{summary.total} checks passed",
        ]
        return self.render_rows(rows, fmt, header=header)

    def render_rows(
        self,
        rows: Sequence[Mapping[str, Any]] | Mapping[str, Sequence[Any]],
        fmt: str,
        header: Sequence[str] = (),
    ) -> str:
        frame = pd.DataFrame(rows)
        comments = "".join(f"# {line}\n" for line in header)
        if fmt == "csv":
            return comments + frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        if fmt == "table":
            return comments + frame.to_string(index=False) + "\n"
        if fmt == "json":
            return self.render_json({"header": list(header), "rows": frame.to_dict(orient="records")})
        raise ConfigError(f"unknown output format {fmt!r}; expected json, csv or table")
