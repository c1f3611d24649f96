from typing import Any, Dict, Optional

from src.exporters.base_exporter import BaseExporter, dumps
from src.schemas.report import RunReport
from src.utils.logging import logger


class ReportExporter(BaseExporter):
    """Exporter for RPT v1 run reports; byte-identical for identical reports."""

    def export(self, data: RunReport, name: str = "report.json", metadata: Optional[Dict[str, Any]] = None) -> str:
        path = self.path(name)
        with open(path, "w") as f:
            f.write(dumps(data.model_dump(mode="json")))
        if metadata:
            self.save_metadata(metadata)
        logger.info(f"Report written to {path} ({len(data.criteria)} criteria, passed={data.passed})")
        return path
