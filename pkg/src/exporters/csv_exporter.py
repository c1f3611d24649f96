from typing import Any, Dict, List, Optional, Union

import pandas as pd

from src.exporters.base_exporter import BaseExporter
from src.utils.logging import logger


class CSVExporter(BaseExporter):
    """
    Exporter for traces and plot data (residual vs step, theta-variation vs refinement).
    """

    def export(self, data: Union[pd.DataFrame, Dict[str, Any], List[Dict[str, Any]]], name: str = "data.csv",
               metadata: Optional[Dict[str, Any]] = None) -> str:
        """
        Export rows to CSV.

        Args:
            data: DataFrame, column dict or list of row dicts
            name: CSV file name
            metadata: Optional metadata saved as <name>.json

        Returns:
            Path to the CSV file
        """
        if not isinstance(data, pd.DataFrame):
            data = pd.DataFrame(data)
        csv_path = self.path(name)
        data.to_csv(csv_path, index=False, float_format="%.17g")
        if metadata:
            self.save_metadata(metadata, name.rsplit(".", 1)[0] + ".json")
        logger.info(f"Exported {len(data)} rows to CSV: {csv_path}")
        return csv_path
