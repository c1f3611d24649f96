from abc import ABC, abstractmethod
from typing import Any, Dict, Optional
import json
import math
import os
import shutil

from src.utils.config import settings


def _json_safe(value: Any) -> Any:
    """Replace non-finite floats by None so the output stays strict JSON."""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if hasattr(value, "item") and callable(value.item):
        return _json_safe(value.item())
    return value


def dumps(data: Any) -> str:
    """Deterministic JSON: sorted keys, fixed indent, trailing newline."""
    return json.dumps(_json_safe(data), indent=2, sort_keys=True) + "\n"


class BaseExporter(ABC):
    """
    Base class for run artifact exporters.

    Every exporter writes below one output directory; file contents depend
    only on the data passed in (no timestamps, sorted keys).
    """

    def __init__(self, output_dir: Optional[str] = None):
        """
        Initialize the exporter.

        Args:
            output_dir: Directory to save exported files (settings.OUTPUT_DIR by default)
        """
        self.output_dir = output_dir or settings.OUTPUT_DIR
        os.makedirs(self.output_dir, exist_ok=True)

    @abstractmethod
    def export(self, data: Any, name: str, metadata: Optional[Dict[str, Any]] = None) -> str:
        """
        Export data to a file in the output directory.

        Args:
            data: The data to export
            name: File name relative to the output directory
            metadata: Optional metadata saved next to the file

        Returns:
            Path to the exported file
        """
        pass

    def path(self, name: str) -> str:
        path = os.path.join(self.output_dir, name)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        return path

    def save_metadata(self, metadata: Dict[str, Any], name: str = "metadata.json") -> str:
        """
        Save metadata to a JSON file.

        Returns:
            Path to the metadata file
        """
        metadata_path = self.path(name)
        with open(metadata_path, "w") as f:
            f.write(dumps(metadata))
        return metadata_path

    def cleanup(self) -> None:
        if os.path.exists(self.output_dir):
            shutil.rmtree(self.output_dir)
