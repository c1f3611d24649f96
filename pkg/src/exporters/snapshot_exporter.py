from typing import Any, Dict, Optional

import numpy as np

from src.exporters.base_exporter import BaseExporter
from src.fields.field import GridField
from src.fields.snapshot import write_snapshot
from src.utils.logging import logger


class SnapshotExporter(BaseExporter):
    """Exporter for GFLD v1 field snapshots and strip geometry manifests."""

    def export(self, data: Any, name: str, metadata: Optional[Dict[str, Any]] = None, kind: Optional[str] = None) -> str:
        """
        Write a field (or a raw array with an explicit kind) as a snapshot.

        Returns:
            Path to the snapshot
        """
        if isinstance(data, GridField):
            values, kind = data.values, kind or data.kind
        else:
            values = np.asarray(data)
            kind = kind or "torus"
        path = str(write_snapshot(self.path(name), values, kind))
        if metadata:
            self.save_metadata(metadata, name.rsplit(".", 1)[0] + ".json")
        logger.debug(f"Wrote {kind} snapshot {values.shape} to {path}")
        return path

    def export_geometry(self, geom, prefix: str = "geometry") -> Dict[str, str]:
        """GEOM v1 manifest plus a snapshot of the boundary curve nodes."""
        nodes = self.export(geom.grid.curve.nodes, f"{prefix}/boundary.gfld", kind="curve")
        manifest = dict(geom.manifest())
        manifest["boundary_snapshot"] = "boundary.gfld"
        return {"manifest": self.save_metadata(manifest, f"{prefix}/manifest.json"), "boundary": nodes}
