"""
Run artifact exporters.
"""

from src.exporters.base_exporter import BaseExporter, dumps
from src.exporters.csv_exporter import CSVExporter
from src.exporters.report_exporter import ReportExporter
from src.exporters.snapshot_exporter import SnapshotExporter
