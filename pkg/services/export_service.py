"""
Export Service - Writes result rows as CSV or structured-text records
"""
import csv
import io
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional

logger = logging.getLogger(__name__)


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def render_csv(rows: List[Dict[str, Any]], columns: List[str]) -> str:
    """Header row naming every column, then one line per row."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c, "")) for c in columns])
    return buffer.getvalue()


def render_records(rows: List[Dict[str, Any]], columns: List[str]) -> str:
    """One JSON object per line, keys in column order."""
    lines = []
    for row in rows:
        lines.append(json.dumps({c: row.get(c, "") for c in columns}, ensure_ascii=False))
    return "".join(line + "\n" for line in lines)


class ExportService:
    """
    Service for emitting tables. stdout carries data only.
    """

    RENDERERS = {
        "csv": render_csv,
        "structured-text": render_records,
    }

    def render(self, rows: List[Dict[str, Any]], columns: List[str], fmt: str) -> str:
        renderer = self.RENDERERS.get(fmt)
        if renderer is None:
            raise ValueError(f"unknown output format {fmt!r}")
        return renderer(rows, columns)

    def write(self, rows: List[Dict[str, Any]], columns: List[str], fmt: str = "csv",
              path: Optional[str] = None) -> dict:
        """
        Write rows to path, or to stdout when path is None.

        Returns:
            Dict containing success, message, path.
        """
        result = {"success": False, "message": "", "path": path}
        text = self.render(rows, columns, fmt)
        if path is None:
            sys.stdout.write(text)
            sys.stdout.flush()
            result.update(success=True, message=f"{len(rows)} rows written to stdout")
            return result
        try:
            directory = os.path.dirname(path)
            if directory:
                os.makedirs(directory, exist_ok=True)
            with open(path, 'w', encoding='utf-8', newline='') as f:
                f.write(text)
            result.update(success=True, message=f"{len(rows)} rows written to {path}")
            logger.debug("wrote %d rows to %s", len(rows), path)
        except IOError as e:
            result["message"] = f"cannot write {path}: {e}"
            logger.error(result["message"])
        return result
