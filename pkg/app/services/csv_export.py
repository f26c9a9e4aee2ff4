"""
CSV Export Service
Self-describing, byte-reproducible result files
"""
import csv
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from app.core.config import settings
from app.core.exceptions import OutputError
from app.core.logging import logger


class CsvExporter:
    """
    Writes `#`-prefixed `key=value` header comments, one column-name row, then data.

    Floats use a fixed number of significant digits and nothing time-dependent is
    written, so identical inputs give identical bytes.
    """

    def __init__(self, sig_digits: Optional[int] = None):
        self.sig_digits = sig_digits or settings.CSV_SIG_DIGITS

    def format_value(self, value: Any) -> str:
        if isinstance(value, (bool, np.bool_)):
            return str(bool(value)).lower()
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        if isinstance(value, (float, np.floating)):
            return f"{float(value):.{self.sig_digits}g}"
        if hasattr(value, "value"):  # enums
            return str(value.value)
        return str(value)

    @staticmethod
    def sibling(out: Path, tag: str) -> Path:
        """<stem>_<tag><suffix> next to `out`."""
        return out.with_name(f"{out.stem}_{tag}{out.suffix}")

    def write(
        self,
        path: Path,
        header: Dict[str, Any],
        columns: Sequence[str],
        rows: Iterable[Sequence[Any]],
    ) -> Path:
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", newline="", encoding="utf-8") as f:
                for key in sorted(header):
                    f.write(f"# {key}={self.format_value(header[key])}\n")
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(columns)
                count = 0
                for row in rows:
                    writer.writerow([self.format_value(v) for v in row])
                    count += 1
        except OSError as e:
            raise OutputError(str(path), e.strerror or str(e)) from e

        logger.info(f"Wrote {count} rows to {path}")
        return path

    def write_matrix(
        self,
        path: Path,
        header: Dict[str, Any],
        corner: str,
        row_values: np.ndarray,
        col_values: np.ndarray,
        matrix: np.ndarray,
    ) -> Path:
        """First column holds row_values, the column-name row holds col_values."""
        columns: List[str] = [corner] + [self.format_value(c) for c in col_values]
        rows = ([r] + list(values) for r, values in zip(row_values, matrix))
        return self.write(path, header, columns, rows)


csv_exporter = CsvExporter()
