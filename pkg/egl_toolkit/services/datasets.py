"""
Dataset service: embedded illustration datasets and CSV/Excel ingestion.
"""

import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import pandas as pd
from pandas.errors import EmptyDataError, ParserError

from egl_toolkit.core.exceptions import InvalidData, ParseError, UnknownDataset
from egl_toolkit.models.dataset import Dataset

logger = logging.getLogger(__name__)

ColumnSelector = Union[str, int, None]

# Remission times (months) of 128 bladder cancer patients, in table order
BLADDER_REMISSION = (
    0.08, 2.09, 3.48, 4.87, 6.94, 8.66, 13.11, 23.63, 0.2, 2.23, 0.26, 0.31, 0.73,
    0.52, 4.98, 6.97, 9.02, 13.29, 0.4, 2.26, 3.57, 5.06, 7.09, 11.98, 4.51, 2.07,
    0.22, 13.8, 25.74, 0.5, 2.46, 3.64, 5.09, 7.26, 9.47, 14.24, 19.13, 6.54, 3.36,
    0.82, 0.51, 2.54, 3.7, 5.17, 7.28, 9.74, 14.76, 26.31, 0.81, 1.76, 8.53, 6.93,
    0.62, 3.82, 5.32, 7.32, 10.06, 14.77, 32.15, 2.64, 3.88, 5.32, 3.25, 12.03, 8.65,
    0.39, 10.34, 14.83, 34.26, 0.9, 2.69, 4.18, 5.34, 7.59, 10.66, 4.5, 20.28, 12.63,
    0.96, 36.66, 1.05, 2.69, 4.23, 5.41, 7.62, 10.75, 16.62, 43.01, 6.25, 2.02, 22.69,
    0.19, 2.75, 4.26, 5.41, 7.63, 17.12, 46.12, 1.26, 2.83, 4.33, 8.37, 3.36, 5.49,
    0.66, 11.25, 17.14, 79.05, 1.35, 2.87, 5.62, 7.87, 11.64, 17.36, 12.02, 6.76,
    0.4, 3.02, 4.34, 5.71, 7.93, 11.79, 18.1, 1.46, 4.4, 5.85, 2.02, 12.07,
)

# Waiting times (minutes) of 100 bank customers
BANK_WAITING = (
    0.8, 0.8, 1.3, 1.5, 1.8, 1.9, 1.9, 2.1, 2.6, 2.7,
    2.9, 3.1, 3.2, 3.3, 3.5, 3.6, 4.0, 4.1, 4.2, 4.2,
    4.3, 4.3, 4.4, 4.4, 4.6, 4.7, 4.7, 4.8, 4.9, 4.9,
    5.0, 5.3, 5.5, 5.7, 5.7, 6.1, 6.2, 6.2, 6.2, 6.3,
    6.7, 6.9, 7.1, 7.1, 7.1, 7.1, 7.4, 7.6, 7.7, 8.0,
    8.2, 8.6, 8.6, 8.6, 8.8, 8.8, 8.9, 8.9, 9.5, 9.6,
    9.7, 9.8, 10.7, 10.9, 11.0, 11.0, 11.1, 11.2, 11.2, 11.5,
    11.9, 12.4, 12.5, 12.9, 13.0, 13.1, 13.3, 13.6, 13.7, 13.9,
    14.1, 15.4, 15.4, 17.3, 17.3, 18.1, 18.2, 18.4, 18.9, 19.0,
    19.9, 20.6, 21.3, 21.4, 21.9, 23.0, 27.0, 31.6, 33.1, 38.5,
)

BUILTIN_DATASETS: Dict[str, Tuple[Tuple[float, ...], str]] = {
    "bladder": (BLADDER_REMISSION, "Remission times (months) of 128 bladder cancer patients"),
    "bank": (BANK_WAITING, "Waiting times (min.) of 100 bank customers"),
}

# count and sorted-sequence digest fixed at transcription time
BUILTIN_CHECKSUMS: Dict[str, Tuple[int, str]] = {
    "bladder": (128, "6caee8995a29c5c0ba95a122d25e5de917c057484a265dc72c0ea75004ef9f3d"),
    "bank": (100, "3c26dbb0c460d6198a0e494f4fd78e05df51f295437c4a04818fd291875cb3e7"),
}

CSV_SEPARATOR = r"[,\s]+"
EXCEL_SUFFIXES = (".xlsx", ".xls")


def _is_number(token) -> bool:
    try:
        float(token)
    except (TypeError, ValueError):
        return False
    return True


def _is_blank(token) -> bool:
    if token is None:
        return True
    if isinstance(token, float) and math.isnan(token):
        return True
    return str(token).strip() == ""


class DatasetService:
    """Service for resolving, loading and exporting datasets."""

    def __init__(self):
        self.supported_formats = [".csv", ".txt", ".dat", *EXCEL_SUFFIXES]

    def available(self) -> List[str]:
        return sorted(BUILTIN_DATASETS)

    def builtin(self, name: str) -> Dataset:
        key = name.strip().lower()
        if key not in BUILTIN_DATASETS:
            raise UnknownDataset(f"unknown dataset '{name}'; available: {', '.join(self.available())}")
        values, source = BUILTIN_DATASETS[key]
        return Dataset(name=key, values=values, source=source)

    def _read_table(self, file_path: Path) -> pd.DataFrame:
        """Raw string table, one row per physical line."""
        try:
            if file_path.suffix.lower() in EXCEL_SUFFIXES:
                return pd.read_excel(file_path, sheet_name=0, header=None, dtype=object)
            return pd.read_csv(
                file_path,
                sep=CSV_SEPARATOR,
                engine="python",
                header=None,
                dtype=str,
                keep_default_na=False,
                na_filter=False,
                skip_blank_lines=False,
                encoding="utf-8",
            )
        except EmptyDataError:
            return pd.DataFrame()
        except ParserError as exc:
            raise ParseError(f"malformed table in {file_path.name}: {exc}") from exc
        except UnicodeDecodeError as exc:
            raise ParseError(f"{file_path.name} is not UTF-8 text: {exc}") from exc

    def _select_column(self, header: Optional[List[str]], width: int, column: ColumnSelector) -> int:
        if column is None:
            if header is not None and "value" in header:
                return header.index("value")
            return 0
        if isinstance(column, int) or (isinstance(column, str) and column.isdigit()):
            index = int(column)
            if not 0 <= index < width:
                raise InvalidData(f"column index {index} out of range for {width} column(s)")
            return index
        if header is None or column not in header:
            raise InvalidData(f"column '{column}' not found in header {header}")
        return header.index(column)

    def load_csv(self, file_path: Union[str, Path], column: ColumnSelector = None) -> Dataset:
        """
        Load one column of positive observations.

        Fields may be separated by commas or whitespace. A first line whose
        first token is not numeric is taken as a header row. Errors carry the
        1-based line number of the offending row.
        """
        path = Path(file_path)
        if not path.exists():
            raise FileNotFoundError(f"data file not found: {path}")
        table = self._read_table(path)

        # drop separator-only columns (e.g. from leading whitespace)
        table = table.loc[:, [not all(_is_blank(v) for v in table[c]) for c in table.columns]]

        rows = []
        for idx, raw in enumerate(table.itertuples(index=False, name=None)):
            if all(_is_blank(v) for v in raw):
                continue
            rows.append((idx + 1, list(raw)))
        if not rows:
            raise InvalidData(f"{path.name} contains no observations")

        header = None
        first_line, first_row = rows[0]
        if not _is_number(first_row[0]):
            header = [str(v).strip() for v in first_row]
            rows = rows[1:]
            logger.debug(f"{path.name}: header row {header} at line {first_line}")

        col = self._select_column(header, len(first_row), column)
        values = []
        for line, row in rows:
            token = row[col] if col < len(row) else None
            if _is_blank(token):
                raise InvalidData("missing value", line=line)
            try:
                value = float(token)
            except (TypeError, ValueError):
                raise ParseError(f"cannot parse '{token}' as a number", line=line)
            if not (math.isfinite(value) and value > 0):
                raise InvalidData(f"observation must be strictly positive and finite, got {token}", line=line)
            values.append(value)

        if not values:
            raise InvalidData(f"{path.name} contains no observations")

        label = "" if column is None else f"[{column}]"
        logger.info(f"Loaded {len(values)} observations from {path}{label}")
        return Dataset(name=path.stem, values=tuple(values), source=f"{path}{label}")

    def export_csv(self, dataset: Dataset, file_path: Union[str, Path]) -> Path:
        """Write a single ``value`` column that load_csv reads back unchanged."""
        path = Path(file_path)
        pd.DataFrame({"value": list(dataset.values)}).to_csv(path, index=False)
        logger.info(f"Exported {dataset.n} observations of '{dataset.name}' to {path}")
        return path

    def resolve(self, dataset: Optional[str] = None, data: Optional[str] = None, column: ColumnSelector = None) -> Dataset:
        """A builtin by name or a file by path; exactly one must be given."""
        if (dataset is None) == (data is None):
            raise InvalidData("give exactly one of a builtin dataset name or a data file")
        if dataset is not None:
            return self.builtin(dataset)
        return self.load_csv(data, column)


# Create global dataset service instance
dataset_service = DatasetService()


def builtin(name: str) -> Dataset:
    return dataset_service.builtin(name)


def load_csv(file_path: Union[str, Path], column: ColumnSelector = None) -> Dataset:
    return dataset_service.load_csv(file_path, column)


def export_csv(dataset: Dataset, file_path: Union[str, Path]) -> Path:
    return dataset_service.export_csv(dataset, file_path)
