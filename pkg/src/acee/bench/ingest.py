"""CSV ingestion into observational datasets."""

import logging
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from ..config import CsvSchema
from ..effects.dataset import ObservationalDataset
from ..utils.error_handling import SchemaError

logger = logging.getLogger(__name__)


def _read_frame(path: Path) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except FileNotFoundError as exc:
        raise SchemaError(f"no such file: {path}", path=str(path)) from exc
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise SchemaError(f"cannot parse {path}: {exc}", path=str(path)) from exc
    frame.columns = [str(c).strip() for c in frame.columns]
    return frame


def _numeric(frame: pd.DataFrame, column: str) -> np.ndarray:
    raw = frame[column].str.strip()
    values = pd.to_numeric(raw, errors="coerce")
    bad = np.flatnonzero(values.isna().to_numpy() | ~np.isfinite(values.to_numpy(dtype=np.float64)))
    if bad.size:
        row = int(bad[0])
        raise SchemaError(
            f"non-numeric cell in column {column!r} at row {row}", row=row, column=column, value=raw.iloc[row]
        )
    return values.to_numpy(dtype=np.float64)


def ingest_csv(
    path: Path,
    treatment: Optional[str] = "treatment",
    outcome: Optional[str] = "outcome",
    covariates: Optional[Sequence[str]] = None,
    unit_id: Optional[str] = None,
) -> ObservationalDataset:
    """Load a headed CSV, selecting covariate, treatment and outcome columns.

    Rows are numbered from 0 after the header in error details. Without an
    explicit covariate list every remaining column is a covariate.
    """
    path = Path(path)
    frame = _read_frame(path)
    roles = [c for c in (treatment, outcome, unit_id) if c is not None]
    selected: List[str] = list(covariates) if covariates is not None else [c for c in frame.columns if c not in roles]
    missing = [c for c in (*roles, *selected) if c not in frame.columns]
    if missing:
        raise SchemaError(f"missing columns {missing} in {path}", columns=missing, path=str(path))
    if frame.empty:
        raise SchemaError(f"{path} has a header but no rows", path=str(path))

    X = np.column_stack([_numeric(frame, c) for c in selected]) if selected else np.empty((len(frame), 0))
    D = None
    if treatment is not None:
        D = _numeric(frame, treatment)
        bad = np.flatnonzero(~np.isin(D, (0.0, 1.0)))
        if bad.size:
            row = int(bad[0])
            raise SchemaError(
                f"treatment must be 0 or 1, got {D[row]} at row {row}", row=row, column=treatment, value=float(D[row])
            )
    Y = _numeric(frame, outcome) if outcome is not None else None
    ids = None
    if unit_id is not None:
        raw_ids = _numeric(frame, unit_id)
        if not np.all(raw_ids == np.round(raw_ids)):
            raise SchemaError("unit ids must be integers", column=unit_id)
        ids = raw_ids.astype(np.int64)

    dataset = ObservationalDataset(
        X=X, D=D, Y=Y, columns=tuple(selected), unit_ids=np.empty(0, dtype=np.int64) if ids is None else ids
    )
    arms = dataset.arm_counts()
    logger.info(
        "Ingested %d rows with %d covariates from %s (treated %s, control %s)",
        dataset.n,
        dataset.p,
        path,
        arms.get(1, "-"),
        arms.get(0, "-"),
    )
    return dataset


def ingest_from_schema(schema: CsvSchema) -> ObservationalDataset:
    return ingest_csv(schema.path, schema.treatment, schema.outcome, schema.covariates, schema.unit_id)


def write_dataset_csv(dataset: ObservationalDataset, path: Path) -> Path:
    """Write ``unit_id, X..., D, Y`` in a layout :func:`ingest_csv` reads back."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(dataset.X, columns=list(dataset.columns))
    frame.insert(0, "unit_id", dataset.unit_ids)
    if dataset.D is not None:
        frame["treatment"] = dataset.D
    if dataset.Y is not None:
        frame["outcome"] = dataset.Y
    frame.to_csv(path, index=False, float_format="%.17g")
    logger.info("Wrote %d rows to %s", dataset.n, path)
    return path
