"""
CSV and JSON files: datasets, predictions, reports.

Dataset CSVs hold one density per row in columns t0000..t{m-1} followed by a
``target`` (regression) or ``label`` (classification) column. Each dataset
has a JSON sidecar with the generator settings and seed.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .datasets import ClassificationDataset, RegressionDataset
from .density import DEFAULT_GRID_SIZE, DensityOnGrid, SampleBatch, kde_estimate, normalize
from .errors import DataError, DatasetFileError, InvalidLabels, TaskMismatch, UsageError

logger = logging.getLogger(__name__)

TASKS = ('regress', 'classify')
RESPONSE_COLUMNS = {'regress': 'target', 'classify': 'label'}

PathLike = Union[str, Path]


@dataclass(frozen=True)
class LoadedData:
    densities: Tuple[DensityOnGrid, ...]
    responses: Optional[np.ndarray]
    task: Optional[str]

    @property
    def grid_size(self) -> int:
        return self.densities[0].grid_size


def density_columns(m: int) -> List[str]:
    width = max(4, len(str(m - 1)))
    return [f"t{j:0{width}d}" for j in range(m)]


def sidecar_path(path: PathLike) -> Path:
    return Path(path).with_suffix('.json')


def densities_frame(densities: Sequence[DensityOnGrid]) -> pd.DataFrame:
    if not densities:
        raise DataError("no densities to write")
    m = densities[0].grid_size
    return pd.DataFrame(np.vstack([p.values for p in densities]), columns=density_columns(m))


def write_json(data: Dict[str, Any], path: PathLike) -> None:
    try:
        Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + '\n', encoding='utf-8')
    except OSError as exc:
        raise DatasetFileError(path, exc.strerror or str(exc)) from None


def read_json(path: PathLike) -> Dict[str, Any]:
    try:
        return json.loads(Path(path).read_text(encoding='utf-8'))
    except OSError as exc:
        raise DatasetFileError(path, exc.strerror or str(exc)) from None
    except ValueError as exc:
        raise DatasetFileError(path, f"invalid JSON ({exc})") from None


def write_frame(frame: pd.DataFrame, path: PathLike) -> None:
    try:
        frame.to_csv(path, index=False)
    except OSError as exc:
        raise DatasetFileError(path, exc.strerror or str(exc)) from None


def write_dataset(dataset: Union[RegressionDataset, ClassificationDataset], path: PathLike) -> Path:
    """Write the CSV and its sidecar; returns the sidecar path."""
    frame = densities_frame(dataset.densities)
    if isinstance(dataset, RegressionDataset):
        task = 'regress'
        frame['target'] = dataset.targets
    else:
        task = 'classify'
        frame['label'] = dataset.labels
    write_frame(frame, path)

    sidecar = sidecar_path(path)
    write_json({
        'generator': dataset.config.get('generator'),
        'task': task,
        'seed': dataset.seed,
        'config': dataset.config,
    }, sidecar)
    logger.debug(f"Wrote {len(dataset.densities)} densities to {path}")
    return sidecar


def _parse_responses(values: np.ndarray, task: str) -> np.ndarray:
    if task == 'classify':
        if not np.all(np.isin(values, (-1, 1))):
            raise InvalidLabels("labels must be -1 or +1")
        return values.astype(int)
    if not np.all(np.isfinite(values)):
        raise DataError("targets must be finite")
    return values.astype(float)


def _check_task(task: Optional[str]) -> None:
    if task is not None and task not in TASKS:
        raise UsageError(f"task must be one of {TASKS}, got {task!r}")


def _read_table(path: PathLike, task: Optional[str], no_header: bool,
                with_response: bool) -> Tuple[np.ndarray, Optional[np.ndarray], Optional[str]]:
    try:
        frame = pd.read_csv(path, header=None if no_header else 'infer')
    except OSError as exc:
        raise DatasetFileError(path, exc.strerror or str(exc)) from None
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise DatasetFileError(path, f"cannot parse CSV ({exc})") from None

    if no_header:
        if with_response:
            return (frame.iloc[:, :-1].to_numpy(dtype=float), frame.iloc[:, -1].to_numpy(dtype=float), task)
        return frame.to_numpy(dtype=float), None, task

    columns = list(frame.columns)
    found = [t for t, col in RESPONSE_COLUMNS.items() if col in columns]
    if len(found) > 1:
        raise DatasetFileError(path, "both 'target' and 'label' columns present")
    file_task = found[0] if found else None
    if task is not None and file_task is not None and task != file_task:
        raise TaskMismatch(f"{path} holds '{RESPONSE_COLUMNS[file_task]}' but task is {task!r}")
    grid_columns = [c for c in columns if c not in RESPONSE_COLUMNS.values()]
    values = frame[grid_columns].to_numpy(dtype=float)
    responses = frame[RESPONSE_COLUMNS[file_task]].to_numpy(dtype=float) if file_task else None
    return values, responses, task or file_task


def _read_sample_rows(path: PathLike, no_header: bool, with_response: bool):
    try:
        lines = Path(path).read_text(encoding='utf-8').splitlines()
    except OSError as exc:
        raise DatasetFileError(path, exc.strerror or str(exc)) from None
    rows = [line for line in lines if line.strip()]
    if not no_header:
        rows = rows[1:]
    batches, responses = [], []
    for number, line in enumerate(rows, start=1):
        try:
            values = np.array([float(v) for v in line.split(',') if v.strip()])
        except ValueError:
            raise DatasetFileError(path, f"row {number} is not numeric") from None
        if with_response:
            responses.append(values[-1])
            values = values[:-1]
        batches.append(values)
    return batches, (np.array(responses) if with_response else None)


def read_dataset(path: PathLike, task: Optional[str] = None, no_header: bool = False,
                 samples: bool = False, with_response: bool = True,
                 grid_size: int = DEFAULT_GRID_SIZE) -> LoadedData:
    """Read densities (or sample batches, KDE-estimated) and their responses.

    Header-less files and sample files carry the response in the last field of
    each row when ``with_response`` is set; headed files are recognised by
    their ``target``/``label`` column.
    """
    _check_task(task)
    if samples:
        batches, responses = _read_sample_rows(path, no_header, with_response)
        densities = [kde_estimate(SampleBatch(b), grid_size) for b in batches]
    else:
        values, responses, task = _read_table(path, task, no_header, with_response)
        densities = [normalize(row) for row in values]
    if not densities:
        raise DatasetFileError(path, "no rows")
    if responses is not None:
        if task is None:
            raise UsageError(f"{path}: cannot tell regression from classification; pass the task")
        responses = _parse_responses(np.asarray(responses, dtype=float), task)
    logger.debug(f"Read {len(densities)} densities from {path}")
    return LoadedData(tuple(densities), responses, task)
