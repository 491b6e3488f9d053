import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from densitygp.dataio import density_columns, read_dataset, sidecar_path, write_dataset
from densitygp.datasets import gen_classification_beta, gen_regression_tfb
from densitygp.errors import DatasetFileError, InvalidLabels, TaskMismatch, UsageError


def test_column_names():
    assert density_columns(3) == ['t0000', 't0001', 't0002']
    assert density_columns(20000)[-1] == 't19999'


def test_written_dataset_reads_back(tmp_path):
    data = gen_regression_tfb(n=4, sample_size=200, seed=1, grid_size=64)
    path = tmp_path / 'tfb.csv'
    write_dataset(data, path)
    loaded = read_dataset(path)
    assert loaded.task == 'regress'
    assert loaded.grid_size == 64
    assert_allclose(loaded.responses, data.targets, rtol=1e-12)
    for p, q in zip(loaded.densities, data.densities):
        assert_allclose(p.values, q.values, rtol=1e-10)

    sidecar = json.loads(sidecar_path(path).read_text())
    assert sidecar['generator'] == 'tfb'
    assert sidecar['task'] == 'regress'
    assert sidecar['seed'] == 1


def test_labels_are_detected(tmp_path):
    path = tmp_path / 'beta.csv'
    write_dataset(gen_classification_beta(n_per_class=3, seed=0, grid_size=32), path)
    loaded = read_dataset(path)
    assert loaded.task == 'classify'
    assert loaded.responses.dtype.kind == 'i'
    with pytest.raises(TaskMismatch):
        read_dataset(path, task='regress')


def test_headerless_rows_end_with_the_response(tmp_path):
    path = tmp_path / 'raw.csv'
    path.write_text("1,2,1,0.5\n0,1,0,-0.25\n")
    loaded = read_dataset(path, task='regress', no_header=True)
    assert loaded.grid_size == 3
    assert_allclose(loaded.responses, [0.5, -0.25])
    assert_allclose(loaded.densities[0].values, [2 / 3, 4 / 3, 2 / 3])


def test_headerless_without_task_is_ambiguous(tmp_path):
    path = tmp_path / 'raw.csv'
    path.write_text("1,2,1,0.5\n")
    with pytest.raises(UsageError):
        read_dataset(path, no_header=True)


def test_bad_labels(tmp_path):
    path = tmp_path / 'raw.csv'
    path.write_text("1,2,1,0\n")
    with pytest.raises(InvalidLabels):
        read_dataset(path, task='classify', no_header=True)


def test_sample_rows_are_kde_estimated(tmp_path):
    rng = np.random.default_rng(0)
    rows = [rng.beta(2.0, 5.0, size=300) for _ in range(2)]
    path = tmp_path / 'samples.csv'
    path.write_text('\n'.join(','.join(f"{v:.6f}" for v in row) + ',1' for row in rows) + '\n')
    loaded = read_dataset(path, task='classify', no_header=True, samples=True, grid_size=64)
    assert loaded.grid_size == 64
    assert list(loaded.responses) == [1, 1]


def test_missing_file(tmp_path):
    with pytest.raises(DatasetFileError):
        read_dataset(tmp_path / 'absent.csv', task='regress')
