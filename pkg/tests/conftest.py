import numpy as np
import pytest

from poolforge.dataset import Dataset, write_csv


def make_dataset(features, labels, name="tiny"):
    return Dataset(
        features=np.asarray(features, dtype=float),
        labels=np.asarray(labels, dtype=np.int64),
        name=name,
    )


def random_dataset(rng, n=None, f=None, y=None, name="fuzz"):
    """Random bag-like dataset with every class present at least once."""
    n = n or int(rng.integers(4, 31))
    f = f or int(rng.integers(1, 5))
    y = y or int(rng.integers(2, 4))
    labels = np.concatenate([np.arange(y), rng.integers(0, y, size=n - y)])
    labels = labels[rng.permutation(n)]
    features = rng.normal(size=(n, f)) + labels[:, None] * rng.uniform(0.0, 2.0)
    return make_dataset(features, labels, name=name)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def wine_dataset():
    sklearn_datasets = pytest.importorskip("sklearn.datasets")
    bunch = sklearn_datasets.load_wine()
    return Dataset(
        features=bunch.data.astype(float),
        labels=bunch.target.astype(np.int64),
        name="wine",
        feature_names=[n.replace(",", "_") for n in bunch.feature_names],
    )


@pytest.fixture(scope="session")
def wine_csv(wine_dataset, tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "wine.csv"
    write_csv(wine_dataset, path)
    return path


@pytest.fixture(scope="session")
def wbc_dataset():
    sklearn_datasets = pytest.importorskip("sklearn.datasets")
    bunch = sklearn_datasets.load_breast_cancer()
    return Dataset(
        features=bunch.data.astype(float),
        labels=bunch.target.astype(np.int64),
        name="wbc",
        feature_names=[n.replace(" ", "_") for n in bunch.feature_names],
    )


@pytest.fixture(scope="session")
def wbc_csv(wbc_dataset, tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "wbc.csv"
    write_csv(wbc_dataset, path)
    return path
