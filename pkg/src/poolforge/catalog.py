"""Catalog of public benchmark datasets and a fetch/convert client.

Each entry maps an id to either a public URL plus a parsing recipe or a
synthetic-generator recipe (problems whose original distribution is not
freely downloadable). Fetching downloads/generates the data, converts
it to the canonical CSV layout (header row, numeric features, label
last), and verifies the row/column counts recorded in the catalog;
entries with a pinned sha256 are checksum-verified as well.
"""

from __future__ import annotations

import hashlib
import urllib.error
import urllib.request
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import Dataset, generate_synthetic, write_csv
from .errors import CatalogError

_UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    rows: int
    cols: int  # columns of the canonical CSV (features + label)
    url: str | None = None
    parser: str | None = None
    sha256: str | None = None  # None = checksum not pinned; shape still checked
    synthetic: tuple[str, int, float, int] | None = None  # kind, n, noise, seed


CATALOG: dict[str, CatalogEntry] = {
    e.id: e
    for e in [
        CatalogEntry("wine", 178, 14, url=f"{_UCI}/wine/wine.data", parser="label-first"),
        CatalogEntry(
            "australian",
            690,
            15,
            url=f"{_UCI}/statlog/australian/australian.dat",
            parser="whitespace-label-last",
        ),
        CatalogEntry(
            "heart",
            270,
            14,
            url=f"{_UCI}/statlog/heart/heart.dat",
            parser="whitespace-label-last",
        ),
        CatalogEntry(
            "ionosphere", 351, 35, url=f"{_UCI}/ionosphere/ionosphere.data", parser="label-last"
        ),
        CatalogEntry(
            "sonar",
            208,
            61,
            url=f"{_UCI}/undocumented/connectionist-bench/sonar/sonar.all-data",
            parser="label-last",
        ),
        CatalogEntry(
            "wbc", 569, 31, url=f"{_UCI}/breast-cancer-wisconsin/wdbc.data", parser="drop-id-label-second"
        ),
        CatalogEntry("haberman", 306, 4, url=f"{_UCI}/haberman/haberman.data", parser="label-last"),
        CatalogEntry(
            "blood",
            748,
            5,
            url=f"{_UCI}/blood-transfusion/transfusion.data",
            parser="header-label-last",
        ),
        CatalogEntry("liver", 345, 7, url=f"{_UCI}/liver-disorders/bupa.data", parser="label-last"),
        CatalogEntry(
            "german",
            1000,
            25,
            url=f"{_UCI}/statlog/german/german.data-numeric",
            parser="whitespace-label-last",
        ),
        CatalogEntry("banana", 2000, 3, synthetic=("banana", 2000, 0.15, 20)),
        CatalogEntry("p2", 5000, 3, synthetic=("p2", 5000, 0.0, 19)),
    ]
}


def _download(url: str, timeout: float) -> bytes:
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            return resp.read()
    except (urllib.error.URLError, OSError, ValueError) as exc:
        raise CatalogError(f"download failed for {url}: {exc}") from None


def _parse_table(text: str, parser: str) -> tuple[list[list[float]], list[str]]:
    rows: list[list[float]] = []
    labels: list[str] = []
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if parser == "header-label-last":
        lines = lines[1:]
    for line in lines:
        cells = line.split() if parser.startswith("whitespace") else line.split(",")
        cells = [c.strip() for c in cells]
        if parser == "label-first":
            label, feats = cells[0], cells[1:]
        elif parser == "drop-id-label-second":
            label, feats = cells[1], cells[2:]
        else:  # label-last variants
            label, feats = cells[-1], cells[:-1]
        try:
            rows.append([float(v) for v in feats])
        except ValueError as exc:
            raise CatalogError(f"unparseable source row {line!r}: {exc}") from None
        labels.append(label)
    return rows, labels


def _to_dataset(name: str, rows: list[list[float]], labels: list[str]) -> Dataset:
    encoding: dict[str, int] = {}
    encoded = []
    for raw in labels:
        if raw not in encoding:
            encoding[raw] = len(encoding)
        encoded.append(encoding[raw])
    return Dataset(
        features=np.array(rows, dtype=np.float64),
        labels=np.array(encoded, dtype=np.int64),
        name=name,
        label_names=list(encoding),
    )


def fetch_dataset(
    name: str,
    dest: str | Path,
    catalog: dict[str, CatalogEntry] | None = None,
    timeout: float = 30.0,
) -> Path:
    """Materialize a catalog dataset as a canonical CSV under ``dest``.

    Returns the CSV path. Raises :class:`CatalogError` for unknown ids,
    download failures, checksum mismatches, and shape mismatches against
    the catalog record.
    """
    catalog = CATALOG if catalog is None else catalog
    entry = catalog.get(name)
    if entry is None:
        raise CatalogError(f"unknown catalog id: {name!r} (known: {sorted(catalog)})")
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    out_path = dest / f"{entry.id}.csv"

    if entry.synthetic is not None:
        kind, n, noise, seed = entry.synthetic
        dataset = generate_synthetic(kind, n, noise=noise, seed=seed)
        dataset.name = entry.id
    else:
        blob = _download(entry.url, timeout)
        if entry.sha256 is not None:
            digest = hashlib.sha256(blob).hexdigest()
            if digest != entry.sha256:
                raise CatalogError(
                    f"{entry.id}: checksum mismatch (got {digest}, expected {entry.sha256})"
                )
        rows, labels = _parse_table(blob.decode("utf-8", errors="strict"), entry.parser)
        dataset = _to_dataset(entry.id, rows, labels)

    if dataset.n_instances != entry.rows or dataset.n_features + 1 != entry.cols:
        raise CatalogError(
            f"{entry.id}: shape mismatch, got {dataset.n_instances} rows x "
            f"{dataset.n_features + 1} cols, catalog says {entry.rows} x {entry.cols}"
        )
    write_csv(dataset, out_path)
    return out_path
