"""End-to-end experimental protocol and report rendering.

For every dataset and replication: derive a replication seed, split
50/25/25 with stratification, optionally min-max scale by the training
rows, pick the two complexity measures by dispersion voting, build one
evolved pool and one bagging pool on the same split, and score every
requested combiner on the test set with the validation set as DSEL.
Both pools share the split and replication seed so the per-dataset
signed-rank test is properly paired.

Results stream to ``results.csv`` with a manifest, so an interrupted
run resumes from the completed replications. Reports aggregate
mean/std per cell, paired signed-rank p-values per dataset/combiner,
and win/tie/loss tallies per combiner with critical-count verdicts.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dynsel
from .complexity import Measure
from .dataset import DEFAULT_FRACTIONS, load_csv, scale_by_subset, stratified_split
from .errors import DataError, PoolforgeError
from .learner import DEFAULT_BAG_FRAC, bagging_generate
from .metricsel import select_metrics
from .moga import GaConfig, run_pgdcs
from .rng import derive_seed
from .stats import WtlTally, wilcoxon_signed_rank, win_tie_loss

METHODS = ("bagging", "pgdcs")
DEFAULT_COMBINERS = ("mvr", "lca", "ola", "rank", "knora-e", "knora-u")


@dataclass
class ExperimentConfig:
    datasets: list[str]
    replications: int = 20
    fractions: tuple[float, float, float] = DEFAULT_FRACTIONS
    pool_size: int = 100
    generations: int = 20
    crossover_prob: float = 0.9
    mutation_prob: float = 0.2
    combiners: tuple[str, ...] = DEFAULT_COMBINERS
    seed: int = 0
    out_dir: str | None = None
    workers: int = 1
    k: int = dynsel.DEFAULT_K
    scale: bool = True
    bag_frac: float = DEFAULT_BAG_FRAC
    metric_iterations: int = 20
    metric_subsets: int = 100
    cm1: str = "auto"
    cm2: str = "auto"

    def __post_init__(self) -> None:
        if not self.datasets:
            raise DataError("at least one dataset required")
        if self.replications < 1:
            raise DataError("replications must be >= 1")
        if not self.combiners:
            raise DataError("at least one combiner required")
        unknown = [c for c in self.combiners if c not in dynsel.COMBINERS]
        if unknown:
            raise DataError(f"unknown combiners: {unknown}")
        if self.workers < 1:
            raise DataError("workers must be >= 1")

    def fingerprint(self) -> str:
        payload = dataclasses.asdict(self)
        payload.pop("workers", None)  # worker count must not affect results
        payload.pop("out_dir", None)
        blob = json.dumps(payload, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class ExperimentReport:
    """All accuracy rows plus aggregate statistics of one experiment run."""

    rows: list[dict]
    aggregates: dict[str, dict]
    wilcoxon: dict[str, dict]
    wtl: dict[str, dict]
    failures: list[dict]
    config: dict
    generation_scatter: dict[str, dict] = field(default_factory=dict)

    def to_json(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_json(cls, payload: dict) -> "ExperimentReport":
        return cls(**payload)


def _agg_key(dataset: str, method: str, combiner: str) -> str:
    return f"{dataset}|{method}|{combiner}"


def _pair_key(dataset: str, combiner: str) -> str:
    return f"{dataset}|{combiner}"


def run_replication(cfg: ExperimentConfig, dataset_path: str, replication: int) -> dict:
    """One dataset/replication cell: both pools, every combiner.

    Returns accuracy rows and, for replication 0, the fitness scatter of
    the evolved run's first and chosen generations.
    """
    dataset = load_csv(dataset_path)
    rep_seed = derive_seed(cfg.seed, "replication", dataset.name, replication)
    split = stratified_split(dataset, cfg.fractions, seed=derive_seed(rep_seed, "split"))
    if cfg.scale:
        dataset, _ = scale_by_subset(dataset, split.train)
    train_X, train_y = dataset.subset(split.train)
    val_X, val_y = dataset.subset(split.validation)
    test_X, test_y = dataset.subset(split.test)

    if cfg.cm1 != "auto" and cfg.cm2 != "auto":
        cm1, cm2 = Measure(cfg.cm1), Measure(cfg.cm2)
    else:
        tally = select_metrics(
            train_X,
            train_y,
            n_subsets=cfg.metric_subsets,
            iterations=cfg.metric_iterations,
            seed=derive_seed(rep_seed, "metric-selection"),
        )
        cm1 = Measure(cfg.cm1) if cfg.cm1 != "auto" else tally.selected[0]
        cm2 = Measure(cfg.cm2) if cfg.cm2 != "auto" else tally.selected[1]

    ga = GaConfig(
        generations=cfg.generations,
        population_size=cfg.pool_size,
        offspring_size=cfg.pool_size,
        crossover_prob=cfg.crossover_prob,
        mutation_prob=cfg.mutation_prob,
        seed=derive_seed(rep_seed, "pgdcs"),
    )
    evolved_pool, records = run_pgdcs(train_X, train_y, val_X, val_y, ga, cm1, cm2)
    bagging_pool = bagging_generate(
        train_X,
        train_y,
        pool_size=cfg.pool_size,
        bag_frac=cfg.bag_frac,
        seed=derive_seed(rep_seed, "bagging"),
    )

    rows = []
    for method, pool in (("bagging", bagging_pool), ("pgdcs", evolved_pool)):
        for combiner in cfg.combiners:
            acc = dynsel.evaluate_pool(
                pool, test_X, test_y, val_X, val_y, combiner=combiner, k=cfg.k
            )
            rows.append(
                {
                    "dataset": dataset.name,
                    "method": method,
                    "combiner": combiner,
                    "replication": replication,
                    "accuracy": acc,
                }
            )

    scatter = None
    if replication == 0:
        chosen = evolved_pool.metadata["chosen_generation"]
        scatter = {
            "dataset": dataset.name,
            "cm1": cm1.value,
            "cm2": cm2.value,
            "chosen_generation": chosen,
            "g_disp_history": evolved_pool.metadata["g_disp_history"],
            "initial_fitness": np.asarray(records[0].fitness).tolist(),
            "chosen_fitness": np.asarray(records[chosen].fitness).tolist(),
        }
    return {"dataset": dataset.name, "replication": replication, "rows": rows, "scatter": scatter}


def _job(args: tuple) -> dict:
    cfg, path, replication = args
    try:
        return run_replication(cfg, path, replication)
    except Exception as exc:  # recorded, never silently dropped
        return {
            "dataset": Path(path).stem,
            "replication": replication,
            "rows": [],
            "scatter": None,
            "error": f"{type(exc).__name__}: {exc}",
        }


_CSV_FIELDS = ("dataset", "method", "combiner", "replication", "accuracy")


def _load_manifest(out_dir: Path, fingerprint: str) -> tuple[set[str], list[dict]]:
    manifest_path = out_dir / "manifest.json"
    results_path = out_dir / "results.csv"
    if not manifest_path.exists() or not results_path.exists():
        return set(), []
    manifest = json.loads(manifest_path.read_text())
    if manifest.get("fingerprint") != fingerprint:
        return set(), []
    rows = []
    with results_path.open(newline="") as fh:
        for row in csv.DictReader(fh):
            row["replication"] = int(row["replication"])
            row["accuracy"] = float(row["accuracy"])
            rows.append(row)
    return set(manifest.get("completed", [])), rows


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Run (or resume) the full protocol and assemble the report."""
    out_dir = Path(cfg.out_dir) if cfg.out_dir else None
    fingerprint = cfg.fingerprint()
    completed: set[str] = set()
    rows: list[dict] = []
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        completed, rows = _load_manifest(out_dir, fingerprint)

    jobs = []
    for path in cfg.datasets:
        name = Path(path).stem
        for rep in range(cfg.replications):
            if f"{name}::{rep}" not in completed:
                jobs.append((cfg, str(path), rep))

    failures: list[dict] = []
    scatter: dict[str, dict] = {}

    results_path = out_dir / "results.csv" if out_dir else None
    write_header = results_path is not None and (
        not results_path.exists() or not completed
    )
    csv_fh = None
    writer = None
    if results_path is not None:
        csv_fh = results_path.open("w" if write_header else "a", newline="")
        writer = csv.DictWriter(csv_fh, fieldnames=_CSV_FIELDS)
        if write_header:
            writer.writeheader()

    def consume(result: dict) -> None:
        key = f"{result['dataset']}::{result['replication']}"
        if "error" in result:
            warnings.warn(
                f"replication failed and was skipped: {key}: {result['error']}",
                stacklevel=2,
            )
            failures.append(
                {
                    "dataset": result["dataset"],
                    "replication": result["replication"],
                    "error": result["error"],
                }
            )
        else:
            rows.extend(result["rows"])
            if writer is not None:
                for row in result["rows"]:
                    writer.writerow(row)
                csv_fh.flush()
            if result["scatter"] is not None:
                scatter[result["dataset"]] = result["scatter"]
        completed.add(key)
        if out_dir is not None:
            (out_dir / "manifest.json").write_text(
                json.dumps(
                    {
                        "fingerprint": fingerprint,
                        "completed": sorted(completed),
                        "failures": failures,
                    },
                    indent=2,
                    sort_keys=True,
                )
                + "\n"
            )

    try:
        if cfg.workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                for result in pool.map(_job, jobs):
                    consume(result)
        else:
            for job in jobs:
                consume(_job(job))
    finally:
        if csv_fh is not None:
            csv_fh.close()

    report = build_report(cfg, rows, failures, scatter)
    if out_dir is not None:
        (out_dir / "report.json").write_text(
            json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n"
        )
    return report


def build_report(
    cfg: ExperimentConfig,
    rows: list[dict],
    failures: list[dict],
    scatter: dict[str, dict],
) -> ExperimentReport:
    rows = sorted(
        rows, key=lambda r: (r["dataset"], r["replication"], r["method"], r["combiner"])
    )
    datasets = sorted({r["dataset"] for r in rows})

    by_cell: dict[tuple[str, str, str], list[tuple[int, float]]] = {}
    for r in rows:
        by_cell.setdefault((r["dataset"], r["method"], r["combiner"]), []).append(
            (r["replication"], r["accuracy"])
        )

    aggregates = {}
    for (ds, method, combiner), cell in sorted(by_cell.items()):
        accs = np.array([a for _, a in sorted(cell)])
        aggregates[_agg_key(ds, method, combiner)] = {
            "mean": float(accs.mean()),
            "std": float(accs.std()),
            "n": int(accs.size),
        }

    wilcoxon = {}
    for ds in datasets:
        for combiner in cfg.combiners:
            a_cell = by_cell.get((ds, "pgdcs", combiner))
            b_cell = by_cell.get((ds, "bagging", combiner))
            if not a_cell or not b_cell or len(a_cell) != len(b_cell):
                continue
            a = [acc for _, acc in sorted(a_cell)]
            b = [acc for _, acc in sorted(b_cell)]
            key = _pair_key(ds, combiner)
            try:
                res = wilcoxon_signed_rank(a, b)
                wilcoxon[key] = {
                    "statistic": res.statistic,
                    "p_value": res.p_value,
                    "n_used": res.n_used,
                    "significant": res.significant,
                }
            except DataError as exc:
                wilcoxon[key] = {"error": str(exc)}

    wtl: dict[str, dict] = {}

    def tally_for(cells: list[tuple[str, str]]) -> WtlTally | None:
        a, b = [], []
        for ds, combiner in cells:
            ka = aggregates.get(_agg_key(ds, "pgdcs", combiner))
            kb = aggregates.get(_agg_key(ds, "bagging", combiner))
            if ka and kb:
                a.append(ka["mean"])
                b.append(kb["mean"])
        if not a:
            return None
        return win_tie_loss(a, b)

    for combiner in cfg.combiners:
        tally = tally_for([(ds, combiner) for ds in datasets])
        if tally is not None:
            wtl[combiner] = tally.as_dict()
    overall = tally_for([(ds, c) for ds in datasets for c in cfg.combiners])
    if overall is not None:
        wtl["overall"] = overall.as_dict()

    config = dataclasses.asdict(cfg)
    config["datasets"] = [str(d) for d in config["datasets"]]
    return ExperimentReport(
        rows=rows,
        aggregates=aggregates,
        wilcoxon=wilcoxon,
        wtl=wtl,
        failures=failures,
        config=config,
        generation_scatter=scatter,
    )


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def _table_cells(report: ExperimentReport) -> tuple[list[str], list[str]]:
    datasets = sorted({r["dataset"] for r in report.rows})
    combiners = list(dict.fromkeys(r["combiner"] for r in report.rows))
    return datasets, combiners


def render_report(
    report: ExperimentReport, fmt: str, out_dir: str | Path
) -> list[Path]:
    """Write report files; returns the created paths.

    ``csv``: aggregate mean/std table plus win/tie/loss counts.
    ``json``: the full report (parses back to an equal report).
    ``markdown``: mean(std) percent table, one row per dataset with
    paired bagging/pgdcs columns per combiner, plus the tally summary.
    Fitness scatter files for the recorded replications are written in
    every format.
    """
    if not report.rows:
        raise DataError("empty report: nothing to render")
    if fmt not in ("csv", "json", "markdown"):
        raise DataError(f"unknown report format: {fmt!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    datasets, combiners = _table_cells(report)

    if fmt == "json":
        path = out_dir / "report.json"
        path.write_text(json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n")
        written.append(path)
    elif fmt == "csv":
        path = out_dir / "aggregates.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["dataset", "combiner", "method", "mean", "std", "n"])
            for ds in datasets:
                for combiner in combiners:
                    for method in METHODS:
                        agg = report.aggregates.get(_agg_key(ds, method, combiner))
                        if agg:
                            writer.writerow(
                                [ds, combiner, method, agg["mean"], agg["std"], agg["n"]]
                            )
        written.append(path)
        wtl_path = out_dir / "win_tie_loss.csv"
        with wtl_path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["combiner", "wins", "ties", "losses", "n_exp"])
            for combiner, tally in report.wtl.items():
                writer.writerow(
                    [combiner, tally["wins"], tally["ties"], tally["losses"], tally["n_exp"]]
                )
        written.append(wtl_path)
    else:
        lines = ["# Pool comparison", ""]
        header = ["dataset"]
        for combiner in combiners:
            header += [f"{combiner} bagging", f"{combiner} pgdcs"]
        lines.append("| " + " | ".join(header) + " |")
        lines.append("|" + "---|" * len(header))
        for ds in datasets:
            cells = [ds]
            for combiner in combiners:
                for method in METHODS:
                    agg = report.aggregates.get(_agg_key(ds, method, combiner))
                    if agg:
                        star = ""
                        pair = report.wilcoxon.get(_pair_key(ds, combiner), {})
                        if pair.get("significant") is False:
                            star = "*"
                        cells.append(
                            f"{100 * agg['mean']:.1f}({100 * agg['std']:.1f}){star}"
                        )
                    else:
                        cells.append("-")
            lines.append("| " + " | ".join(cells) + " |")
        lines += ["", "## Win/tie/loss (pgdcs vs bagging)", ""]
        lines.append("| combiner | wins | ties | losses | n_exp |")
        lines.append("|---|---|---|---|---|")
        for combiner, tally in report.wtl.items():
            lines.append(
                f"| {combiner} | {tally['wins']} | {tally['ties']} "
                f"| {tally['losses']} | {tally['n_exp']} |"
            )
        path = out_dir / "report.md"
        path.write_text("\n".join(lines) + "\n")
        written.append(path)

    for ds, sc in sorted(report.generation_scatter.items()):
        path = out_dir / f"{ds}_generation_scatter.jsonl"
        with path.open("w") as fh:
            for stage in ("initial", "chosen"):
                gen = 0 if stage == "initial" else sc["chosen_generation"]
                for i, row in enumerate(sc[f"{stage}_fitness"]):
                    fh.write(
                        json.dumps(
                            {
                                "stage": stage,
                                "generation": gen,
                                "individual": i,
                                "objectives": row,
                            },
                            sort_keys=True,
                        )
                        + "\n"
                    )
        written.append(path)
    return written
