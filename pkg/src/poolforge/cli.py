"""Command-line interface.

Subcommands: ``fetch``, ``complexity``, ``select-metrics``, ``generate``,
``evaluate``, ``experiment``, ``compare``. Every command takes an
explicit ``--seed`` and produces byte-identical JSON for identical
inputs, independent of the worker count. Exit codes: 0 success, 1 usage
error, 2 data error, 3 runtime failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .catalog import fetch_dataset
from .complexity import ALL_MEASURES, Measure, compute_profile
from .dataset import apply_minmax, load_csv, minmax_params, scale_by_subset
from .dynsel import COMBINERS, DEFAULT_K, evaluate_pool
from .errors import DataError, PoolforgeError
from .experiment import DEFAULT_COMBINERS, ExperimentConfig, render_report, run_experiment
from .learner import Pool, bagging_generate
from .metricsel import select_metrics
from .moga import GaConfig, run_pgdcs
from .rng import derive_seed
from .stats import wilcoxon_signed_rank, win_tie_loss


def _echo_json(payload: dict) -> None:
    click.echo(json.dumps(payload, indent=2, sort_keys=True))


def _parse_measure(value: str, family: str | None = None) -> Measure:
    try:
        measure = Measure(value)
    except ValueError:
        codes = [m.value for m in ALL_MEASURES]
        raise click.UsageError(f"unknown measure {value!r} (choose from {codes})") from None
    if family is not None and measure.family != family:
        raise click.UsageError(f"{measure.value} is not a {family} measure")
    return measure


@click.group()
@click.version_option(version=__version__, prog_name="poolforge")
def cli() -> None:
    """Diversity-driven classifier pool generation and evaluation."""


@cli.command()
@click.argument("name")
@click.option("--dest", type=click.Path(file_okay=False), default="data", show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Emit a JSON summary.")
def fetch(name: str, dest: str, as_json: bool) -> None:
    """Download (or synthesize) a catalog dataset as a canonical CSV."""
    path = fetch_dataset(name, dest)
    if as_json:
        _echo_json({"id": name, "path": str(path)})
    else:
        click.echo(str(path))


def _load_scaled(data: str, label_col: str | None, scale: bool):
    dataset = load_csv(data, label_column=label_col)
    if scale:
        mins, maxs = minmax_params(dataset.features)
        dataset = apply_minmax(dataset, mins, maxs)
    return dataset


@cli.command()
@click.option("--data", required=True, type=click.Path(dir_okay=False))
@click.option("--label-col", default=None, help="Label column name (default: last).")
@click.option("--measures", default="all", show_default=True,
              help="'all' or a comma-separated list of measure codes.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--scale/--no-scale", default=True, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def complexity(data, label_col, measures, seed, scale, as_json) -> None:
    """Compute complexity measures over one dataset file."""
    dataset = _load_scaled(data, label_col, scale)
    if measures == "all":
        wanted = ALL_MEASURES
    else:
        wanted = tuple(_parse_measure(c.strip()) for c in measures.split(","))
    profile = compute_profile(dataset.features, dataset.labels, seed=seed, measures=wanted)
    payload = {
        "dataset": dataset.name,
        "n_instances": dataset.n_instances,
        "n_features": dataset.n_features,
        "n_classes": dataset.n_classes,
        "scaled": scale,
        "measures": {m.value: profile[m] for m in wanted},
    }
    if as_json:
        _echo_json(payload)
    else:
        for m in wanted:
            click.echo(f"{m.value}\t{profile[m]:.6f}")


@cli.command("select-metrics")
@click.option("--data", required=True, type=click.Path(dir_okay=False))
@click.option("--label-col", default=None)
@click.option("--iters", type=int, default=20, show_default=True)
@click.option("--subsets", type=int, default=100, show_default=True)
@click.option("--subset-frac", type=float, default=0.5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--scale/--no-scale", default=True, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def select_metrics_cmd(data, label_col, iters, subsets, subset_frac, seed, scale, as_json):
    """Vote for the most dispersed overlapping and neighborhood measures."""
    dataset = _load_scaled(data, label_col, scale)
    tally = select_metrics(
        dataset.features,
        dataset.labels,
        n_subsets=subsets,
        subset_frac=subset_frac,
        iterations=iters,
        seed=seed,
    )
    payload = {"dataset": dataset.name, **tally.as_dict()}
    if as_json:
        _echo_json(payload)
    else:
        click.echo(f"cm1={tally.selected[0].value} cm2={tally.selected[1].value}")


@cli.command()
@click.option("--method", type=click.Choice(["pgdcs", "bagging"]), default="pgdcs",
              show_default=True)
@click.option("--data", "train_path", required=True, type=click.Path(dir_okay=False),
              help="Training CSV; bags index its rows.")
@click.option("--dsel", "dsel_path", type=click.Path(dir_okay=False),
              help="Validation CSV (decision diversity; required for pgdcs).")
@click.option("--pool-size", type=int, default=100, show_default=True)
@click.option("--generations", type=int, default=20, show_default=True)
@click.option("--cm1", default="auto", show_default=True)
@click.option("--cm2", default="auto", show_default=True)
@click.option("--crossover-prob", type=float, default=0.9, show_default=True)
@click.option("--mutation-prob", type=float, default=0.2, show_default=True)
@click.option("--bag-frac", type=float, default=0.5, show_default=True,
              help="Bagging resample size as a fraction of the training set.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--scale/--no-scale", default=True, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--history", type=click.Path(dir_okay=False),
              help="Write per-generation fitness rows as JSON lines.")
@click.option("--json", "as_json", is_flag=True)
def generate(method, train_path, dsel_path, pool_size, generations, cm1, cm2,
             crossover_prob, mutation_prob, bag_frac, seed, scale, out, history,
             as_json) -> None:
    """Train a classifier pool and save it as JSON."""
    train = load_csv(train_path)
    scaling = None
    if scale:
        mins, maxs = minmax_params(train.features)
        scaling = {"min": mins.tolist(), "max": maxs.tolist()}
        train = apply_minmax(train, mins, maxs)

    if method == "bagging":
        pool = bagging_generate(
            train.features, train.labels, pool_size=pool_size, bag_frac=bag_frac, seed=seed
        )
    else:
        if dsel_path is None:
            raise click.UsageError("--dsel is required for --method pgdcs")
        dsel = load_csv(dsel_path)
        if scaling is not None:
            dsel = apply_minmax(dsel, np.array(scaling["min"]), np.array(scaling["max"]))
        if dsel.n_features != train.n_features:
            raise DataError("training and DSEL files disagree on feature count")
        if cm1 == "auto" or cm2 == "auto":
            tally = select_metrics(
                train.features, train.labels, seed=derive_seed(seed, "metric-selection")
            )
            cm1_m = tally.selected[0] if cm1 == "auto" else _parse_measure(cm1, "overlapping")
            cm2_m = tally.selected[1] if cm2 == "auto" else _parse_measure(cm2, "neighborhood")
        else:
            cm1_m = _parse_measure(cm1, "overlapping")
            cm2_m = _parse_measure(cm2, "neighborhood")
        cfg = GaConfig(
            generations=generations,
            population_size=pool_size,
            offspring_size=pool_size,
            crossover_prob=crossover_prob,
            mutation_prob=mutation_prob,
            seed=seed,
        )
        pool, records = run_pgdcs(
            train.features, train.labels, dsel.features, dsel.labels, cfg, cm1_m, cm2_m
        )
        if history:
            with Path(history).open("w") as fh:
                for rec in records:
                    for i, row in enumerate(np.asarray(rec.fitness)):
                        fh.write(
                            json.dumps(
                                {
                                    "generation": rec.index,
                                    "individual": i,
                                    "objectives": row.tolist(),
                                    "g_disp": rec.g_disp,
                                },
                                sort_keys=True,
                            )
                            + "\n"
                        )

    pool.metadata["scaling"] = scaling
    pool.metadata["train_file"] = Path(train_path).name
    pool.save(out)
    if as_json:
        _echo_json({"out": str(out), "metadata": pool.metadata})
    else:
        click.echo(str(out))


@cli.command()
@click.option("--pool", "pool_path", required=True, type=click.Path(dir_okay=False))
@click.option("--test", "test_path", required=True, type=click.Path(dir_okay=False))
@click.option("--dsel", "dsel_path", type=click.Path(dir_okay=False))
@click.option("--combiner", type=click.Choice(sorted(COMBINERS)), default="mvr",
              show_default=True)
@click.option("--k", type=int, default=DEFAULT_K, show_default=True)
@click.option("--dump-predictions", type=click.Path(dir_okay=False),
              help="Write the member predictions/correctness on the DSEL set.")
@click.option("--json", "as_json", is_flag=True)
def evaluate(pool_path, test_path, dsel_path, combiner, k, dump_predictions, as_json):
    """Score a saved pool on a test CSV (validation CSV as DSEL)."""
    pool = Pool.load(pool_path)
    scaling = pool.metadata.get("scaling")

    def prep(path):
        d = load_csv(path)
        if scaling is not None:
            d = apply_minmax(d, np.array(scaling["min"]), np.array(scaling["max"]))
        if d.n_features != pool.n_features:
            raise DataError(
                f"{path}: {d.n_features} features but the pool expects {pool.n_features}"
            )
        return d

    test = prep(test_path)
    dsel = prep(dsel_path) if dsel_path else None
    if combiner != "mvr" and dsel is None:
        raise click.UsageError(f"--dsel is required for combiner {combiner!r}")
    accuracy = evaluate_pool(
        pool,
        test.features,
        test.labels,
        dsel.features if dsel is not None else None,
        dsel.labels if dsel is not None else None,
        combiner=combiner,
        k=k,
    )
    if dump_predictions:
        if dsel is None:
            raise click.UsageError("--dump-predictions needs --dsel")
        preds = pool.predict_batch(dsel.features)
        Path(dump_predictions).write_text(
            json.dumps(
                {
                    "predictions": preds.tolist(),
                    "correct": (preds == dsel.labels[None, :]).tolist(),
                    "labels": dsel.labels.tolist(),
                },
                sort_keys=True,
            )
            + "\n"
        )
    payload = {
        "combiner": combiner,
        "accuracy": accuracy,
        "n_test": test.n_instances,
        "pool": str(pool_path),
    }
    if as_json:
        _echo_json(payload)
    else:
        click.echo(f"{combiner}\t{accuracy:.4f}")


@cli.command()
@click.option("--data", "data_paths", required=True, multiple=True,
              type=click.Path(dir_okay=False), help="Dataset CSV (repeatable).")
@click.option("--replications", type=int, default=20, show_default=True)
@click.option("--pool-size", type=int, default=100, show_default=True)
@click.option("--generations", type=int, default=20, show_default=True)
@click.option("--combiners", default=",".join(DEFAULT_COMBINERS), show_default=True)
@click.option("--k", type=int, default=DEFAULT_K, show_default=True)
@click.option("--cm1", default="auto", show_default=True)
@click.option("--cm2", default="auto", show_default=True)
@click.option("--metric-iters", type=int, default=20, show_default=True)
@click.option("--metric-subsets", type=int, default=100, show_default=True)
@click.option("--bag-frac", type=float, default=0.5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--scale/--no-scale", default=True, show_default=True)
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.option("--format", "fmt", type=click.Choice(["csv", "json", "markdown"]),
              default="markdown", show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Print the report JSON to stdout.")
def experiment(data_paths, replications, pool_size, generations, combiners, k, cm1, cm2,
               metric_iters, metric_subsets, bag_frac, seed, workers, scale, out, fmt,
               as_json) -> None:
    """Run the full paired protocol (resumes interrupted runs)."""
    cfg = ExperimentConfig(
        datasets=list(data_paths),
        replications=replications,
        pool_size=pool_size,
        generations=generations,
        combiners=tuple(c.strip() for c in combiners.split(",") if c.strip()),
        seed=seed,
        out_dir=out,
        workers=workers,
        k=k,
        scale=scale,
        bag_frac=bag_frac,
        metric_iterations=metric_iters,
        metric_subsets=metric_subsets,
        cm1=cm1,
        cm2=cm2,
    )
    report = run_experiment(cfg)
    written = render_report(report, fmt, out)
    if as_json:
        _echo_json(report.to_json())
    else:
        for path in written:
            click.echo(str(path))


def _read_results(path: str) -> dict[str, list[float]]:
    import csv as _csv

    by_dataset: dict[str, dict[int, float]] = {}
    p = Path(path)
    if not p.exists():
        raise DataError(f"no such file: {path}")
    with p.open(newline="") as fh:
        reader = _csv.DictReader(fh)
        required = {"dataset", "replication", "accuracy"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise DataError(f"{path}: expected columns {sorted(required)}")
        for row in reader:
            try:
                rep = int(row["replication"])
                acc = float(row["accuracy"])
            except ValueError as exc:
                raise DataError(f"{path}: bad row {row}: {exc}") from None
            by_dataset.setdefault(row["dataset"], {})[rep] = acc
    return {
        ds: [by_dataset[ds][r] for r in sorted(by_dataset[ds])]
        for ds in sorted(by_dataset)
    }


@cli.command()
@click.option("--a", "path_a", required=True, type=click.Path(dir_okay=False),
              help="CSV with columns dataset,replication,accuracy (method A).")
@click.option("--b", "path_b", required=True, type=click.Path(dir_okay=False),
              help="Same layout for method B.")
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--tie-epsilon", type=float, default=0.0, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def compare(path_a, path_b, alpha, tie_epsilon, as_json) -> None:
    """Paired signed-rank tests per dataset plus a win/tie/loss tally."""
    a = _read_results(path_a)
    b = _read_results(path_b)
    common = sorted(set(a) & set(b))
    if not common:
        raise DataError("no datasets in common between the two result files")
    per_dataset = {}
    mean_a, mean_b = [], []
    for ds in common:
        if len(a[ds]) != len(b[ds]):
            raise DataError(f"{ds}: replication counts differ")
        mean_a.append(float(np.mean(a[ds])))
        mean_b.append(float(np.mean(b[ds])))
        try:
            res = wilcoxon_signed_rank(a[ds], b[ds], alpha=alpha)
            per_dataset[ds] = {
                "statistic": res.statistic,
                "p_value": res.p_value,
                "significant": res.significant,
                "n_used": res.n_used,
            }
        except DataError as exc:
            per_dataset[ds] = {"error": str(exc)}
    tally = win_tie_loss(mean_a, mean_b, tie_epsilon=tie_epsilon)
    payload = {"alpha": alpha, "per_dataset": per_dataset, "win_tie_loss": tally.as_dict()}
    if as_json:
        _echo_json(payload)
    else:
        click.echo(
            f"wins={tally.wins} ties={tally.ties} losses={tally.losses} "
            f"n_exp={tally.n_exp}"
        )


def main(argv: list[str] | None = None) -> int:
    """Entry point with the documented exit-code mapping."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except PoolforgeError as exc:
        click.echo(f"error: {exc}", err=True)
        return 3
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        click.echo(f"unexpected failure: {exc}", err=True)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
