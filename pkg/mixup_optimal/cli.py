"""``mixup-optimal`` command-line interface.

Usage::

    mixup-optimal oracle --dataset x3k2 --alpha 1 --eps 0.1 --probe 1
    mixup-optimal train --dataset moons --mode both --alpha 1,1024 --epochs 1500
    mixup-optimal recover --m 6 --dim 2 --seed 3
    mixup-optimal assumptions --dataset mnist --fraction 0.2 --alpha 1024
    mixup-optimal linear --n 20 --d 650 --trials 50 --alpha 1
    mixup-optimal fetch-mnist --mnist-dir data/mnist

Every run writes ``config.json``, ``results.csv`` and ``summary.json`` (plus
command-specific CSV and SVG files) into ``<output root>/<run id>``, where
the run id hashes the configuration.  Exit codes: 0 on success, 2 for
configuration, contract and dataset errors, 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from collections import defaultdict
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, TypeVar

import numpy as np

from mixup_optimal import __version__
from mixup_optimal.assumptions import (
    check_assumption1,
    check_assumption2,
    estimate_epsilon,
    margin_radius,
    write_violations_csv,
)
from mixup_optimal.config import (
    ExperimentConfig,
    default_mnist_dir,
    load_config_file,
    load_env,
)
from mixup_optimal.constants import (
    DEFAULT_EPOCHS,
    DEFAULT_HIDDEN_UNITS,
    ENV_LOG_LEVEL,
    EXIT_CONFIG_ERROR,
    EXIT_NUMERIC_FAILURE,
    EXIT_OK,
    MOONS_EPOCHS,
    MOONS_HIDDEN_UNITS,
)
from mixup_optimal.datasets import fetch_mnist, from_spec, load_mnist
from mixup_optimal.exceptions import (
    ConfigError,
    ContractError,
    DatasetError,
    MixupError,
    OracleDomainError,
)
from mixup_optimal.linear import (
    cosine,
    estimate_k,
    margin_residual,
    min_norm_interpolator,
    minimize_mixup_linear,
)
from mixup_optimal.mixing import MixingDistribution
from mixup_optimal.models.dataset import LabeledDataset
from mixup_optimal.models.oracle import GridSpec
from mixup_optimal.oracle import boundary_grid, find_crossover_alpha, h_epsilon, h_limit
from mixup_optimal.plotting import (
    plot_boundary_grid,
    plot_probability_map,
    plot_training_curves,
)
from mixup_optimal.recovery import (
    form_midpoints,
    permutation_rank_trial,
    recover_labeled,
    recover_unlabeled_bruteforce,
    write_midpoints_csv,
)
from mixup_optimal.training import evaluate, init_mlp, probability_grid, train

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

# Largest dataset for the exhaustive collinearity check in `assumptions`.
_MAX_COLLINEARITY_POINTS = 500
_DEFAULT_GRID_RESOLUTION = 101


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.generic):
        return _jsonable(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def write_json(path: Path, data: dict[str, Any]) -> None:
    path.write_text(json.dumps(_jsonable(data), sort_keys=True, indent=2) + "\n")


def write_csv(
    path: Path, fieldnames: Sequence[str], rows: Iterable[dict[str, Any]]
) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(fieldnames), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def _map(fn: Callable[[T], R], tasks: Sequence[T], workers: int) -> list[R]:
    """Run *fn* over *tasks*, in a process pool when ``workers > 1``.

    Results come back in task order.
    """
    if workers <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def _dataset(config: ExperimentConfig) -> LabeledDataset:
    return from_spec(
        config.dataset,
        separation=config.separation,
        noise_sd=config.noise_sd,
        n_per_class=config.n_per_class,
        n=config.n,
        d=config.d,
        seed=config.seed,
        mnist_dir=config.mnist_dir or default_mnist_dir(),
        fraction=config.fraction,
    )


def _distributions(config: ExperimentConfig) -> list[MixingDistribution]:
    if config.kind == "beta":
        return [MixingDistribution.beta(a) for a in config.alphas]
    return [MixingDistribution.from_spec(config.kind, density_csv=config.density_csv)]


def _tag(mode: str, dist: MixingDistribution | None) -> str:
    if dist is None:
        return mode
    if dist.alpha is not None:
        return f"{mode}-a{dist.alpha:g}"
    return f"{mode}-{dist.kind.value}"


def _probes(config: ExperimentConfig, ds: LabeledDataset) -> list[np.ndarray]:
    probes = [np.asarray(p, dtype=np.float64) for p in config.probes]
    for probe in probes:
        if probe.size != ds.n:
            raise ConfigError(
                f"probe {probe.tolist()} has dimension {probe.size}, "
                f"dataset has {ds.n}",
                field="probes",
            )
    return probes


def _probe_class(ds: LabeledDataset, x: np.ndarray) -> int:
    return int(ds.labels[int(np.argmin(np.linalg.norm(ds.points - x, axis=1)))])


# ---------------------------------------------------------------------------
# oracle
# ---------------------------------------------------------------------------


def cmd_oracle(config: ExperimentConfig, run_dir: Path) -> tuple[dict[str, Any], str]:
    """Evaluate the Mixup-optimal classifier at probes and on an optional grid."""
    if not config.limit and config.eps is None:
        raise ConfigError("oracle needs --eps or --limit", field="eps")
    ds = _dataset(config)
    dists = _distributions(config)
    probes = _probes(config, ds)
    if not probes and config.grid is None:
        probes = list(ds.points)

    rows: list[dict[str, Any]] = []
    undefined = 0
    for dist in dists:
        for x in probes:
            row: dict[str, Any] = {
                "probe": ";".join(f"{c:g}" for c in x),
                "mixing": dist.label,
                "eps": "" if config.limit else config.eps,
            }
            if config.limit:
                probs = h_limit(ds, dist, x, config.tol_line)
            else:
                assert config.eps is not None
                try:
                    probs = h_epsilon(ds, dist, x, config.eps)
                except OracleDomainError:
                    probs = None
            row["in_xmix"] = probs is not None
            for cls in range(1, ds.k + 1):
                row[f"p{cls}"] = "" if probs is None else probs[cls]
            row["argmax"] = "" if probs is None else probs.argmax
            undefined += probs is None
            rows.append(row)
    prob_fields = [f"p{c}" for c in range(1, ds.k + 1)]
    fields = ["probe", "mixing", "eps", "in_xmix", *prob_fields, "argmax"]
    write_csv(run_dir / "results.csv", fields, rows)

    summary: dict[str, Any] = {
        "dataset": ds.name,
        "mixing": [d.label for d in dists],
        "eps": config.eps,
        "limit": config.limit,
        "n_probes": len(probes),
        "undefined": undefined,
    }

    if config.crossover:
        if config.eps is None:
            raise ConfigError("--crossover needs --eps", field="eps")
        summary["crossover"] = [
            {"probe": x.tolist(), "alpha": find_crossover_alpha(ds, x, config.eps)}
            for x in probes
        ]

    if config.grid is not None:
        if ds.n != 2:
            raise ConfigError("--grid needs a 2-D dataset", field="grid")
        spec = GridSpec.around(ds.points, resolution=config.grid)
        eps = None if config.limit else config.eps
        for dist in dists:
            grid = boundary_grid(ds, dist, spec, eps=eps, tol_line=config.tol_line)
            suffix = "" if len(dists) == 1 else f"-{dist.label}"
            header = ["x", "y", "label", *prob_fields]
            write_csv(run_dir / f"grid{suffix}.csv", header, grid.rows())
            plot_boundary_grid(
                grid,
                ds,
                run_dir / f"plot{suffix}.svg",
                title=f"{ds.name}, {dist.label}",
            )
        summary["grid"] = spec.to_dict()

    headline = f"{len(rows)} oracle evaluations on {ds.name}, {undefined} outside X_mix"
    return summary, headline


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------


def _train_grid(config: ExperimentConfig, ds: LabeledDataset) -> GridSpec:
    return GridSpec.around(
        ds.points, resolution=config.grid or _DEFAULT_GRID_RESOLUTION
    )


def _train_task(task: tuple[Any, ...]) -> dict[str, Any]:
    config, mode, dist, seed = task
    ds = _dataset(config)
    moons = config.dataset == "moons"
    hidden = config.hidden or (MOONS_HIDDEN_UNITS if moons else DEFAULT_HIDDEN_UNITS)
    epochs = config.epochs or (MOONS_EPOCHS if moons else DEFAULT_EPOCHS)
    init_seq, train_seq = np.random.SeedSequence(seed).spawn(2)
    model = init_mlp([ds.n, hidden, ds.k], int(init_seq.generate_state(1)[0]))
    history = train(
        model,
        ds,
        mode,
        dist,
        epochs=epochs,
        batch_size=config.batch_size,
        seed=int(train_seq.generate_state(1)[0]),
        mixup_samples=config.mixup_samples,
    )
    assert history.model is not None
    result: dict[str, Any] = {
        "tag": _tag(mode, dist),
        "seed": seed,
        "history": history.rows(),
        "losses": np.asarray(history.losses),
        "errors": np.asarray(history.train_errors),
        "evaluation": evaluate(history.model, ds),
        "grid": None,
    }
    if ds.n == 2:
        spec = _train_grid(config, ds)
        result["grid"] = probability_grid(history.model, spec)
    return result


def cmd_train(config: ExperimentConfig, run_dir: Path) -> tuple[dict[str, Any], str]:
    """Train MLPs over modes, mixing distributions and seeds."""
    ds = _dataset(config)
    tasks = []
    for mode in config.modes:
        dists: list[MixingDistribution | None] = (
            list(_distributions(config)) if mode == "mixup" else [None]
        )
        for dist in dists:
            for offset in range(config.seeds):
                tasks.append((config, mode, dist, config.seed + offset))
    results = _map(_train_task, tasks, config.workers)

    eval_rows: list[dict[str, Any]] = []
    by_tag: dict[str, list[dict[str, Any]]] = defaultdict(list)
    for res in results:
        tag, seed = res["tag"], res["seed"]
        by_tag[tag].append(res)
        write_csv(
            run_dir / f"history-{tag}-s{seed}.csv",
            ["epoch", "loss", "train_error"],
            res["history"],
        )
        ev = res["evaluation"]
        for idx in range(ds.m):
            row: dict[str, Any] = {
                "run": tag,
                "seed": seed,
                "point": idx,
                "label": int(ds.labels[idx]),
            }
            for c in range(1, ds.k + 1):
                row[f"p{c}"] = float(ev.probs[idx, c - 1])
            row["prediction"] = int(ev.predictions[idx])
            eval_rows.append(row)
    write_csv(
        run_dir / "results.csv",
        [
            "run",
            "seed",
            "point",
            "label",
            *(f"p{c}" for c in range(1, ds.k + 1)),
            "prediction",
        ],
        eval_rows,
    )

    summary: dict[str, Any] = {"dataset": ds.name, "runs": {}}
    curves: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    curve_rows: list[dict[str, Any]] = []
    for tag in sorted(by_tag):
        runs = by_tag[tag]
        errors = np.vstack([r["errors"] for r in runs])
        losses = np.vstack([r["losses"] for r in runs])
        mean, sd = errors.mean(axis=0), errors.std(axis=0)
        curves[tag] = (mean, sd)
        for epoch in range(errors.shape[1]):
            curve_rows.append(
                {
                    "run": tag,
                    "epoch": epoch + 1,
                    "mean_error": mean[epoch],
                    "sd_error": sd[epoch],
                    "mean_loss": losses[:, epoch].mean(),
                }
            )
        probs = np.stack([r["evaluation"].probs for r in runs])
        summary["runs"][tag] = {
            "seeds": [r["seed"] for r in runs],
            "epochs": int(errors.shape[1]),
            "final_error_mean": float(errors[:, -1].mean()),
            "final_error_sd": float(errors[:, -1].std()),
            "mean_probs": probs.mean(axis=0),
            "misclassified_fraction": (
                np.stack([~r["evaluation"].correct for r in runs]).mean(axis=0)
            ),
        }
        grids = [r["grid"] for r in runs if r["grid"] is not None]
        if grids:
            spec = _train_grid(config, ds)
            plot_probability_map(
                np.mean(grids, axis=0),
                spec,
                ds,
                run_dir / f"boundary-{tag}.svg",
                title=f"{ds.name}, {tag}, mean of {len(grids)} runs",
            )
    write_csv(
        run_dir / "curves.csv",
        ["run", "epoch", "mean_error", "sd_error", "mean_loss"],
        curve_rows,
    )
    plot_training_curves(curves, run_dir / "curves.svg", title=ds.name)

    finals = ", ".join(
        f"{tag} {summary['runs'][tag]['final_error_mean']:.3f}"
        for tag in sorted(by_tag)
    )
    return summary, f"{len(results)} runs on {ds.name}; final train error {finals}"


# ---------------------------------------------------------------------------
# recover
# ---------------------------------------------------------------------------


def cmd_recover(config: ExperimentConfig, run_dir: Path) -> tuple[dict[str, Any], str]:
    """Round-trip random points through their midpoints."""
    rng = np.random.default_rng(config.seed)
    points = rng.standard_normal((config.m, config.dim))
    midpoints = form_midpoints(points)
    summary: dict[str, Any] = {"m": config.m, "dim": config.dim}

    if config.unlabeled:
        if config.dim != 1:
            raise ConfigError("unlabeled recovery is 1-D only", field="dim")
        values = rng.permutation(np.array([v[0] for _, v in midpoints]))
        write_midpoints_csv(run_dir / "midpoints.csv", values, labeled=False)
        found = recover_unlabeled_bruteforce(values, config.m)
        original = np.sort(points[:, 0])
        rows = [
            {"solution": s, "index": i, "value": float(v)}
            for s, sol in enumerate(found)
            for i, v in enumerate(sol)
        ]
        write_csv(run_dir / "results.csv", ["solution", "index", "value"], rows)
        summary["solutions"] = len(found)
        summary["matches_original"] = any(
            np.allclose(sol, original, rtol=0.0, atol=1e-8) for sol in found
        )
        headline = f"{len(found)} consistent multisets for m={config.m}"
    else:
        write_midpoints_csv(run_dir / "midpoints.csv", midpoints)
        result = recover_labeled(midpoints, config.m)
        error = float(np.max(np.abs(result.points - points)))
        rows = [
            {
                "index": i,
                **{f"x{c}": points[i, c] for c in range(config.dim)},
                **{f"recovered{c}": result.points[i, c] for c in range(config.dim)},
            }
            for i in range(config.m)
        ]
        header = [
            "index",
            *(f"x{c}" for c in range(config.dim)),
            *(f"recovered{c}" for c in range(config.dim)),
        ]
        write_csv(run_dir / "results.csv", header, rows)
        summary["residual"] = result.residual
        summary["max_error"] = error
        headline = f"recovered {config.m} points, residual {result.residual:.3g}"

    if config.rank_trials:
        report = permutation_rank_trial(
            config.m, config.rank_trials, config.seed, include_identity=True
        )
        write_csv(
            run_dir / "ranks.csv",
            ["trial", "rank"],
            ({"trial": t, "rank": r} for t, r in enumerate(report.ranks)),
        )
        summary["rank_trials"] = report.to_dict()
        headline += f"; min non-column rank {report.min_rank_among_non_column_perms}"
    return summary, headline


# ---------------------------------------------------------------------------
# assumptions
# ---------------------------------------------------------------------------


def cmd_assumptions(
    config: ExperimentConfig, run_dir: Path
) -> tuple[dict[str, Any], str]:
    """Collinearity check, margin radii, distance estimates and probe checks."""
    ds = _dataset(config)
    dists = _distributions(config)
    summary: dict[str, Any] = {"dataset": ds.name, "m": ds.m}

    if ds.m <= _MAX_COLLINEARITY_POINTS:
        violations = check_assumption1(ds, config.tol)
        write_violations_csv(run_dir / "violations.csv", violations)
        summary["collinearity_violations"] = len(violations)
    else:
        logger.info("skipping the collinearity check for m=%d", ds.m)
        summary["collinearity_violations"] = None

    if ds.k >= 2:
        summary["margin_radius"] = {
            str(cls): margin_radius(ds, cls) for cls in range(1, ds.k + 1)
        }

    references = {"train": ds}
    if config.dataset == "mnist":
        mnist_dir = config.mnist_dir or default_mnist_dir()
        assert mnist_dir is not None
        references["test"] = load_mnist(mnist_dir, "test", config.fraction, config.seed)
    rows: list[dict[str, Any]] = []
    for dist in dists:
        for name, ref in references.items():
            value = estimate_epsilon(
                ds, dist, config.n_samples, reference=ref, seed=config.seed
            )
            rows.append(
                {"mixing": dist.label, "reference": name, "min_distance": value}
            )
    write_csv(run_dir / "results.csv", ["mixing", "reference", "min_distance"], rows)
    summary["min_distance"] = {
        f"{r['mixing']}/{r['reference']}": r["min_distance"] for r in rows
    }

    probes = _probes(config, ds)
    if probes:
        if config.eps is None:
            raise ConfigError("pointwise checks need --eps", field="eps")
        probe_rows = []
        for x in probes:
            cls = _probe_class(ds, x)
            report = check_assumption2(
                ds, x, cls, config.eps, config.delta, config.tol_line, dists[0]
            )
            probe_rows.append(
                {
                    "probe": ";".join(f"{c:g}" for c in x),
                    "class": cls,
                    "holds": report.holds,
                    "in_xmix": report.in_xmix,
                    "witnesses": len(report.witnesses),
                }
            )
        write_csv(
            run_dir / "probes.csv",
            ["probe", "class", "holds", "in_xmix", "witnesses"],
            probe_rows,
        )
        summary["probes_holding"] = sum(r["holds"] for r in probe_rows)

    smallest = min((r["min_distance"] for r in rows), default=float("inf"))
    return summary, f"{ds.name}: minimum distance {smallest:.6g}"


# ---------------------------------------------------------------------------
# linear
# ---------------------------------------------------------------------------


def _linear_task(task: tuple[Any, ...]) -> list[dict[str, Any]]:
    config, seed = task
    ds = from_spec("gaussian", n=config.n, d=config.d, seed=seed)
    interpolator, certificate = min_norm_interpolator(ds)
    rows = []
    for dist in _distributions(config):
        fit = minimize_mixup_linear(
            ds,
            dist,
            quadrature_nodes=config.quadrature_nodes,
            same_class_terms=config.same_class_terms,
        )
        theta = fit.classifier.theta
        k_mixup = float(np.mean(fit.classifier.margins(ds.points, ds.signed_labels)))
        rows.append(
            {
                "seed": seed,
                "mixing": dist.label,
                "is_max_margin": certificate.is_max_margin,
                "cosine": cosine(theta, interpolator.theta),
                "k_mixup": k_mixup,
                "margin_residual": margin_residual(theta, ds, k_mixup) / k_mixup,
                "grad_norm": fit.grad_norm,
                "iters": fit.iterations,
            }
        )
    return rows


def cmd_linear(config: ExperimentConfig, run_dir: Path) -> tuple[dict[str, Any], str]:
    """Compare the Mixup minimiser with the max-margin solution on Gaussian data."""
    tasks = [(config, config.seed + t) for t in range(config.trials)]
    rows = [row for chunk in _map(_linear_task, tasks, config.workers) for row in chunk]
    write_csv(
        run_dir / "results.csv",
        [
            "seed",
            "is_max_margin",
            "cosine",
            "k_mixup",
            "grad_norm",
            "iters",
            "mixing",
            "margin_residual",
        ],
        rows,
    )
    seeds_max_margin = {r["seed"] for r in rows if r["is_max_margin"]}
    summary: dict[str, Any] = {
        "n": config.n,
        "d": config.d,
        "trials": config.trials,
        "fraction_max_margin": len(seeds_max_margin) / config.trials,
        "mixing": {},
    }
    for dist in _distributions(config):
        mine = [r for r in rows if r["mixing"] == dist.label and r["is_max_margin"]]
        summary["mixing"][dist.label] = {
            "k_estimate": estimate_k(dist, quadrature_nodes=config.quadrature_nodes),
            "mean_cosine_given_max_margin": (
                float(np.mean([r["cosine"] for r in mine])) if mine else None
            ),
            "max_margin_residual": (
                float(np.max([r["margin_residual"] for r in mine])) if mine else None
            ),
        }
    headline = (
        f"{config.trials} trials, "
        f"max-margin fraction {summary['fraction_max_margin']:.2f}"
    )
    return summary, headline


# ---------------------------------------------------------------------------
# fetch-mnist
# ---------------------------------------------------------------------------


def cmd_fetch_mnist(
    config: ExperimentConfig, run_dir: Path
) -> tuple[dict[str, Any], str]:
    """Download the MNIST IDX archives."""
    directory = config.mnist_dir or default_mnist_dir()
    if not directory:
        raise ConfigError("fetch-mnist needs --mnist-dir", field="mnist_dir")
    paths = fetch_mnist(directory)
    summary = {"files": {k: str(p) for k, p in sorted(paths.items())}}
    return summary, f"MNIST files in {directory}"


COMMAND_HANDLERS: dict[
    str, Callable[[ExperimentConfig, Path], tuple[dict[str, Any], str]]
] = {
    "oracle": cmd_oracle,
    "train": cmd_train,
    "recover": cmd_recover,
    "assumptions": cmd_assumptions,
    "linear": cmd_linear,
    "fetch-mnist": cmd_fetch_mnist,
}


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated numbers: {text}"
        ) from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON or YAML file overriding the flags")
    common.add_argument("--output-root", dest="output_root")
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("-v", "--verbose", action="store_true")
    common.add_argument("-q", "--quiet", action="store_true")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument(
        "--dataset", help="x<m>k<k>, cross, moons, gaussian, mnist or csv:<path>"
    )
    data.add_argument("--sep", dest="separation", type=float)
    data.add_argument("--noise", dest="noise_sd", type=float)
    data.add_argument("--n-per-class", dest="n_per_class", type=int)
    data.add_argument("--fraction", type=float)
    data.add_argument("--mnist-dir", dest="mnist_dir")

    mixing = argparse.ArgumentParser(add_help=False)
    mixing.add_argument("--kind", choices=["beta", "uniform", "tabulated"])
    mixing.add_argument("--alpha", dest="alphas", type=_floats, help="comma-separated")
    mixing.add_argument("--density-csv", dest="density_csv")
    mixing.add_argument("--quadrature-nodes", dest="quadrature_nodes", type=int)

    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--eps", type=float)
    probe.add_argument(
        "--probe", dest="probes", type=_floats, action="append", help="e.g. 0,0.5"
    )
    probe.add_argument("--tol-line", dest="tol_line", type=float)

    parser = argparse.ArgumentParser(
        prog="mixup-optimal", description="Mixup-optimal classifier experiments"
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("oracle", parents=[common, data, mixing, probe])
    p.add_argument("--limit", action="store_true", default=None)
    p.add_argument("--grid", type=int, help="boundary grid resolution")
    p.add_argument("--crossover", action="store_true", default=None)

    p = sub.add_parser("train", parents=[common, data, mixing])
    p.add_argument("--mode", dest="modes", choices=["erm", "mixup", "both"])
    p.add_argument("--seeds", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--hidden", type=int)
    p.add_argument("--mixup-samples", dest="mixup_samples", type=int)
    p.add_argument("--grid", type=int, help="boundary plot resolution")

    p = sub.add_parser("recover", parents=[common])
    p.add_argument("--m", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--unlabeled", action="store_true", default=None)
    p.add_argument("--rank-trials", dest="rank_trials", type=int)

    p = sub.add_parser("assumptions", parents=[common, data, mixing, probe])
    p.add_argument("--delta", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--n-samples", dest="n_samples", type=int)

    p = sub.add_parser("linear", parents=[common, mixing])
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument(
        "--cross-class-only",
        dest="same_class_terms",
        action="store_false",
        default=None,
    )

    sub.add_parser("fetch-mnist", parents=[common]).add_argument(
        "--mnist-dir", dest="mnist_dir"
    )
    return parser


_CLI_ONLY = frozenset({"config", "verbose", "quiet"})


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """Flags first, then ``--config`` file values on top."""
    values = {
        key: value
        for key, value in vars(args).items()
        if key not in _CLI_ONLY and value is not None
    }
    if values.get("modes") == "both":
        values["modes"] = ["erm", "mixup"]
    elif isinstance(values.get("modes"), str):
        values["modes"] = [values["modes"]]
    config = ExperimentConfig.from_dict(values)
    if args.config:
        overrides = load_config_file(args.config)
        if overrides.get("command", config.command) != config.command:
            raise ConfigError("config file is for another command", field="command")
        config = config.updated(overrides)
    return config


def _configure_logging(verbose: bool, quiet: bool) -> None:
    if verbose:
        level = logging.DEBUG
    elif quiet:
        level = logging.ERROR
    else:
        name = os.environ.get(ENV_LOG_LEVEL, "WARNING").upper()
        level = getattr(logging, name, logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def run(config: ExperimentConfig) -> Path:
    """Execute *config* and write its run directory; returns the directory."""
    run_dir = config.run_dir
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "config.json").write_text(config.to_json())
    summary, headline = COMMAND_HANDLERS[config.command](config, run_dir)
    write_json(run_dir / "summary.json", {"command": config.command, **summary})
    print(f"{config.run_id}: {headline}")
    return run_dir


def main(argv: Sequence[str] | None = None) -> int:
    load_env()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    _configure_logging(args.verbose, args.quiet)
    try:
        run(config_from_args(args))
    except (ConfigError, ContractError, DatasetError) as exc:
        logger.error("%s", exc)
        field = getattr(exc, "field", None)
        prefix = f"{field}: " if field else ""
        print(f"error: {prefix}{exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except MixupError as exc:
        logger.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC_FAILURE
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
