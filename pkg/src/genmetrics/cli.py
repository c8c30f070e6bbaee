"""Command-line surface: score file pairs, run sweeps, benchmark, generate data.

Commands speak a small, stable protocol:

* one machine-parseable JSON status line goes to stdout at the end of every
  command that produced output (success or partial success); human-readable
  logs go to stderr;
* exit codes: 0 success, 2 usage/config error, 3 file or format error,
  4 metric precondition violation, 5 partial results (some seeds failed;
  whatever aggregated cleanly is written with a ``.partial`` suffix);
* every float serialized to CSV/JSON status output uses 9 significant
  digits, '.' decimals and '\\n' line endings regardless of locale;
* GENMETRICS_THREADS caps seed-level parallelism (0 or unset = CPU count).

Timing fields appear only on the stdout status line, never inside ``--out``
files, so reruns with identical arguments produce byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from genmetrics.errors import ConfigError, FormatError, GenMetricsError
from genmetrics.featureset import FeatureSet, load_feature_file, write_feature_file
from genmetrics.metrics import (
    KernelConfig,
    MetricReport,
    fid,
    inception_score,
    median_heuristic_bandwidth,
    mmd,
    mode_score,
)
from genmetrics.nn_test import one_nn_accuracy
from genmetrics.rng import SeededRng
from genmetrics.transport import emd
from genmetrics.experiments.sweeps import (
    PROTOCOLS,
    ExperimentCurve,
    FeatureFileSource,
    GaussianMixtureSource,
    SweepConfig,
    _worker_count,
    aggregate_curve,
    run_seed,
    validate_protocol_config,
)
from genmetrics.experiments.synthetic import (
    generate_gaussian_mixture,
    generate_toy_images,
    toy_feature_map,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FILE = 3
EXIT_PRECONDITION = 4
EXIT_PARTIAL = 5

COMPUTE_METRICS = ("is", "ms", "mmd", "wd", "fid", "nn")

_CONFIG_KEYS = {
    "metrics",
    "n",
    "k",
    "grid",
    "seeds",
    "sigma",
    "real",
    "gen",
    "image",
    "feature_map",
    "max_shift",
    "max_angle",
    "timing_reps",
}

log = logging.getLogger("genmetrics")


def _fmt(value: float) -> str:
    return f"{float(value):.9g}"


def _round9(value: float) -> float:
    return float(_fmt(value))


def _status(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True))


# ------------------------------------------------------------------ compute


def _resolve_kernel(args) -> KernelConfig:
    if args.sigma is not None:
        return KernelConfig(bandwidth=float(args.sigma))
    return KernelConfig(bandwidth="median")


def _compute_report(metric: str, real, gen, kernel: KernelConfig) -> MetricReport:
    if metric == "is":
        return MetricReport("is", inception_score(gen), {"n_gen": gen.n, "space": gen.space_tag})
    meta = {"n_real": real.n, "n_gen": gen.n, "space": gen.space_tag}
    if metric == "ms":
        return MetricReport("ms", mode_score(gen, real), meta)
    if metric == "mmd":
        sigma = (
            median_heuristic_bandwidth(real, gen)
            if kernel.bandwidth == "median"
            else float(kernel.bandwidth)
        )
        score = mmd(real, gen, KernelConfig(bandwidth=sigma))
        return MetricReport("mmd", score, {**meta, "sigma": _round9(sigma)})
    if metric == "wd":
        return MetricReport("wd", emd(real, gen)[0], meta)
    if metric == "fid":
        return MetricReport("fid", fid(real, gen), meta)
    result = one_nn_accuracy(real, gen)
    return MetricReport(
        "nn",
        result.overall,
        {**meta, "real_acc": _round9(result.real_acc), "fake_acc": _round9(result.fake_acc)},
    )


def _report_payload(report: MetricReport) -> dict:
    payload = {"metric": report.metric_name, "score": _round9(report.score)}
    for key in sorted(report.meta):
        value = report.meta[key]
        payload[key] = _round9(value) if isinstance(value, float) else value
    return payload


def _write_report(report: MetricReport, path: Path, fmt: str) -> None:
    payload = _report_payload(report)
    if fmt == "json":
        path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
        return
    n_real = payload.get("n_real", "")
    lines = [
        "metric,score,n_real,n_gen,space",
        f"{report.metric_name},{_fmt(report.score)},{n_real},{payload['n_gen']},{payload['space']}",
    ]
    path.write_text("\n".join(lines) + "\n")


def cmd_compute(args) -> int:
    try:
        kernel = _resolve_kernel(args)
        if args.metric != "is" and args.real is None:
            raise ConfigError(f"--real is required for metric {args.metric!r}")
    except GenMetricsError as exc:
        log.error("invalid arguments: %s", exc)
        return EXIT_USAGE
    try:
        gen = load_feature_file(args.gen)
        real = load_feature_file(args.real) if args.real is not None else None
    except (GenMetricsError, OSError) as exc:
        log.error("could not load inputs: %s", exc)
        return EXIT_FILE
    t0 = time.perf_counter()
    try:
        report = _compute_report(args.metric, real, gen, kernel)
    except GenMetricsError as exc:
        log.error("precondition violated for %s: %s", args.metric, exc)
        return EXIT_PRECONDITION
    wall_ms = (time.perf_counter() - t0) * 1000.0
    if args.out is not None:
        try:
            _write_report(report, Path(args.out), args.format)
        except OSError as exc:
            log.error("could not write report: %s", exc)
            return EXIT_FILE
    _status(
        {
            "command": "compute",
            "status": "ok",
            **_report_payload(report),
            "wall_time_ms": _round9(wall_ms),
            "out": str(args.out) if args.out is not None else None,
        }
    )
    return EXIT_OK


# --------------------------------------------------------------- experiment


def _source_from_doc(doc, base: Path):
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ConfigError("each source must be an object with a 'kind' field")
    kind = doc["kind"]
    try:
        if kind == "fset":
            return FeatureFileSource(base / doc["path"])
        if kind in ("gaussian-mixture", "gaussian_mixture"):
            return GaussianMixtureSource(
                doc["means"],
                doc["scales"],
                doc["weights"],
                softmax=bool(doc.get("softmax", False)),
            )
        if kind == "gaussian":
            dim = int(doc["dim"])
            mean = doc.get("mean", 0.0)
            mean_vec = np.full(dim, float(mean)) if np.isscalar(mean) else np.asarray(mean)
            return GaussianMixtureSource(
                [mean_vec],
                [float(doc.get("scale", 1.0))],
                [1.0],
                softmax=bool(doc.get("softmax", False)),
            )
    except KeyError as exc:
        raise ConfigError(f"source of kind {kind!r} is missing field {exc}") from None
    raise ConfigError(f"unknown source kind {kind!r}; expected fset, gaussian or gaussian-mixture")


def _sweep_config_from_doc(doc, base: Path) -> tuple[SweepConfig, tuple[int, ...]]:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "metrics" not in doc:
        raise ConfigError("config must list the metrics to evaluate")
    kwargs = {"metrics": tuple(doc["metrics"])}
    for key in ("n", "k", "max_shift", "timing_reps"):
        if key in doc:
            kwargs[key] = int(doc[key])
    if "max_angle" in doc:
        kwargs["max_angle"] = float(doc["max_angle"])
    if "feature_map" in doc:
        kwargs["feature_map"] = str(doc["feature_map"])
    if "grid" in doc:
        kwargs["grid"] = tuple(float(v) for v in doc["grid"])
    if "sigma" in doc:
        kwargs["kernel"] = KernelConfig(bandwidth=doc["sigma"])
    if "image" in doc:
        image = doc["image"]
        if not isinstance(image, dict) or set(image) != {"h", "w"}:
            raise ConfigError("image must be an object with exactly the fields h and w")
        kwargs["image_h"] = int(image["h"])
        kwargs["image_w"] = int(image["w"])
    if "real" in doc:
        kwargs["real"] = _source_from_doc(doc["real"], base)
    if "gen" in doc:
        kwargs["gen"] = _source_from_doc(doc["gen"], base)
    seeds = tuple(int(s) for s in doc.get("seeds", (0, 1, 2, 3, 4)))
    if not seeds:
        raise ConfigError("seeds must be a nonempty list")
    return SweepConfig(**kwargs), seeds


def _run_seeds(protocol: str, config: SweepConfig, seeds):
    def one(seed):
        try:
            return seed, run_seed(protocol, config, seed), None
        except Exception as exc:  # noqa: BLE001 - a seed failure must not kill siblings
            return seed, None, exc

    workers = _worker_count(len(seeds))
    if workers == 1:
        outcomes = [one(s) for s in seeds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(one, seeds))
    good = [(s, scores) for s, scores, exc in outcomes if exc is None]
    bad = [(s, exc) for s, _, exc in outcomes if exc is not None]
    return good, bad


def _curve_csv_lines(curve: ExperimentCurve) -> list[str]:
    lines = ["sweep_value,metric,mean,std,seed_count,space"]
    for metric in sorted(curve.series):
        series = curve.series[metric]
        rows = sorted(zip(curve.sweep_values, series.mean, series.std), key=lambda r: r[0])
        for value, mean, std in rows:
            lines.append(
                f"{_fmt(value)},{metric},{_fmt(mean)},{_fmt(std)},"
                f"{len(curve.seeds)},{curve.space_tag}"
            )
    return lines


def _emit_curve(protocol, config, seeds, csv_path: Path) -> tuple[int, int, Path]:
    """Run all seeds, write the curve CSV (with a .partial suffix when any
    seed failed), and report (exit_code, data_rows, actual_path)."""
    good, bad = _run_seeds(protocol, config, seeds)
    for seed, exc in bad:
        log.error("seed %d failed: %s", seed, exc)
    if bad:
        csv_path = csv_path.with_name(csv_path.name + ".partial")
    if good:
        curve = aggregate_curve(protocol, config, [s for s, _ in good], [r for _, r in good])
        lines = _curve_csv_lines(curve)
    else:
        lines = ["sweep_value,metric,mean,std,seed_count,space"]
    csv_path.write_text("\n".join(lines) + "\n")
    return (EXIT_PARTIAL if bad else EXIT_OK), len(lines) - 1, csv_path


def cmd_experiment(args) -> int:
    config_path = Path(args.config)
    try:
        doc = json.loads(config_path.read_text())
    except OSError as exc:
        log.error("could not read config: %s", exc)
        return EXIT_FILE
    except json.JSONDecodeError as exc:
        log.error("config is not valid JSON: %s", exc)
        return EXIT_FILE
    try:
        config, seeds = _sweep_config_from_doc(doc, config_path.parent)
        grid = validate_protocol_config(args.protocol, config)
    except ConfigError as exc:
        log.error("invalid config: %s", exc)
        return EXIT_USAGE
    except (GenMetricsError, OSError) as exc:
        log.error("could not load config inputs: %s", exc)
        return EXIT_FILE
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        sidecar = out_dir / f"{args.protocol}.config.json"
        sidecar.write_text(
            json.dumps(
                {"protocol": args.protocol, "seeds": list(seeds), "grid": list(grid), "config": doc},
                sort_keys=True,
                indent=2,
            )
            + "\n"
        )
        code, rows, csv_path = _emit_curve(args.protocol, config, seeds, out_dir / f"{args.protocol}.csv")
    except OSError as exc:
        log.error("could not write results: %s", exc)
        return EXIT_FILE
    _status(
        {
            "command": "experiment",
            "status": "ok" if code == EXIT_OK else "partial",
            "protocol": args.protocol,
            "csv": str(csv_path),
            "sidecar": str(sidecar),
            "rows": rows,
            "seeds": len(seeds),
        }
    )
    return code


# -------------------------------------------------------------------- bench


def _int_list(text: str, flag: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.split(",") if part.strip() != "")
    except ValueError:
        raise ConfigError(f"{flag} must be a comma-separated list of integers, got {text!r}") from None
    if not values:
        raise ConfigError(f"{flag} must not be empty")
    return values


def cmd_bench(args) -> int:
    try:
        sizes = _int_list(args.sizes, "--sizes")
        seeds = _int_list(args.seeds, "--seeds")
        metrics = tuple(m for m in args.metrics.split(",") if m)
        dim = int(args.dim)
        if dim < 1:
            raise ConfigError(f"--dim must be >= 1, got {dim}")
        source = GaussianMixtureSource([[0.0] * dim], [1.0], [1.0])
        config = SweepConfig(
            metrics=metrics,
            real=source,
            gen=source,
            grid=tuple(float(s) for s in sizes),
        )
        validate_protocol_config("timing", config)
        if len(set(seeds)) != len(seeds):
            raise ConfigError("--seeds must be unique")
    except ConfigError as exc:
        log.error("invalid arguments: %s", exc)
        return EXIT_USAGE
    try:
        code, rows, csv_path = _emit_curve("timing", config, seeds, Path(args.out))
    except OSError as exc:
        log.error("could not write results: %s", exc)
        return EXIT_FILE
    _status(
        {
            "command": "bench",
            "status": "ok" if code == EXIT_OK else "partial",
            "csv": str(csv_path),
            "rows": rows,
            "seeds": len(seeds),
        }
    )
    return code


# ---------------------------------------------------------------------- gen


def _gen_fset(args) -> FeatureSet:
    params = json.loads(args.params)
    if not isinstance(params, dict):
        raise ConfigError("--params must be a JSON object")
    rng = SeededRng(args.seed)
    if args.kind == "gaussian-mixture":
        if "means" in params:
            fset = generate_gaussian_mixture(
                params["means"], params["scales"], params["weights"], args.n, rng
            )
        elif "dim" in params:
            dim = int(params["dim"])
            mean = params.get("mean", 0.0)
            mean_vec = np.full(dim, float(mean)) if np.isscalar(mean) else np.asarray(mean)
            fset = generate_gaussian_mixture(
                [mean_vec], [float(params.get("scale", 1.0))], [1.0], args.n, rng
            )
        else:
            raise ConfigError("gaussian-mixture params need either 'means'/'scales'/'weights' or 'dim'")
        if params.get("softmax", False):
            z = fset.values64()
            z = np.exp(z - z.max(axis=1, keepdims=True))
            fset = FeatureSet(z / z.sum(axis=1, keepdims=True), "softmax")
        return fset
    image = {k: int(params[k]) for k in ("h", "w") if k in params}
    if set(image) != {"h", "w"}:
        raise ConfigError("toy-images params need integer fields 'h' and 'w'")
    images = generate_toy_images(args.n, image["h"], image["w"], rng)
    return toy_feature_map(images, args.feature)


def cmd_gen(args) -> int:
    try:
        fset = _gen_fset(args)
    except json.JSONDecodeError as exc:
        log.error("--params is not valid JSON: %s", exc)
        return EXIT_USAGE
    except (KeyError, TypeError, ValueError, GenMetricsError) as exc:
        log.error("invalid generation parameters: %s", exc)
        return EXIT_USAGE
    try:
        write_feature_file(fset, args.out)
    except (OSError, FormatError) as exc:
        log.error("could not write output: %s", exc)
        return EXIT_FILE
    _status(
        {
            "command": "gen",
            "status": "ok",
            "kind": args.kind,
            "n": fset.n,
            "d": fset.d,
            "space": fset.space_tag,
            "out": str(args.out),
        }
    )
    return EXIT_OK


# --------------------------------------------------------------- entrypoint


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="genmetrics",
        description="Score generative-model sample sets and run diagnostic sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="score one real/generated file pair")
    p.add_argument("--metric", required=True, choices=COMPUTE_METRICS)
    p.add_argument("--real", default=None, help="reference feature file (optional for is)")
    p.add_argument("--gen", required=True, help="generated feature file")
    band = p.add_mutually_exclusive_group()
    band.add_argument("--sigma", type=float, default=None, help="Gaussian kernel bandwidth")
    band.add_argument(
        "--median", action="store_true", help="median-heuristic bandwidth (default)"
    )
    p.add_argument("--out", default=None, help="write the report here as well")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("experiment", help="run a sweep protocol from a JSON config")
    p.add_argument("--protocol", required=True, choices=PROTOCOLS)
    p.add_argument("--config", required=True, help="JSON config file")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("bench", help="time metrics on synthetic data as n grows")
    p.add_argument("--metrics", required=True, help="comma-separated metric names")
    p.add_argument("--sizes", required=True, help="comma-separated sample counts")
    p.add_argument("--dim", required=True, type=int, help="feature dimension")
    p.add_argument("--seeds", required=True, help="comma-separated seeds")
    p.add_argument("--out", default="bench.csv", help="output CSV path")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen", help="write a synthetic FSET file")
    p.add_argument("--kind", required=True, choices=("gaussian-mixture", "toy-images"))
    p.add_argument("--params", required=True, help="JSON parameter object")
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--feature", choices=("pixel", "histogram"), default="pixel")
    p.set_defaults(func=cmd_gen)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
