"""Command-line interface.

Subcommands:

* ``generate``    compile a target image into a mirror pattern
* ``reconstruct`` simulate the far-field image of a stored pattern
* ``benchmark``   convergence curves for GS vs BGS on uniform squares
* ``compare``     side-by-side GS/BGS reconstructions for a directory of targets
* ``rerun``       repeat any previous run from its manifest.json

Exit codes: 0 success, 1 validation, 2 I/O, 3 numerical failure. Benchmark
parallelism is capped by the ``HOLOBGS_THREADS`` environment variable.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .algorithms import (
    Algorithm,
    CompensationSign,
    IterationConfig,
    ThetaConvention,
    compensate_and_binarize,
    run,
)
from .errors import FileFormatError, NumericalError, ValidationError
from .field import RealImage
from .imageio import (
    atomic_write_bytes,
    load_intensity,
    load_pattern,
    load_phase_map,
    save_intensity,
    save_pattern,
)
from .manifest import MANIFEST_FILENAME, RunManifest
from .metrics import (
    ConvergenceTrace,
    first_order_std,
    off_mask_intensity,
    reconstruct,
    rms_error,
    target_support_mask,
)
from . import plots, synth

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_NUMERICAL = 3

THREADS_ENV_VAR = "HOLOBGS_THREADS"

_TARGET_SUFFIXES = (".pgm", ".png", ".csv", ".pbm")


def _fmt(value: float) -> str:
    return format(float(value), ".12g")


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as validation failures (exit 1)."""

    def error(self, message):
        raise ValidationError(message)


def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(tok) for tok in text.split(",") if tok.strip() != "")
    except ValueError:
        raise ValidationError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise ValidationError(f"expected at least one integer in {text!r}")
    return values


def _parse_offset(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValidationError(f"--offset expects ROW,COL, got {text!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise ValidationError(f"--offset expects integers, got {text!r}") from None


def _worker_count(n_jobs: int) -> int:
    workers = min(n_jobs, os.cpu_count() or 1)
    env = os.environ.get(THREADS_ENV_VAR)
    if env is not None:
        try:
            cap = int(env)
        except ValueError:
            raise ValidationError(f"{THREADS_ENV_VAR} must be an integer, got {env!r}") from None
        if cap < 1:
            raise ValidationError(f"{THREADS_ENV_VAR} must be >= 1, got {cap}")
        workers = min(workers, cap)
    return max(workers, 1)


def _make_source(manifest: RunManifest, shape: tuple[int, int]) -> RealImage:
    if manifest.source_profile == "uniform":
        return synth.uniform_source(shape)
    if manifest.source_profile == "gaussian":
        if manifest.gaussian_waist is None:
            raise ValidationError("gaussian source profile requires --gaussian-waist")
        return synth.gaussian_source(shape, manifest.gaussian_waist)
    raise ValidationError(f"unknown source profile {manifest.source_profile!r}")


def _iteration_config(manifest: RunManifest, algorithm: str) -> IterationConfig:
    return IterationConfig(
        algorithm=Algorithm(algorithm),
        max_iterations=manifest.max_iterations,
        convergence_tolerance=manifest.convergence_tolerance,
        theta_convention=ThetaConvention(manifest.theta_convention),
        initial_phase_seed=manifest.seed,
        stop_early=manifest.stop_early,
    )


def _write_csv(path, header: str, rows: list[str]) -> None:
    atomic_write_bytes(path, ("\n".join([header] + rows) + "\n").encode("ascii"))


# ---------------------------------------------------------------------------
# command implementations (manifest in, files out)


def _exec_generate(manifest: RunManifest) -> int:
    if manifest.algorithm is None:
        raise ValidationError("generate requires an algorithm")
    target = load_intensity(manifest.target_path)
    if manifest.target_offset != (0, 0):
        target = RealImage(
            np.roll(target.data, manifest.target_offset, axis=(0, 1))
        )
    source = _make_source(manifest, target.shape)
    aberration = (
        load_phase_map(manifest.phase_map_path) if manifest.phase_map_path else None
    )

    cfg = _iteration_config(manifest, manifest.algorithm)
    state, pattern = run(target, source, cfg)
    if aberration is not None:
        pattern = compensate_and_binarize(
            state.A, aberration, CompensationSign(manifest.compensation_sign)
        )
    recon = reconstruct(pattern, source, aberration)

    out = Path(manifest.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_pattern(pattern, out / "pattern.pbm")
    save_intensity(recon, out / "recon.png", normalize=True, bit_depth=16)
    state.trace.write_csv(out / "trace.csv")
    manifest.write(out / MANIFEST_FILENAME)

    mask = target_support_mask(target)
    print(
        f"{manifest.algorithm}: {state.iteration} iteration(s), "
        f"converged={'yes' if state.converged else 'no'}"
    )
    print(f"first_order_std = {_fmt(first_order_std(recon, mask))}")
    print(f"rms_error = {_fmt(rms_error(recon, target, mask))}")
    for name in ("pattern.pbm", "recon.png", "trace.csv", MANIFEST_FILENAME):
        print(f"wrote {out / name}")
    return EXIT_OK


def _exec_reconstruct(manifest: RunManifest) -> int:
    pattern = load_pattern(manifest.pattern_path)
    source = _make_source(manifest, pattern.shape)
    aberration = (
        load_phase_map(manifest.phase_map_path) if manifest.phase_map_path else None
    )
    target = (
        load_intensity(manifest.target_path) if manifest.target_path else None
    )

    recon = reconstruct(pattern, source, aberration)

    out = Path(manifest.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_intensity(recon, out / "recon.png", normalize=True, bit_depth=16)
    manifest.write(out / MANIFEST_FILENAME)

    if target is not None:
        mask = target_support_mask(target)
        print(f"first_order_std = {_fmt(first_order_std(recon, mask))}")
        print(f"rms_error = {_fmt(rms_error(recon, target, mask))}")
    print(f"wrote {out / 'recon.png'}")
    return EXIT_OK


def _benchmark_trace(
    manifest: RunManifest, algorithm: str, square_size: int
) -> ConvergenceTrace:
    shape = (manifest.field_size, manifest.field_size)
    target = synth.uniform_square(shape, square_size)
    source = _make_source(manifest, shape)
    cfg = _iteration_config(manifest, algorithm)
    state, _ = run(target, source, cfg)
    return state.trace


def _exec_benchmark(manifest: RunManifest) -> int:
    field = manifest.field_size
    sizes = manifest.square_sizes
    if field is None or sizes is None:
        raise ValidationError("benchmark requires a field size and square sizes")
    if field < 8:
        raise ValidationError(f"field size must be >= 8, got {field}")
    for size in sizes:
        if not (1 <= size < field / 2):
            raise ValidationError(
                f"square size {size} must satisfy 1 <= size < field/2 = {field / 2}"
            )

    jobs = [(alg, size) for alg in ("gs", "bgs") for size in sizes]
    workers = _worker_count(len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {
                job: pool.submit(_benchmark_trace, manifest, *job) for job in jobs
            }
            traces = {job: fut.result() for job, fut in futures.items()}
    else:
        traces = {job: _benchmark_trace(manifest, *job) for job in jobs}

    csv_rows = []
    for alg, size in jobs:
        for rec in traces[(alg, size)]:
            csv_rows.append(
                f"{alg},{size},{rec.iteration},"
                f"{_fmt(rec.first_order_std)},{_fmt(rec.field_change)}"
            )

    # Curves in size-major order so each square's GS/BGS pair sits together.
    curve_jobs = [(alg, size) for size in sizes for alg in ("gs", "bgs")]
    labels = [f"{alg}_{size}" for alg, size in curve_jobs]
    dat_lines = [
        "# GS vs BGS convergence: first-order std/mean per iteration",
        "# iteration " + " ".join(labels),
    ]
    for i in range(manifest.max_iterations):
        cells = [str(i + 1)]
        for job in curve_jobs:
            cells.append(_fmt(traces[job][i].first_order_std))
        dat_lines.append(" ".join(cells))

    out = Path(manifest.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out / "benchmark.csv",
        "algorithm,square_size,iteration,first_order_std,field_change",
        csv_rows,
    )
    atomic_write_bytes(out / "benchmark.dat", ("\n".join(dat_lines) + "\n").encode("ascii"))
    plots.save_convergence_figure(
        {
            label: traces[job].first_order_stds
            for label, job in zip(labels, curve_jobs)
        },
        out / "benchmark.png",
    )
    manifest.write(out / MANIFEST_FILENAME)

    for label, job in zip(labels, curve_jobs):
        print(f"{label}: final first_order_std = {_fmt(traces[job][-1].first_order_std)}")
    for name in ("benchmark.csv", "benchmark.dat", "benchmark.png", MANIFEST_FILENAME):
        print(f"wrote {out / name}")
    return EXIT_OK


def _exec_compare(manifest: RunManifest) -> int:
    tdir = Path(manifest.targets_dir)
    if not tdir.is_dir():
        raise FileNotFoundError(f"targets directory not found: {tdir}")
    paths = sorted(
        p for p in tdir.iterdir()
        if p.is_file() and p.suffix.lower() in _TARGET_SUFFIXES
    )
    if not paths:
        raise ValidationError(f"no targets found in {tdir}")

    out = Path(manifest.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    for path in paths:
        target = load_intensity(path)
        source = _make_source(manifest, target.shape)
        mask = target_support_mask(target)
        recons = {}
        for alg in ("gs", "bgs"):
            cfg = _iteration_config(manifest, alg)
            _, pattern = run(target, source, cfg)
            recon = reconstruct(pattern, source)
            recons[alg] = recon
            rows.append(
                f"{path.name},{alg},{manifest.max_iterations},"
                f"{_fmt(first_order_std(recon, mask))},"
                f"{_fmt(rms_error(recon, target, mask))},"
                f"{_fmt(off_mask_intensity(recon, mask))}"
            )
        plots.save_comparison_row(
            target,
            recons["gs"],
            recons["bgs"],
            out / f"{path.stem}_comparison.png",
            title=path.stem,
        )
        print(f"compared {path.name}")

    _write_csv(
        out / "metrics.csv",
        "target,algorithm,iterations,first_order_std,rms_error,off_mask_intensity",
        rows,
    )
    manifest.write(out / MANIFEST_FILENAME)
    print(f"wrote {out / 'metrics.csv'}")
    return EXIT_OK


_EXECUTORS = {
    "generate": _exec_generate,
    "reconstruct": _exec_reconstruct,
    "benchmark": _exec_benchmark,
    "compare": _exec_compare,
}


# ---------------------------------------------------------------------------
# argument parsing


def _add_source_args(sub) -> None:
    sub.add_argument(
        "--source-profile", choices=("uniform", "gaussian"), default="uniform",
        help="illumination profile (default: uniform)",
    )
    sub.add_argument(
        "--gaussian-waist", type=float, default=None, metavar="PIXELS",
        help="1/e^2 intensity radius for the gaussian profile",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="holobgs", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)

    gen = subs.add_parser("generate", help="compile a target image into a mirror pattern")
    gen.add_argument("--target", required=True, help="target intensity image (pgm/png/csv/pbm)")
    gen.add_argument("--algorithm", required=True, choices=("gs", "bgs"))
    gen.add_argument("--iters", type=int, default=30, help="iteration count (default: 30)")
    gen.add_argument(
        "--tol", type=float, default=1e-4,
        help="relative field-change tolerance for --stop-on-converge (default: 1e-4)",
    )
    gen.add_argument(
        "--stop-on-converge", action="store_true",
        help="stop before --iters once the field change drops below --tol",
    )
    gen.add_argument(
        "--theta-convention", choices=("on_below_pi", "on_at_or_above_pi"),
        default="on_below_pi", help="which phase half-range switches a mirror on",
    )
    _add_source_args(gen)
    gen.add_argument(
        "--offset", type=_parse_offset, default=(0, 0), metavar="ROW,COL",
        help="circularly shift the target by this many pixels before running",
    )
    gen.add_argument("--phase-map", default=None, help="aberration map (csv radians or grayscale)")
    gen.add_argument("--comp-sign", choices=("add", "subtract"), default="subtract")
    gen.add_argument("--seed", type=int, default=None, help="seed for random initial phase")
    gen.add_argument("--out", default=".", help="output directory (default: .)")

    rec = subs.add_parser("reconstruct", help="simulate the far-field image of a pattern")
    rec.add_argument("--pattern", required=True, help="mirror pattern (pbm)")
    _add_source_args(rec)
    rec.add_argument("--phase-map", default=None, help="aberration applied in the forward model")
    rec.add_argument("--target", default=None, help="target image used only to build the metrics mask")
    rec.add_argument("--out", default=".", help="output directory (default: .)")

    ben = subs.add_parser("benchmark", help="GS vs BGS convergence on uniform squares")
    ben.add_argument("--field-size", type=int, default=256)
    ben.add_argument(
        "--square-sizes", type=_parse_int_list, default=(17, 33), metavar="N,N,...",
    )
    ben.add_argument("--max-iters", type=int, default=30)
    _add_source_args(ben)
    ben.add_argument("--out", default=".", help="output directory (default: .)")

    cmp_ = subs.add_parser("compare", help="three-panel target/GS/BGS rows for a directory")
    cmp_.add_argument("--targets", required=True, help="directory of target images")
    cmp_.add_argument("--iters", type=int, default=6)
    _add_source_args(cmp_)
    cmp_.add_argument("--out", default=".", help="output directory (default: .)")

    rer = subs.add_parser("rerun", help="repeat a run from its manifest.json")
    rer.add_argument("manifest", help="path to a manifest.json")
    rer.add_argument("--out", default=None, help="redirect outputs to a different directory")

    return parser


def _manifest_from_args(args: argparse.Namespace) -> RunManifest:
    if args.command == "generate":
        return RunManifest(
            command="generate",
            output_dir=args.out,
            algorithm=args.algorithm,
            max_iterations=args.iters,
            convergence_tolerance=args.tol,
            theta_convention=args.theta_convention,
            source_profile=args.source_profile,
            gaussian_waist=args.gaussian_waist,
            target_offset=args.offset,
            compensation_sign=args.comp_sign,
            seed=args.seed,
            target_path=args.target,
            phase_map_path=args.phase_map,
            stop_early=args.stop_on_converge,
        )
    if args.command == "reconstruct":
        return RunManifest(
            command="reconstruct",
            output_dir=args.out,
            source_profile=args.source_profile,
            gaussian_waist=args.gaussian_waist,
            pattern_path=args.pattern,
            phase_map_path=args.phase_map,
            target_path=args.target,
        )
    if args.command == "benchmark":
        return RunManifest(
            command="benchmark",
            output_dir=args.out,
            max_iterations=args.max_iters,
            source_profile=args.source_profile,
            gaussian_waist=args.gaussian_waist,
            field_size=args.field_size,
            square_sizes=args.square_sizes,
        )
    if args.command == "compare":
        return RunManifest(
            command="compare",
            output_dir=args.out,
            max_iterations=args.iters,
            source_profile=args.source_profile,
            gaussian_waist=args.gaussian_waist,
            targets_dir=args.targets,
        )
    raise ValidationError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "rerun":
            manifest = RunManifest.load(args.manifest)
            if args.out is not None:
                manifest = dataclasses.replace(manifest, output_dir=args.out)
        else:
            manifest = _manifest_from_args(args)
        return _EXECUTORS[manifest.command](manifest)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (FileFormatError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
