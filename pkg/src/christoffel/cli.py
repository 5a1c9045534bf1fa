"""Command-line front end.

Subcommands: ``sample`` (surface clouds to CSV), ``rank-curve``
(rank-versus-degree JSON with dimension fits), ``density`` (grid CSV
plus JSON summary), ``perturb`` (noise sweep), and ``christoffel-eval``
(point-wise kernel/Christoffel queries).  Every JSON output embeds the
full run configuration and a format version; identical configurations
and seeds produce byte-identical files.

Exit codes: 0 success, 2 usage error, 3 input/output error, 4 numerical
failure.  The environment variable ``CHRISTOFFEL_THREADS`` caps the
linear-algebra thread pools; it is applied before the numerical
libraries load, so only the console entry point honours it reliably.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

FORMAT_VERSION = "1"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


def _apply_thread_cap() -> None:
    cap = os.environ.get("CHRISTOFFEL_THREADS")
    if cap is None:
        return
    if not cap.isdigit() or int(cap) < 1:
        raise UsageError(f"CHRISTOFFEL_THREADS must be a positive integer, got {cap!r}")
    for var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        os.environ.setdefault(var, cap)


def read_csv_points(path):
    """Read a comma-separated point cloud, auto-detecting a header row.

    The first row is treated as a header when any cell fails to parse as
    a number.  Ragged rows are rejected with their line number.
    """
    import numpy as np

    rows = []
    width = None
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise InputError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, start=1):
            if not row:
                continue
            try:
                values = [float(cell) for cell in row]
            except ValueError:
                if line_no == 1:
                    continue  # header row
                raise InputError(
                    f"{path}: line {line_no}: non-numeric value in data row"
                ) from None
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise InputError(
                    f"{path}: line {line_no}: ragged row with {len(values)} "
                    f"columns, expected {width}"
                )
            rows.append(values)
    if not rows:
        raise InputError(f"{path}: no data rows")
    return np.array(rows)


def write_csv_points(path, points) -> None:
    lines = [",".join(f"{v:.17g}" for v in row) for row in points]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_grid_csv(path, grid, values, residuals) -> None:
    p = grid.points.shape[1]
    header = (
        list(grid.parameter_names)
        + [f"x{i + 1}" for i in range(p)]
        + ["value", "kernel_residual"]
    )
    lines = [",".join(header)]
    for i in range(grid.points.shape[0]):
        cells = (
            [f"{v:.17g}" for v in grid.parameters[i]]
            + [f"{v:.17g}" for v in grid.points[i]]
            + [f"{values[i]:.17g}", f"{residuals[i]:.17g}"]
        )
        lines.append(",".join(cells))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _jsonable(obj):
    import numpy as np

    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def _config_dict(args) -> dict:
    skip = {"func"}
    return {k: _jsonable(v) for k, v in sorted(vars(args).items()) if k not in skip}


def _emit_json(payload: dict, args, out_path) -> None:
    document = {"format_version": FORMAT_VERSION, "config": _config_dict(args)}
    document.update(_jsonable(payload))
    text = json.dumps(document, sort_keys=True, indent=2) + "\n"
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w") as fh:
            fh.write(text)


def _parse_degrees(text: str) -> list[int]:
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = text.split("..")
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(part) for part in text.split(",")]
    except ValueError:
        raise UsageError(
            f"cannot parse degrees {text!r}; use 'a..b' or a comma list"
        ) from None


def _parse_resolution(text):
    if text is None:
        return None
    text = text.strip().lower()
    try:
        if "x" in text:
            a, b = text.split("x")
            return (int(a), int(b))
        return int(text)
    except ValueError:
        raise UsageError(f"cannot parse grid resolution {text!r}") from None


def _parse_point(text: str):
    import numpy as np

    try:
        return np.array([float(c) for c in text.split(",")])
    except ValueError:
        raise UsageError(f"cannot parse point {text!r}") from None


def _load_cloud(args):
    """Read the input CSV, applying the optional angle embedding."""
    import numpy as np

    from .geometry import embed_angles

    data = read_csv_points(args.input)
    embed = getattr(args, "embed", None)
    if embed is None:
        return data
    if getattr(args, "angles_in_degrees", False):
        data = np.deg2rad(data)
    return embed_angles(data, embed)


def _out_pair(prefix: str) -> tuple[str, str]:
    base = prefix[:-4] if prefix.endswith(".csv") else prefix
    return base + ".csv", base + ".json"


def cmd_sample(args) -> int:
    from .geometry import SurfaceSpec, sample

    if args.n < 1:
        raise UsageError("--n must be at least 1")
    spec = SurfaceSpec(args.surface)
    points = sample(spec, args.n, args.seed)
    try:
        write_csv_points(args.out, points)
    except OSError as exc:
        raise InputError(f"cannot write {args.out}: {exc}") from exc
    return EXIT_OK


def cmd_rank_curve(args) -> int:
    from .dimension import estimate_dimension, rank_curve

    degrees = _parse_degrees(args.degrees)
    cloud = read_csv_points(args.input)
    curve = rank_curve(
        cloud,
        degrees,
        kind=args.basis,
        threshold=args.threshold,
        mode=args.threshold_mode,
    )
    usable = curve.unsaturated()
    reliable = True
    if len(usable.observations) >= 4:
        est = estimate_dimension(curve, cloud.shape[1], rel_fit_tol=args.rel_fit_tol)
        reliable = est.gate_passed
    else:
        est = estimate_dimension(
            curve, cloud.shape[1], rel_fit_tol=args.rel_fit_tol, include_saturated=True
        )
        reliable = False
    payload = {
        "curve": [
            {
                "degree": o.degree,
                "rank": o.rank,
                "s_of_d": o.basis_size,
                "n": o.sample_count,
                "saturated": o.saturated,
            }
            for o in curve.observations
        ],
        "residual_by_k": {
            str(k): {"coefficients": coef, "rms_residual": rms}
            for k, (coef, rms) in est.fits.items()
        },
        "selected_dimension": est.selected_dimension,
        "gate_passed": est.gate_passed,
        "reliable": reliable,
    }
    _emit_json(payload, args, args.out)
    return EXIT_OK


def cmd_density(args) -> int:
    from .estimators import ChristoffelDensity
    from .moments import save_moment_cache

    cloud = _load_cloud(args)
    estimator = ChristoffelDensity(
        degree=args.degree,
        basis=args.basis,
        threshold=args.threshold,
        threshold_mode=args.threshold_mode,
        surface=args.surface,
    ).fit(cloud)
    retained = estimator.spectral_.eigenvalues[: estimator.rank_]
    if retained[-1] < 1e-8 * retained[0]:
        print(
            "warning: smallest retained eigenvalue is below 1e-8 of the "
            "largest; consider a smaller degree",
            file=sys.stderr,
        )
    grid_result = estimator.evaluate_grid(_parse_resolution(args.grid))
    csv_path, json_path = _out_pair(args.out)
    try:
        _write_grid_csv(
            csv_path, grid_result.grid, grid_result.values, grid_result.kernel_residuals
        )
    except OSError as exc:
        raise InputError(f"cannot write {csv_path}: {exc}") from exc
    if args.moments_out:
        save_moment_cache(args.moments_out, estimator.moment_matrix_)
    payload = {
        "summary": {
            "degree": args.degree,
            "n": grid_result.sample_count,
            "N_of_d": grid_result.normalization.value,
            "rank": grid_result.rank,
            "min_value": float(grid_result.values.min()),
            "max_value": float(grid_result.values.max()),
            "sample_kernel_mean": grid_result.sample_kernel_mean,
        }
    }
    _emit_json(payload, args, json_path)
    return EXIT_OK


def cmd_perturb(args) -> int:
    from .geometry import SurfaceSpec, make_grid
    from .perturbation import NoiseLadder, noise_sweep

    try:
        sigmas = tuple(float(s) for s in args.sigmas.split(",") if s.strip() != "")
    except ValueError:
        raise UsageError(f"cannot parse sigma list {args.sigmas!r}") from None
    if not sigmas:
        raise UsageError("sigma list must not be empty")
    cloud = read_csv_points(args.input)
    ladder = NoiseLadder(cloud, sigmas, args.seed)
    spec = SurfaceSpec(args.surface)
    grid = make_grid(spec, _parse_resolution(args.grid))
    result = noise_sweep(ladder, args.degree, grid=grid, surface=spec)
    base = args.out[:-4] if args.out.endswith(".json") else args.out
    try:
        _write_grid_csv(
            base + "_reference.csv",
            result.grid,
            result.reference_values,
            result.reference_residuals,
        )
        for idx, level in enumerate(result.levels):
            _write_grid_csv(
                f"{base}_sigma_{idx}.csv",
                result.grid,
                level.values,
                level.kernel_residuals,
            )
    except OSError as exc:
        raise InputError(f"cannot write sweep output: {exc}") from exc
    payload = {
        "summary": {
            "degree": args.degree,
            "N_of_d": result.normalization.value,
            "levels": [
                {"sigma": level.sigma, "deviation": level.deviation}
                for level in result.levels
            ],
        }
    }
    _emit_json(payload, args, base + ".json")
    return EXIT_OK


def cmd_christoffel_eval(args) -> int:
    import numpy as np

    from .cdkernel import ChristoffelEvaluator
    from .moments import load_moment_cache, spectral

    if not args.x:
        raise UsageError("at least one --x point is required")
    points = [_parse_point(text) for text in args.x]
    if args.moments_in:
        matrix = load_moment_cache(args.moments_in)
    elif args.input:
        from .basis import default_scale_box, enumerate_basis
        from .moments import design_matrix, moment_matrix

        cloud = read_csv_points(args.input)
        box = default_scale_box(cloud) if args.basis == "chebyshev" else None
        basis = enumerate_basis(cloud.shape[1], args.degree, args.basis, box)
        matrix = moment_matrix(design_matrix(cloud, basis), basis)
    else:
        raise UsageError("either --input or --moments-in is required")
    dim = matrix.basis.ambient_dim
    for x in points:
        if x.shape != (dim,):
            raise UsageError(f"point {list(x)} does not have dimension {dim}")
    evaluator = ChristoffelEvaluator(
        spectral(matrix, args.threshold, args.threshold_mode),
        matrix.basis,
        args.kernel_tol,
    )
    stacked = np.vstack(points)
    values, residuals = evaluator.lambda_values(stacked)
    diagonal = evaluator.kernel_diagonal(stacked)
    payload = {
        "rank": evaluator.rank,
        "points": [
            {
                "x": list(x),
                "lambda": float(values[i]),
                "kernel_diagonal": float(diagonal[i]),
                "kernel_residual": float(residuals[i]),
            }
            for i, x in enumerate(points)
        ],
    }
    _emit_json(payload, args, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="christoffel",
        description="Moment matrices, Christoffel functions, and rank-based "
        "dimension and density estimation for point clouds.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_basis_options(p, default_degree=None):
        if default_degree is not None:
            p.add_argument("--degree", type=int, default=default_degree)
        p.add_argument(
            "--basis", choices=["chebyshev", "monomial"], default="chebyshev"
        )
        p.add_argument("--threshold", type=float, default=1e-10)
        p.add_argument(
            "--threshold-mode", choices=["relative", "absolute"], default="relative"
        )

    p_sample = sub.add_parser("sample", help="sample a synthetic surface to CSV")
    p_sample.add_argument(
        "--surface",
        required=True,
        choices=["cube", "sphere", "torus", "tvscreen", "circle", "bitorus"],
    )
    p_sample.add_argument("--n", type=int, required=True)
    p_sample.add_argument("--seed", type=int, default=0)
    p_sample.add_argument("--out", required=True)
    p_sample.set_defaults(func=cmd_sample)

    p_rank = sub.add_parser("rank-curve", help="rank of the moment matrix by degree")
    p_rank.add_argument("--input", required=True)
    p_rank.add_argument("--degrees", default="5..12")
    add_basis_options(p_rank)
    p_rank.add_argument("--rel-fit-tol", type=float, default=1e-2)
    p_rank.add_argument("--out", default=None)
    p_rank.set_defaults(func=cmd_rank_curve)

    p_density = sub.add_parser("density", help="density estimate on a surface grid")
    p_density.add_argument("--input", required=True)
    p_density.add_argument(
        "--surface", required=True, choices=["circle", "sphere", "bitorus"]
    )
    add_basis_options(p_density, default_degree=4)
    p_density.add_argument("--grid", default=None, help="e.g. 512 or 72x36")
    p_density.add_argument("--embed", choices=["circle", "bitorus"], default=None)
    p_density.add_argument("--angles-in-degrees", action="store_true")
    p_density.add_argument("--moments-out", default=None)
    p_density.add_argument("--out", required=True)
    p_density.set_defaults(func=cmd_density)

    p_perturb = sub.add_parser("perturb", help="noise sweep of the Christoffel function")
    p_perturb.add_argument("--input", required=True)
    p_perturb.add_argument(
        "--surface", default="circle", choices=["circle", "sphere", "bitorus"]
    )
    p_perturb.add_argument("--sigmas", required=True)
    add_basis_options(p_perturb, default_degree=6)
    p_perturb.add_argument("--grid", default=None)
    p_perturb.add_argument("--seed", type=int, default=0)
    p_perturb.add_argument("--out", required=True)
    p_perturb.set_defaults(func=cmd_perturb)

    p_eval = sub.add_parser(
        "christoffel-eval", help="point-wise Christoffel function and kernel values"
    )
    p_eval.add_argument("--input", default=None)
    p_eval.add_argument("--moments-in", default=None)
    add_basis_options(p_eval, default_degree=4)
    p_eval.add_argument("--kernel-tol", type=float, default=1e-6)
    p_eval.add_argument(
        "--x", action="append", default=None, help="point as 'c1,c2,...'; repeatable"
    )
    p_eval.add_argument("--out", default=None)
    p_eval.set_defaults(func=cmd_christoffel_eval)

    return parser


def main(argv=None) -> int:
    try:
        _apply_thread_cap()
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    parser = build_parser()
    args = parser.parse_args(argv)

    import numpy as np

    from .cdkernel import RidgeContinuationError
    from .moments import SpectralDecompositionError

    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SpectralDecompositionError, RidgeContinuationError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
