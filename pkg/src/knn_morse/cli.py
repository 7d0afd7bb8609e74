"""Command-line entry point ``knn-morse``.

Exit codes
----------
0  success
1  input, parse or configuration error
2  general-position violation
3  critical values not distinct (report still written)
4  grid Betti numbers unstable across resolutions (report still written)
5  a verification verdict failed (report still written)
"""

from __future__ import annotations

import argparse
import sys
import time
import warnings

import numpy as np

from . import __version__
from .critical import enumerate_critical_points, euler_sum, validate_morse
from .cubical import homology_change_report, total_change
from .errors import GeneralPositionViolation, KnnMorseError, NotMorseWarning, UnstableGrid
from .geometry import Tolerances, check_general_position
from .io import (
    RunManifest,
    auxiliary_to_dict,
    critical_csv,
    critical_to_dict,
    dumps,
    envelope,
    estimate_csv,
    estimate_to_dict,
    filtration_to_dict,
    read_points_csv,
    write_text,
)
from .poisson import PoissonRunConfig, run_trials
from .simplicial import auxiliary_complex_from_data, betti_gf2, closed_form_betti

EXIT_OK, EXIT_INPUT, EXIT_GENERAL_POSITION, EXIT_NOT_MORSE, EXIT_UNSTABLE, EXIT_FAILED = range(6)

ZERO_RADIUS_NOTE = (
    "k = 1: the zero-radius minima at the data points are included; counts that "
    "start from pairs of points leave them out"
)


class UsageError(KnnMorseError):
    pass


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as err:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from err


def _window(text, dim):
    if text is None:
        return None
    vals = _floats(text, "--window")
    if len(vals) != 2 * dim:
        raise UsageError(f"--window needs {2 * dim} numbers for dimension {dim}")
    return np.array(vals[:dim]), np.array(vals[dim:])


def _tolerances(args) -> Tolerances:
    return Tolerances(
        sphere=args.tol_sphere, barycentric=args.tol_barycentric, general_position=args.tol_general_position
    )


def _manifest(args, sub, dim=None, **options) -> RunManifest:
    tol = _tolerances(args) if hasattr(args, "tol_sphere") else None
    return RunManifest(
        subcommand=sub,
        inputs=tuple(a for a in [getattr(args, "input", None)] if a),
        k=args.k,
        dim=dim,
        seed=getattr(args, "seed", None),
        tolerances={} if tol is None else {
            "sphere": tol.sphere, "barycentric": tol.barycentric, "general_position": tol.general_position
        },
        options=options,
        output=args.output,
        version=__version__,
    )


def _finish(args, man: RunManifest, started: float, text_fn):
    if args.timing:
        man.duration = time.perf_counter() - started
    write_text(args.output, text_fn(man))


def _load(args, tol):
    P = read_points_csv(args.input)
    if args.k < 1 or args.k > len(P):
        raise UsageError(f"k must be between 1 and the number of points ({len(P)})")
    report = check_general_position(P, tol)
    if not report.ok:
        v = report.violations[0]
        raise GeneralPositionViolation(f"{v.kind} among points {v.labels}", v.labels)
    return P


def cmd_crit(args) -> int:
    started = time.perf_counter()
    tol = _tolerances(args)
    P = _load(args, tol)
    win = _window(args.window, P.dim)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NotMorseWarning)
        crits = enumerate_critical_points(P, args.k, window=win, tol=tol)
    morse = validate_morse(crits, P, tol)
    man = _manifest(args, "crit", P.dim, window=None if win is None else [list(win[0]), list(win[1])],
                    format=args.format)
    notes = [ZERO_RADIUS_NOTE] if args.k == 1 else []
    if not morse.distinct_values:
        notes.append("two critical values coincide within tolerance")
    if args.format == "csv":
        _finish(args, man, started, lambda m: critical_csv(crits))
    else:
        _finish(args, man, started, lambda m: dumps(envelope(
            m,
            morse={"distinct_values": morse.distinct_values, "min_gap": morse.min_gap,
                   "nondegenerate": morse.nondegenerate},
            notes=notes,
            euler_sum=euler_sum(crits) if win is None else None,
            critical_points=[critical_to_dict(cp) for cp in crits],
        )))
    if args.figure:
        if P.dim != 2:
            print("figure skipped: only planar data is drawn", file=sys.stderr)
        else:
            from .plotting import critical_points_figure, save
            save(critical_points_figure(P, crits, args.k), args.figure)
    if not morse.distinct_values:
        print("warning: critical values are not distinct", file=sys.stderr)
        return EXIT_NOT_MORSE
    return EXIT_OK


def cmd_verify(args) -> int:
    started = time.perf_counter()
    tol = _tolerances(args)
    P = _load(args, tol)
    if P.dim != 2:
        raise UsageError("verify needs planar (two-column) data")
    eps = None if args.epsilon == "auto" else _floats(args.epsilon, "--epsilon")[0]
    crits = enumerate_critical_points(P, args.k, tol=tol, warn=False)
    morse = validate_morse(crits, P, tol)
    if not morse.distinct_values:
        print("critical values are not distinct; the check needs separated values", file=sys.stderr)
        return EXIT_NOT_MORSE
    code = EXIT_OK
    try:
        records = homology_change_report(P, args.k, crits, epsilon=eps, resolution=args.resolution)
    except UnstableGrid as err:
        print(f"error: {err}", file=sys.stderr)
        records, code = err.records, EXIT_UNSTABLE
    passed = all(rec.passed for rec in records)
    if code == EXIT_OK and not passed:
        code = EXIT_FAILED
    man = _manifest(args, "verify", P.dim, resolution=args.resolution, epsilon=args.epsilon)
    _finish(args, man, started, lambda m: dumps(envelope(
        m,
        all_pass=passed,
        total_change=list(total_change(records)),
        notes=[ZERO_RADIUS_NOTE] if args.k == 1 else [],
        records=[filtration_to_dict(rec) for rec in records],
    )))
    if args.figure:
        from .plotting import filtration_figure, save
        save(filtration_figure(records, args.k), args.figure)
    return code


def cmd_aux(args) -> int:
    started = time.perf_counter()
    tol = _tolerances(args)
    P = _load(args, tol)
    crits = enumerate_critical_points(P, args.k, tol=tol, warn=False)
    i = args.critical_rank
    if not 0 <= i < len(crits):
        raise UsageError(f"--critical-rank {i} is out of range (there are {len(crits)} critical points)")
    cp = crits[i]
    aux = auxiliary_complex_from_data(cp, P, args.k, tol)
    betti = betti_gf2(aux.complex)
    matches = aux.matches_skeleton(cp.index)
    man = _manifest(args, "aux", P.dim, critical_rank=i)
    _finish(args, man, started, lambda m: dumps(envelope(
        m,
        critical_point=critical_to_dict(cp),
        expected_betti=list(closed_form_betti(cp.n_boundary, cp.index).betti),
        auxiliary_complex=auxiliary_to_dict(aux, betti, matches),
    )))
    return EXIT_OK if matches else EXIT_FAILED


def cmd_euler(args) -> int:
    started = time.perf_counter()
    tol = _tolerances(args)
    P = _load(args, tol)
    crits = enumerate_critical_points(P, args.k, tol=tol, warn=False)
    total = euler_sum(crits)
    by_index = {}
    for cp in crits:
        by_index[cp.index] = by_index.get(cp.index, 0) + 1
    man = _manifest(args, "euler", P.dim)
    _finish(args, man, started, lambda m: dumps(envelope(
        m,
        euler_sum=total,
        verdict=total == 1,
        critical_points=len(crits),
        count_by_index={str(i): by_index[i] for i in sorted(by_index)},
    )))
    return EXIT_OK if total == 1 else EXIT_FAILED


def cmd_poisson(args) -> int:
    started = time.perf_counter()
    nus = _floats(args.nu, "--nu")
    win = _window(args.window, args.d) if args.window else (np.zeros(args.d), np.ones(args.d))
    buffer = None if args.buffer == "auto" else _floats(args.buffer, "--buffer")[0]
    try:
        config = PoissonRunConfig(dim=args.d, k=args.k, intensities=tuple(nus),
                                  window=(tuple(win[0]), tuple(win[1])), trials=args.trials,
                                  seed=args.seed, buffer=buffer)
    except ValueError as err:
        raise UsageError(str(err)) from err
    est = run_trials(config, workers=args.workers)
    man = _manifest(args, "poisson", args.d, nu=list(config.intensities), trials=config.trials,
                    window=[list(config.window[0]), list(config.window[1])], buffer=args.buffer)
    _finish(args, man, started, lambda m: dumps(envelope(m, estimate=estimate_to_dict(est))))
    if args.csv:
        write_text(args.csv, estimate_csv(est))
    if args.figure:
        from .plotting import poisson_figure, save
        save(poisson_figure(est), args.figure)
    return EXIT_OK


def _common(p, with_input=True):
    if with_input:
        p.add_argument("input", help="headerless CSV, one point per row ('-' for stdin)")
    p.add_argument("-k", type=int, required=True, help="neighbor order")
    p.add_argument("-o", "--output", default="-", help="report path ('-' for stdout)")
    p.add_argument("--timing", action="store_true", help="record wall-clock duration in the manifest")
    if with_input:
        p.add_argument("--tol-sphere", type=float, default=Tolerances.sphere)
        p.add_argument("--tol-barycentric", type=float, default=Tolerances.barycentric)
        p.add_argument("--tol-general-position", type=float, default=Tolerances.general_position)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="knn-morse", description="Critical points of k-NN distance functions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("crit", help="enumerate critical points")
    _common(p)
    p.add_argument("--window", help="x0,y0,...,x1,y1,... box for critical centers")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--figure", help="write a plot of the critical points (planar data)")
    p.set_defaults(func=cmd_crit)

    p = sub.add_parser("verify", help="check homology changes at each critical value (planar)")
    _common(p)
    p.add_argument("--resolution", type=int, default=512)
    p.add_argument("--epsilon", default="auto")
    p.add_argument("--figure", help="write a plot of Betti numbers across critical values")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("aux", help="auxiliary complex of one critical point")
    _common(p)
    p.add_argument("--critical-rank", type=int, required=True, help="position in radius order, from 0")
    p.set_defaults(func=cmd_aux)

    p = sub.add_parser("euler", help="alternating sum of the homology budgets")
    _common(p)
    p.set_defaults(func=cmd_euler)

    p = sub.add_parser("poisson", help="Monte-Carlo critical point counts of Poisson samples")
    _common(p, with_input=False)
    p.add_argument("--d", type=int, required=True, help="dimension")
    p.add_argument("--nu", required=True, help="comma-separated intensities")
    p.add_argument("--trials", type=int, default=30)
    p.add_argument("--window", help="lower then upper corner, comma-separated (default unit box)")
    p.add_argument("--buffer", default="auto")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", help="also write the table of means and the regression as CSV")
    p.add_argument("--figure", help="write a plot of mean counts against intensity")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: KNN_MORSE_THREADS, 0 = all cores)")
    p.set_defaults(func=cmd_poisson)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GeneralPositionViolation as err:
        print(f"general position violated: {err}", file=sys.stderr)
        return EXIT_GENERAL_POSITION
    except (KnnMorseError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
