"""Command-line front end.

Subcommands
-----------
decompose   factor a unitary read from matrix JSON
qft         write the QFT matrix, its decomposition and (n <= 4) the closed-form fixture
pulses      map a decomposition to a pulse schedule
simulate    integrate a schedule and compare against a target matrix
verify      compare a decomposition with a reference via projectors and phases
random      write a seeded random unitary as matrix JSON
fig2        run the N = 2, 3, 4 QFT schedules and write their deviation traces

Exit codes: 0 success, 1 input error, 2 numerical check failed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import sys
import warnings
from pathlib import Path

from . import __version__
from .cnum import DEFAULT_TOL, matrix_from_json, matrix_to_json, max_norm, random_unitary
from .decomp import decompose, decomposition_from_json, reconstruct
from .dynamics import SimConfig, peak_ancilla_population, simulate_schedule
from .errors import ConsistencyError, InvalidInputError, NumericalError
from .gates import has_fixture, qft_fixture, qft_matrix
from .pulse import PulseSchedule, schedule_from_decomposition

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2
RESIDUAL_LIMIT = 1e-9


class CliInputError(Exception):
    pass


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise CliInputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise CliInputError(f"{path} is not valid JSON: {exc}") from exc


def _write_json(path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2) + "\n")


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_manifest(output, args, inputs=(), outputs=(), config=None) -> None:
    manifest = {
        "tool": "qhsynth",
        "version": __version__,
        "command": args.command,
        "argv": list(args.argv),
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": [str(p) for p in outputs],
        "tolerance": getattr(args, "tol", None),
        "seed": getattr(args, "seed", None),
        "config": config or {},
    }
    _write_json(str(output) + ".manifest.json", manifest)


def _load_matrix(path):
    try:
        return matrix_from_json(_read_json(path))
    except InvalidInputError as exc:
        raise CliInputError(f"{path}: {exc}") from exc


def cmd_decompose(args) -> int:
    u = _load_matrix(args.matrix)
    try:
        d = decompose(u, args.mode, args.tol)
    except InvalidInputError as exc:
        raise CliInputError(str(exc)) from exc
    residual = max_norm(reconstruct(d) - u)
    _write_json(args.out, d.to_json())
    _write_manifest(args.out, args, inputs=[args.matrix], outputs=[args.out])
    print(f"{args.mode} decomposition: {len(d.nontrivial_factors())} nontrivial factor(s)")
    print(f"reconstruction residual (max-norm): {residual:.3e}")
    limit = max(RESIDUAL_LIMIT, args.tol)
    if residual >= limit:
        print(f"residual exceeds {limit:.1e}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_qft(args) -> int:
    if args.n < 1:
        raise CliInputError("QFT dimension must be >= 1")
    out = Path(args.out)
    f = qft_matrix(args.n)
    d = decompose(f, args.mode)
    stem = f"qft{args.n}_{args.mode}"
    paths = {
        "matrix": out / f"qft{args.n}_matrix.json",
        "decomposition": out / f"{stem}.json",
    }
    _write_json(paths["matrix"], matrix_to_json(f))
    _write_json(paths["decomposition"], d.to_json())
    report = {
        "n": args.n,
        "mode": args.mode,
        "computed_residual": max_norm(reconstruct(d) - f),
        "computed_nontrivial_factors": len(d.nontrivial_factors()),
    }
    status = EXIT_OK
    if has_fixture(args.n):
        fx = qft_fixture(args.n)
        fd = fx.standard if args.mode == "standard" else fx.generalized
        paths["fixture"] = out / f"{stem}_fixture.json"
        _write_json(paths["fixture"], fd.to_json())
        fixture_residual = max_norm(reconstruct(fd) - f)
        product_gap = max_norm(reconstruct(fd) - reconstruct(d))
        report["fixture"] = {
            "residual": fixture_residual,
            "nontrivial_factors": len(fd.nontrivial_factors()),
            "product_difference": product_gap,
            "products_equal": product_gap < 1e-10,
        }
        if not report["fixture"]["products_equal"]:
            status = EXIT_NUMERIC
    if report["computed_residual"] >= RESIDUAL_LIMIT:
        status = EXIT_NUMERIC
    paths["report"] = out / f"{stem}_report.json"
    _write_json(paths["report"], report)
    _write_manifest(paths["report"], args, outputs=list(paths.values()))
    for key, p in paths.items():
        print(f"{key}: {p}")
    print(f"computed residual: {report['computed_residual']:.3e}")
    if "fixture" in report:
        fx_rep = report["fixture"]
        print(
            f"fixture: {fx_rep['nontrivial_factors']} nontrivial factor(s), "
            f"product difference {fx_rep['product_difference']:.3e}"
        )
    return status


def cmd_pulses(args) -> int:
    try:
        d = decomposition_from_json(_read_json(args.decomposition))
    except InvalidInputError as exc:
        raise CliInputError(f"{args.decomposition}: {exc}") from exc
    if args.T <= 0:
        raise CliInputError("--T must be positive")
    try:
        result = schedule_from_decomposition(d, T=args.T, k=args.k, l=args.l, branch=args.branch)
    except NumericalError as exc:
        print(f"pulse synthesis failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for note in result.notices:
        print(f"notice: {note}")
    for i, s in enumerate(result.schedule.steps, start=1):
        chi = ", ".join(f"{c:.6g}" for c in s.chi)
        beta = ", ".join(f"{b:.6g}" for b in s.beta)
        print(
            f"step {i} (factor {s.factor}) tau={s.tau:g}: chi=[{chi}] beta=[{beta}] "
            f"delta0={s.delta0:.12g}"
        )
    if result.schedule.abstract_gate is not None:
        print(f"abstract phase gate: {list(result.schedule.abstract_gate.phases)}")
    _write_json(args.out, result.schedule.to_json())
    _write_manifest(
        args.out,
        args,
        inputs=[args.decomposition],
        outputs=[args.out],
        config={"T": args.T, "k": args.k, "l": args.l, "branch": args.branch},
    )
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        schedule = PulseSchedule.from_json(_read_json(args.schedule))
    except InvalidInputError as exc:
        raise CliInputError(f"{args.schedule}: {exc}") from exc
    target = _load_matrix(args.target)
    try:
        cfg = SimConfig(
            window_half_width=args.window,
            dt=args.dt,
            renormalize_area=not args.no_renormalize,
            record_stride=args.stride,
        )
    except InvalidInputError as exc:
        raise CliInputError(str(exc)) from exc
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            trace = simulate_schedule(schedule, target, cfg)
        except InvalidInputError as exc:
            raise CliInputError(str(exc)) from exc
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    trace.write_csv(args.trace_out)
    _write_manifest(
        args.trace_out,
        args,
        inputs=[args.schedule, args.target],
        outputs=[args.trace_out],
        config={
            "window_half_width": cfg.window_half_width,
            "dt": cfg.dt,
            "renormalize_area": cfg.renormalize_area,
            "record_stride": cfg.record_stride,
        },
    )
    print(f"final deviation: {trace.final_deviation:.6e}")
    print(f"peak ancilla population: {peak_ancilla_population(trace):.6e}")
    return EXIT_OK if trace.final_deviation < args.tol else EXIT_NUMERIC


def _phase_gap(a: float, b: float) -> float:
    return abs(math.remainder(a - b, 2.0 * math.pi))


def compare_decompositions(d, ref, phases_only: bool = False) -> list:
    """Rows (label, difference) comparing factors up to the global phase of v."""
    if d.kind != ref.kind or d.dim != ref.dim:
        raise InvalidInputError(
            f"cannot compare {d.kind} U({d.dim}) with reference {ref.kind} U({ref.dim})"
        )
    if len(d.factors) != len(ref.factors):
        raise InvalidInputError("factor counts differ")
    rows = []
    for i, (f, g) in enumerate(zip(d.factors, ref.factors), start=1):
        rows.append((f"phi_{i}", _phase_gap(f.phi, g.phi)))
        if not phases_only:
            rows.append((f"projector_{i}", max_norm(f.projector() - g.projector())))
    if d.gate is not None:
        for i, (a, b) in enumerate(zip(d.gate.phases, ref.gate.phases), start=1):
            rows.append((f"gate_phase_{i}", _phase_gap(a, b)))
    return rows


def cmd_verify(args) -> int:
    try:
        d = decomposition_from_json(_read_json(args.decomposition))
        ref = decomposition_from_json(_read_json(args.reference))
        rows = compare_decompositions(d, ref, args.phases_only)
    except InvalidInputError as exc:
        raise CliInputError(str(exc)) from exc
    worst = 0.0
    for label, diff in rows:
        mark = "ok" if diff <= args.tol else "MISMATCH"
        print(f"{label}: {diff:.3e} {mark}")
        worst = max(worst, diff)
    print(f"largest difference: {worst:.3e} (tol {args.tol:g})")
    return EXIT_OK if worst <= args.tol else EXIT_NUMERIC


def cmd_random(args) -> int:
    if args.n < 1:
        raise CliInputError("n must be >= 1")
    _write_json(args.out, matrix_to_json(random_unitary(args.n, args.seed)))
    _write_manifest(args.out, args, outputs=[args.out])
    return EXIT_OK


def cmd_fig2(args) -> int:
    """Deviation traces of the generalized QFT schedules for N = 2, 3, 4."""
    out = Path(args.out)
    cfg = SimConfig(window_half_width=args.window, dt=args.dt, record_stride=args.stride)
    status = EXIT_OK
    written = []
    for n in (2, 3, 4):
        schedule = schedule_from_decomposition(qft_fixture(n).generalized, T=1.0).schedule
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            trace = simulate_schedule(schedule, qft_matrix(n), cfg)
        path = out / f"fig2_qft{n}.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        trace.write_csv(path)
        written.append(path)
        print(
            f"N={n}: final deviation {trace.final_deviation:.3e}, "
            f"peak ancilla population {peak_ancilla_population(trace):.3f} -> {path}"
        )
        if trace.final_deviation >= args.tol:
            status = EXIT_NUMERIC
    _write_manifest(out / "fig2", args, outputs=written)
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qhsynth",
        description="Householder-reflection synthesis of unitary gates on N-pod systems",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="exit codes: 0 ok, 1 input error, 2 numerical check failed",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="enable INFO logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="factor a unitary matrix")
    p.add_argument("matrix", help="matrix JSON file")
    p.add_argument("--mode", choices=["standard", "generalized"], default="standard")
    p.add_argument("--out", required=True, help="decomposition JSON to write")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="unitarity tolerance")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("qft", help="QFT matrix, decomposition and fixture report")
    p.add_argument("n", type=int)
    p.add_argument("--mode", choices=["standard", "generalized"], default="generalized")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_qft)

    p = sub.add_parser("pulses", help="map a decomposition to a pulse schedule")
    p.add_argument("decomposition", help="decomposition JSON file")
    p.add_argument("--T", type=float, default=1.0, help="sech width")
    p.add_argument("--k", type=int, default=0, help="resonant area index: A = 2(2k+1) pi")
    p.add_argument("--l", type=int, default=1, help="Rosen-Zener index: chi T = 2l")
    p.add_argument("--branch", choices=["largest", "smallest"], default="largest")
    p.add_argument("--out", required=True, help="schedule JSON to write")
    p.set_defaults(func=cmd_pulses)

    p = sub.add_parser("simulate", help="integrate a schedule against a target")
    p.add_argument("schedule", help="schedule JSON file")
    p.add_argument("target", help="target matrix JSON file")
    p.add_argument("--trace-out", required=True, help="CSV trace to write")
    p.add_argument("--tol", type=float, default=1e-2, help="final deviation bound")
    p.add_argument("--dt", type=float, default=SimConfig.dt, help="RK4 step in units of T")
    p.add_argument("--window", type=float, default=SimConfig.window_half_width,
                   help="integration half-width in units of T")
    p.add_argument("--stride", type=int, default=SimConfig.record_stride, help="record every n steps")
    p.add_argument("--no-renormalize", action="store_true",
                   help="do not rescale resonant couplings to the truncated-window area")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="compare a decomposition with a reference")
    p.add_argument("decomposition", help="decomposition JSON file")
    p.add_argument("reference", help="reference decomposition JSON file")
    p.add_argument("--tol", type=float, default=2e-3, help="bound on each difference")
    p.add_argument("--phases-only", action="store_true", help="skip the projector comparison")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("random", help="write a seeded random unitary")
    p.add_argument("n", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_random)

    p = sub.add_parser("fig2", help="deviation traces of the QFT schedules, N = 2, 3, 4")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--tol", type=float, default=1e-2)
    p.add_argument("--dt", type=float, default=SimConfig.dt)
    p.add_argument("--window", type=float, default=SimConfig.window_half_width)
    p.add_argument("--stride", type=int, default=SimConfig.record_stride)
    p.set_defaults(func=cmd_fig2)
    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    args.argv = argv
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except CliInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConsistencyError as exc:
        print(f"internal consistency check failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
