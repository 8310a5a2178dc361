"""Command-line front end.

Exit codes: 0 success, 1 usage or I/O error, 2 verification failure.

A ``--config FILE`` holds ``key = value`` lines whose keys are long flag
names without the leading dashes (``seed = 7``, ``tolerance-certainty =
1e-9``, ``no-c3 = true``). Flags given on the command line win.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import _backend
from .dynamics import (
    DensityOperator, Evolve, Reduce, ReductionEvent, evolve, pose_question, projector_on, run_trajectory,
    sample_reduction_sequence, subsystem_state,
)
from .hardy import (
    SETTING_PAIRS, HardyConfiguration, NoHardyConfigurationError, born_joint,
    construct_from_state, optimize_hardy, schmidt_state, verify_predictions,
)
from .locality import (
    CONSTRAINTS, check_assertion_A, check_no_signaling, check_order_invariance,
    enumerate_causal_models, enumerate_lhv, filter_strategies, lhv_hardy_bound, lhv_to_causal_model,
)
from .operators import SubsystemLayout
from .report import SCHEMA_VERSION, dumps, rows_to_csv, to_csv, to_text

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2
#: Below this many samples per setting pair the 3-sigma check is skipped.
MIN_SAMPLES_FOR_BOUND = 100
HARDY_LAYOUT = SubsystemLayout.of(L=2, R=2)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive(kind):
    def conv(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a valid {kind.__name__}: {text!r}") from None
        if not v > 0 or (isinstance(v, float) and not math.isfinite(v)):
            raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
        return v
    return conv


def _seed(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value file mirroring the flags")
    common.add_argument("--seed", type=_seed, default=42)
    common.add_argument("--samples", type=_positive(int), default=100000,
                        help="trajectories per setting pair (sample)")
    common.add_argument("--tolerance-certainty", type=_positive(float), default=1e-9)
    common.add_argument("--tolerance-algebra", type=_positive(float), default=1e-12)
    common.add_argument("--output", type=Path, help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")

    state = _Parser(add_help=False)
    state.add_argument("--state", choices=("optimal", "maximally-entangled", "product"), default="optimal")
    state.add_argument("--theta", type=float, help="Schmidt angle of cos t|00> + sin t|11>")
    state.add_argument("--load", type=Path, help="JSON Hardy configuration to load")

    opt = _Parser(add_help=False)
    opt.add_argument("--resolution", type=_positive(int), default=256)
    opt.add_argument("--iterations", type=_positive(int), default=100)

    cons = _Parser(add_help=False)
    for c in CONSTRAINTS:
        cons.add_argument(f"--no-{c.lower()}", action="store_true", help=f"drop constraint {c}")

    p = _Parser(prog="vnhardy", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("hardy-verify", parents=[common, state, opt], help="check the four predictions")
    sub.add_parser("hardy-optimize", parents=[common, opt], help="maximise the paradox probability")
    sub.add_parser("argument", parents=[common, state, opt, cons], help="full nonlocality argument")
    sub.add_parser("lhv", parents=[common, cons], help="hidden-variable enumeration")
    sub.add_parser("sample", parents=[common, state, opt], help="Monte Carlo reduction sampling")
    sub.add_parser("dynamics-demo", parents=[common], help="small reduction-dynamics trajectory")
    sub.add_parser("all", parents=[common, state, opt, cons], help="run every check")
    return p


def read_config(path: Path) -> list[tuple[str, str]]:
    """Parse a ``key = value`` file; ``#`` starts a comment."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    items = []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected 'key = value'")
        key, value = (x.strip() for x in line.split("=", 1))
        if not key or key == "config":
            raise UsageError(f"{path}:{n}: invalid key {key!r}")
        items.append((key, value))
    return items


def _config_tokens(items: list[tuple[str, str]]) -> list[str]:
    tokens = []
    for key, value in items:
        if key.startswith("no-"):
            v = value.lower()
            if v not in ("true", "false", "1", "0", "yes", "no"):
                raise UsageError(f"config key {key!r} expects true/false, got {value!r}")
            if v in ("true", "1", "yes"):
                tokens.append(f"--{key}")
        else:
            tokens.extend([f"--{key}", value])
    return tokens


def parse_args(argv: list[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        # Config entries go first so explicit flags override them.
        argv = [argv[0], *_config_tokens(read_config(args.config)), *argv[1:]]
        args = parser.parse_args(argv)
    return args


# --- configuration acquisition ----------------------------------------------


def load_configuration(path: Path) -> HardyConfiguration:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot load configuration {path}: {exc}") from None
    if isinstance(data, dict) and "results" in data:
        data = data["results"]
    if isinstance(data, dict) and "config" in data:
        data = data["config"]
    try:
        return HardyConfiguration.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed configuration {path}: {exc}") from None


def acquire_configuration(args) -> HardyConfiguration:
    """Loaded, explicit-angle, or named-state configuration. May raise NoHardyConfigurationError."""
    if getattr(args, "load", None) is not None:
        return load_configuration(args.load)
    if getattr(args, "theta", None) is not None:
        return construct_from_state(schmidt_state(args.theta))
    state = getattr(args, "state", "optimal")
    if state == "maximally-entangled":
        return construct_from_state(schmidt_state(math.pi / 4))
    if state == "product":
        return construct_from_state(schmidt_state(0.0))
    return optimize_hardy(args.resolution, args.iterations).config


def _plus_projectors(cfg: HardyConfiguration, pair):
    ls, rs = pair
    return (projector_on(cfg.projector(ls), HARDY_LAYOUT, "L"),
            projector_on(cfg.projector(rs), HARDY_LAYOUT, "R"))


def _tables(d: dict) -> dict:
    return {f"{a},{b}": np.asarray(t).tolist() for (a, b), t in d.items()}


# --- commands ---------------------------------------------------------------


def cmd_hardy_verify(args) -> tuple[int, dict]:
    try:
        cfg = acquire_configuration(args)
    except NoHardyConfigurationError as exc:
        return EXIT_FAIL, {"diagnostic": f"no Hardy configuration: {exc}"}
    pred = verify_predictions(cfg, tol_certainty=args.tolerance_certainty)
    ns = check_no_signaling(cfg, tol=args.tolerance_algebra)
    rho = DensityOperator.pure(cfg.psi, HARDY_LAYOUT)
    order = {}
    for pair in SETTING_PAIRS:
        rep = check_order_invariance(rho, *_plus_projectors(cfg, pair), tol=args.tolerance_algebra)
        born_dev = float(np.max(np.abs(rep.direct - born_joint(cfg, pair))))
        order[f"{pair[0]},{pair[1]}"] = {"max_deviation": max(rep.max_deviation, born_dev),
                                         "passed": rep.passed and born_dev <= args.tolerance_algebra}
    order_ok = all(v["passed"] for v in order.values())
    results = {
        "config": cfg.to_dict(),
        "predictions": pred.to_dict(),
        "born": _tables({p: born_joint(cfg, p) for p in SETTING_PAIRS}),
        "no_signaling": ns.to_dict(),
        "order_invariance": order,
        "passed": bool(pred.passed and ns.passed and order_ok),
    }
    return (EXIT_OK if results["passed"] else EXIT_FAIL), results


def cmd_hardy_optimize(args) -> tuple[int, dict]:
    opt = optimize_hardy(args.resolution, args.iterations)
    results = opt.to_dict()
    results["resolution"] = args.resolution
    results["config"] = opt.config.to_dict()
    results["predictions"] = verify_predictions(opt.config, args.tolerance_certainty).to_dict()
    results["passed"] = bool(results["deviation"] <= 1e-6 and results["predictions"]["passed"])
    return (EXIT_OK if results["passed"] else EXIT_FAIL), results


def _enabled_constraints(args) -> list[str]:
    return [c for c in CONSTRAINTS if not getattr(args, f"no_{c.lower()}", False)]


def _lhv_results(constraints) -> dict:
    strategies = enumerate_lhv()
    survivors = filter_strategies(strategies, constraints)
    ladder = all(s.b1 == "-" for s in survivors if s.a1 == "-")
    return {
        "strategies": len(strategies),
        "constraints": list(constraints),
        "survivor_count": len(survivors),
        "survivors": [str(s) for s in survivors],
        "ladder_a1minus_implies_b1minus": ladder,
        "bound": lhv_hardy_bound(survivors),
    }


def cmd_lhv(args) -> tuple[int, dict]:
    res = _lhv_results(_enabled_constraints(args))
    res["passed"] = res["bound"] == 0.0
    return (EXIT_OK if res["passed"] else EXIT_FAIL), res


def cmd_argument(args) -> tuple[int, dict]:
    constraints = _enabled_constraints(args)
    preds = {int(c[1]) for c in constraints}
    lhv = _lhv_results(constraints)
    models = enumerate_causal_models()
    a_r2 = check_assertion_A(models, "R2", preds & {1, 2})
    a_r1 = check_assertion_A(models, "R1", preds & {3})
    try:
        q = verify_predictions(acquire_configuration(args), args.tolerance_certainty).q
    except NoHardyConfigurationError as exc:
        q, diag = 0.0, str(exc)
    else:
        diag = None
    survivors = filter_strategies(enumerate_lhv(), constraints)
    bridge = all(check_assertion_A([lhv_to_causal_model(s)], "R2", {1, 2}).n_consistent == 1
                 and check_assertion_A([lhv_to_causal_model(s)], "R2", {1, 2}).holds_universally
                 for s in survivors)
    checks = {
        "a_r2_holds_universally": a_r2.holds_universally,
        "a_r1_contradicts_prediction4": a_r1.contradicts_prediction4,
        "lhv_bound_zero_below_quantum_q": lhv["bound"] == 0.0 and q > 0.0,
        "lhv_survivors_embed_as_a_r2_models": bridge,
    }
    results = {
        "lhv": lhv,
        "causal_models": len(models),
        "assertion_R2": a_r2.to_dict(),
        "assertion_R1": a_r1.to_dict(),
        "quantum_q": q,
        "checks": checks,
        "passed": all(checks.values()),
    }
    if diag:
        results["diagnostic"] = diag
    return (EXIT_OK if results["passed"] else EXIT_FAIL), results


def run_sampling(cfg: HardyConfiguration, n: int, seed: int):
    """Sample the L-then-R reduction schedule ``n`` times per setting pair.

    One PCG64 stream seeded with ``seed`` is consumed pair by pair in
    ``SETTING_PAIRS`` order. Returns ``{pair: int8 array (n, 2)}``, 1 = ``+``.
    """
    rng = np.random.default_rng(seed)
    rho = DensityOperator.pure(cfg.psi, HARDY_LAYOUT)
    return {pair: sample_reduction_sequence(rho, _plus_projectors(cfg, pair), n, rng)
            for pair in SETTING_PAIRS}


def sampling_summary(cfg: HardyConfiguration, outcomes: dict, n: int) -> dict:
    check = n >= MIN_SAMPLES_FOR_BOUND
    pairs = {}
    ok = True
    worst = -math.inf
    max_z = 0.0
    for pair, out in outcomes.items():
        born = born_joint(cfg, pair)
        counts = np.zeros((2, 2), dtype=np.int64)
        # index 0 is '+', i.e. answer 1
        np.add.at(counts, (1 - out[:, 0].astype(np.int64), 1 - out[:, 1].astype(np.int64)), 1)
        freq = counts / n
        bound = 3.0 * np.sqrt(born * (1.0 - born) / n)
        excess = np.abs(freq - born) - bound
        within = excess <= 0.0
        worst = max(worst, float(np.max(excess)))
        sigma = bound / 3.0
        nz = sigma > 0
        if nz.any():
            max_z = max(max_z, float(np.max(np.abs(freq - born)[nz] / sigma[nz])))
        ok = ok and bool(np.all(within))
        pairs[f"{pair[0]},{pair[1]}"] = {
            "born": born.tolist(), "counts": counts.tolist(), "empirical": freq.tolist(),
            "bound_3sigma": bound.tolist(), "within": within.tolist(),
        }
    return {
        "samples_per_pair": n,
        "cells": 4 * len(outcomes),
        "bound_check": "performed" if check else "skipped",
        "max_excess_over_bound": worst,
        "max_abs_z": max_z,
        "pairs": pairs,
        "passed": ok if check else True,
    }


def cmd_sample(args, want_rows: bool = False):
    try:
        cfg = acquire_configuration(args)
    except NoHardyConfigurationError as exc:
        return EXIT_FAIL, {"diagnostic": f"no Hardy configuration: {exc}"}, None
    outcomes = run_sampling(cfg, args.samples, args.seed)
    results = sampling_summary(cfg, outcomes, args.samples)
    results["config"] = cfg.to_dict()
    rows = None
    if want_rows:
        sign = np.array(["-", "+"])
        rows = []
        for (ls, rs), out in outcomes.items():
            lo, ro = sign[out[:, 0]], sign[out[:, 1]]
            rows.extend((args.seed, i, ls, rs, lo[i], ro[i]) for i in range(len(out)))
    return (EXIT_OK if results["passed"] else EXIT_FAIL), results, rows


def cmd_dynamics_demo(args) -> tuple[int, dict]:
    """Qubit rotation and decoherence, then an L-then-R reduction of the Hardy state."""
    q1 = SubsystemLayout.of(q=2)
    s0 = DensityOperator(np.diag([1.0, 0.0]), q1)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    rotated = evolve(s0, x, math.pi / 4)
    p0 = projector_on(np.diag([1.0, 0.0]), q1, "q")
    dephased = pose_question(rotated, p0)
    qubit_traj = run_trajectory(s0, [Evolve(x, math.pi / 4), Reduce(p0), Evolve(x, math.pi / 2), Reduce(p0)],
                                seed=args.seed)

    cfg = optimize_hardy().config
    rho = DensityOperator.pure(cfg.psi, HARDY_LAYOUT)
    pl, pr = _plus_projectors(cfg, ("L1", "R1"))
    hardy_traj = run_trajectory(rho, [Reduce(pl), Reduce(pr)], seed=args.seed)

    def events(traj):
        out = []
        for ev in traj.events:
            if isinstance(ev, ReductionEvent):
                out.append({"kind": "reduction", "time": ev.time, "subsystems": list(ev.projector.subsystems),
                            "answer": "yes" if ev.answer else "no", "probability": ev.probability})
            else:
                out.append({"kind": "unitary", "time": ev.time, "dt": ev.dt})
        return out

    replay = max(qubit_traj.replay_error(), hardy_traj.replay_error())
    results = {
        "rotated_state": np.real(rotated.op).tolist(),
        "dephased_state": np.real(dephased.op).tolist(),
        "qubit_trajectory": {"events": events(qubit_traj), "final_trace": qubit_traj.final.trace},
        "hardy_trajectory": {
            "events": events(hardy_traj),
            "final_trace": hardy_traj.final.trace,
            "left_state_before": np.real(subsystem_state(rho, "L").op).tolist(),
            "left_state_after": np.real(subsystem_state(hardy_traj.final.normalized(), "L").op).tolist(),
        },
        "replay_error": replay,
        "passed": replay <= 1e-10,
    }
    return (EXIT_OK if results["passed"] else EXIT_FAIL), results


def cmd_all(args) -> tuple[int, dict]:
    parts = {}
    codes = []
    for name, fn in (("hardy-verify", cmd_hardy_verify), ("hardy-optimize", cmd_hardy_optimize),
                     ("lhv", cmd_lhv), ("argument", cmd_argument), ("dynamics-demo", cmd_dynamics_demo)):
        code, res = fn(args)
        parts[name] = {"exit_code": code, "results": res}
        codes.append(code)
    code, res, _ = cmd_sample(args)
    parts["sample"] = {"exit_code": code, "results": res}
    codes.append(code)
    worst = max(codes)
    return worst, {"commands": parts, "passed": worst == EXIT_OK}


COMMANDS = {
    "hardy-verify": cmd_hardy_verify,
    "hardy-optimize": cmd_hardy_optimize,
    "argument": cmd_argument,
    "lhv": cmd_lhv,
    "dynamics-demo": cmd_dynamics_demo,
    "all": cmd_all,
}


def envelope(command: str, code: int, args, results: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "status": "pass" if code == EXIT_OK else "fail",
        "exit_code": code,
        "seed": args.seed,
        "backend": _backend.name(),
        "tolerances": {"certainty": args.tolerance_certainty, "algebra": args.tolerance_algebra},
        "results": results,
    }


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
        rows = None
        if args.command == "sample":
            code, results, rows = cmd_sample(args, want_rows=args.format == "csv")
        else:
            code, results = COMMANDS[args.command](args)
        report = envelope(args.command, code, args, results)
        if args.format == "json":
            text = dumps(report)
        elif args.format == "text":
            text = to_text(report)
        elif rows is not None:
            text = rows_to_csv(["seed", "trajectory", "l_setting", "r_setting", "l_outcome", "r_outcome"], rows)
        else:
            text = to_csv(report)
        if args.output is not None:
            try:
                args.output.write_text(text, encoding="utf-8")
            except OSError as exc:
                raise UsageError(f"cannot write {args.output}: {exc}") from None
        else:
            sys.stdout.write(text)
        if code != EXIT_OK and "diagnostic" in results:
            print(results["diagnostic"], file=sys.stderr)
        return code
    except UsageError as exc:
        print(f"vnhardy: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
