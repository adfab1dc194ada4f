"""Command-line interface: ``sympq <subcommand> [options]``.

Exit status is 0 when every check passes, 1 when a check fails and 2 for
usage or configuration errors.  ``SYMPQ_SEED`` supplies the default seed and
``SYMPQ_THREADS`` is accepted for compatibility; all work runs serially so
that reports are bit-identical for a fixed seed.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from fractions import Fraction
from typing import Callable

from . import __version__
from .actions import ActionError, BUILTIN_NAMES, builtin
from .dsl import ParseError, format_form, parse_form

log = logging.getLogger("sympq")

SUITES = ("poincare", "stokes", "restrict", "induction", "appendix", "cohomology", "all")


class UsageError(ValueError):
    pass


# -- helpers ------------------------------------------------------------------------------------


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    try:
        return int(os.environ.get("SYMPQ_SEED", "0"))
    except ValueError as exc:
        raise UsageError("SYMPQ_SEED must be an integer") from exc


def _threads() -> int:
    raw = os.environ.get("SYMPQ_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise UsageError("SYMPQ_THREADS must be a positive integer") from exc
    if n < 1:
        raise UsageError("SYMPQ_THREADS must be a positive integer")
    return n


def _action(name: str):
    try:
        return builtin(name)
    except ActionError as exc:
        raise UsageError(str(exc)) from exc


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item") and callable(x.item):  # numpy scalars
        return x.item()
    return x


def _emit(args, report: dict, text: str) -> None:
    report = _jsonable(report)
    out = json.dumps(report, indent=2, sort_keys=True) if args.json else text
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out + "\n")
    print(out)


def _status(passed: bool) -> int:
    return 0 if passed else 1


def _parse_input(args, action=None):
    text = args.form
    if text == "-":
        text = sys.stdin.read()
    return parse_form(text, action=action)


# -- subcommands ------------------------------------------------------------------------------


def cmd_parse(args) -> int:
    text = sys.stdin.read() if args.form == "-" else args.form
    form = parse_form(text, n=args.n, angles=args.angles)
    canonical = format_form(form, args.angles)
    again = parse_form(canonical, n=(form.dim - args.angles) // 2, angles=args.angles)
    report = {"input": text, "canonical": canonical, "degree": form.degree, "dim": form.dim,
              "round_trip": again == form, "form": form.to_json()}
    _emit(args, report, f"{canonical}\n  degree {form.degree} on R^{form.dim}; round trip {'ok' if again == form else 'FAILED'}")
    return _status(again == form)


def _membership(args, ideal: bool) -> int:
    from .quotient import MembershipError, in_ideal, is_phi_basic

    action = _action(args.example)
    form = _parse_input(args, action)
    if form.dim != action.dim:
        raise UsageError(f"form lives on R^{form.dim}, the example on R^{action.dim}")
    seed = _seed(args)
    try:
        cert = in_ideal(action, form, seed) if ideal else is_phi_basic(action, form, seed)
    except MembershipError as exc:
        raise UsageError(str(exc)) from exc
    what = "in the ideal I_Phi" if ideal else "Phi-basic"
    verdict = bool(cert)
    text = f"{format_form(form)} is {'' if verdict else 'NOT '}{what} on {action.name} ({cert.mode}; {cert.sample_count} samples)"
    _emit(args, {"example": action.name, "form": format_form(form), "check": "ideal" if ideal else "basic",
                 "certificate": cert.to_json(), "seed": seed}, text)
    # a negative verdict is an answer, not a failure
    return 0


def cmd_check_basic(args) -> int:
    return _membership(args, False)


def cmd_check_ideal(args) -> int:
    return _membership(args, True)


def cmd_cohomology(args) -> int:
    from .quotient import cohomology

    action = _action(args.example)
    rep = cohomology(action, args.max_degree, _seed(args))
    data = {"example": action.name, **rep.to_json()}
    text = f"{action.name}: {rep.label} at D={rep.truncation}: betti {rep.betti}; D+2: {rep.betti_next}; stable={rep.stable}"
    _emit(args, data, text)
    return _status(rep.stable)


def _run_poincare(example: str, D: int, seed: int) -> dict:
    from .homotopy import poincare_verify

    action = _action(example)
    rep = poincare_verify(action, D, seed)
    expected = [1] + [0] * (len(rep.betti) - 1)
    data = {"example": action.name, **rep.to_json(), "betti_expected": expected}
    data["passed"] = rep.passed and rep.betti == expected
    return data


def cmd_poincare(args) -> int:
    data = _run_poincare(args.example, args.max_degree, _seed(args))
    text = (f"{data['example']}: D={data['truncation']} closed classes {data['closed_counts']}, "
            f"betti {data['betti']}, stable {data['stable_under_D_plus_2']}, failures {data['failure_count']} -> "
            f"{'PASS' if data['passed'] else 'FAIL'}")
    _emit(args, data, text)
    return _status(data["passed"])


def _run_stokes(example: str, count: int, samples: int, seed: int, form_text: str | None = None,
                k: float = 2.0) -> dict:
    from .integration import random_stokes_forms, stokes_check

    action = _action(example)
    forms = [parse_form(form_text, action=action)] if form_text else random_stokes_forms(action, count, seed)
    rows = []
    for i, beta in enumerate(forms):
        res = stokes_check(action, beta, k=k, mc_samples=samples, seed=seed + i)
        rows.append({"form": format_form(beta), **res.to_json()})
    quad_max = max(r["ratio"] for r in rows)
    mc_max = max((r["mc_ratio"] for r in rows if r["mc_ratio"] is not None), default=None)
    passed = quad_max < 1e-6 and (mc_max is None or mc_max < 1e-3)
    return {"example": action.name, "forms": len(rows), "mc_samples": samples, "seed": seed,
            "max_quadrature_ratio": quad_max, "max_mc_ratio": mc_max,
            "thresholds": {"quadrature": 1e-6, "monte_carlo": 1e-3}, "passed": passed, "results": rows}


def cmd_stokes(args) -> int:
    data = _run_stokes(args.example, args.forms, args.samples, _seed(args), args.form)
    text = (f"{data['example']}: {data['forms']} forms, max |∫dγ|/∫|dγ|μ quadrature {data['max_quadrature_ratio']:.3e}"
            + (f", Monte Carlo ({data['mc_samples']}) {data['max_mc_ratio']:.3e}" if data["max_mc_ratio"] is not None else "")
            + f" -> {'PASS' if data['passed'] else 'FAIL'}")
    _emit(args, data, text)
    return _status(data["passed"])


def cmd_volume(args) -> int:
    from .integration import volume_finiteness

    rep = volume_finiteness(_action(args.example), args.k)
    data = {"example": args.example, **rep.to_json()}
    data["passed"] = rep.monotone and rep.relative_increments[-1] < 1e-3 if rep.relative_increments else rep.monotone
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(rep.to_csv())
    text = (f"{args.example}: vol(X_prin minus S_k), k=1..{args.k}: monotone {rep.monotone}, "
            f"last relative increment {rep.relative_increments[-1]:.3e}, total {rep.total:.12f}")
    _emit(args, data, text)
    return _status(data["passed"])


def cmd_cone_scaling(args) -> int:
    from .integration import cone_scaling_experiment

    rep = cone_scaling_experiment(_action(args.example), K=args.k, smooth=not args.sharp)
    passed = abs(rep.slope - rep.expected) <= 0.05
    data = {"example": args.example, **rep.to_json(), "tolerance": 0.05, "passed": passed}
    text = f"{args.example}: log-log slope {rep.slope:.4f} (expected {rep.expected:.1f} ± 0.05) -> {'PASS' if passed else 'FAIL'}"
    _emit(args, data, text)
    return _status(passed)


def cmd_pairing(args) -> int:
    from .integration import symplectic_class_pairing

    rep = symplectic_class_pairing(_action(args.example), args.power, args.samples, _seed(args))
    passed = rep.positive and (rep.relative_dh_gap is None or rep.relative_dh_gap < 5e-3)
    data = {"example": args.example, **rep.to_json(), "passed": passed}
    text = (f"{args.example}: ∫ω = {rep.value:.12f} ± {rep.error:.1e}, Duistermaat-Heckman {rep.dh}, "
            f"relative gap {rep.relative_dh_gap:.2e} -> {'PASS' if passed else 'FAIL'}")
    _emit(args, data, text)
    return _status(passed)


_INDUCTION_CONFIGS = ("cyclic", "circle", "point")


def _induction_model(config: str):
    from .induction import BundleSpec, circle_bundle, cyclic_bundle, induced_space, point_fibre

    if config == "cyclic":
        return induced_space(cyclic_bundle(3))
    if config == "circle":
        return induced_space(circle_bundle((1, -1)))
    if config == "point":
        return induced_space(BundleSpec(1, "cyclic", (1,), point_fibre(), (0,), 3))
    raise UsageError(f"unknown induction configuration {config!r}; choose from {', '.join(_INDUCTION_CONFIGS)}")


def _run_induction(config: str, D: int, seed: int) -> dict:
    from .induction import verify_reduction_in_stages

    model = _induction_model(config)
    rep = verify_reduction_in_stages(model, D, seed)
    return {"configuration": config, "model": model.to_json(), **rep.to_json()}


def cmd_induction(args) -> int:
    data = _run_induction(args.config, args.max_degree, _seed(args))
    text = (f"{args.config}: dim Omega(X) by degree {data['dims_X_by_degree']}, dim Omega(Y) {data['dims_Y_by_degree']}; "
            f"bijective {data['bijective']}, chain map {data['chain_map']} ({data['label']})")
    _emit(args, data, text)
    return _status(data["passed"])


def cmd_appendix(args) -> int:
    from .induction import appendix_report

    data = appendix_report(args.samples, _seed(args))
    lines = []
    for label, b in data["bundles"].items():
        items = ", ".join(f"{r['name']}: {'ok' if r['passed'] else 'FAIL'}" for r in b["extension_lemma"])
        lines.append(f"{label}: {items}; e(f*(dth1)) != dth1: {b['negative_test']['differs']}")
    for name, r in data["functoriality"].items():
        lines.append(f"functoriality ({name}): {'ok' if r['passed'] else 'FAIL'}")
    lines.append(f"connection independence: {data['connection_independence']['independent']}")
    _emit(args, data, "\n".join(lines))
    return _status(data["passed"])


def _run_restrict(seed: int) -> dict:
    from .actions import all_builtins
    from .quotient import verify_restriction_lemma

    reports = [verify_restriction_lemma(a, seed=seed) for a in all_builtins()]
    return {"examples": [r.to_json() for r in reports], "passed": all(r.passed for r in reports)}


def _run_cohomology(seed: int, D: int) -> dict:
    from .quotient import cohomology

    rows = []
    for name in BUILTIN_NAMES:
        rep = cohomology(builtin(name), D, seed)
        rows.append({"example": name, **rep.to_json()})
    return {"examples": rows, "passed": all(r["stable"] for r in rows)}


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    return cfg


def run_suite(name: str, config: dict | None = None, seed: int = 0) -> dict:
    """Run one acceptance suite (or ``all``) and return its report; ``report['passed']`` is the verdict."""
    config = dict(config or {})
    seed = int(config.get("seed", seed))
    runners: dict[str, Callable[[], dict]] = {
        "poincare": lambda: {
            "runs": [_run_poincare(ex, int(config.get("D", 8)), seed) for ex in config.get("examples", ["cone11", "zk-cone"])],
        },
        "stokes": lambda: {
            "runs": [_run_stokes(ex, int(config.get("forms", 20)), int(config.get("samples", 1 << 20)), seed)
                     for ex in config.get("examples", ["teardrop", "cp1"])],
        },
        "restrict": lambda: _run_restrict(seed),
        "induction": lambda: {"runs": [_run_induction(c, int(config.get("D", 6)), seed)
                                       for c in config.get("configurations", ["cyclic", "point"])]},
        "appendix": lambda: {"runs": [__import__("sympq.induction", fromlist=["appendix_report"])
                                      .appendix_report(int(config.get("cases", 200)), seed)]},
        "cohomology": lambda: _run_cohomology(seed, int(config.get("D", 6))),
    }
    if name not in SUITES:
        raise UsageError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    names = [s for s in SUITES if s != "all"] if name == "all" else [name]
    out = {"suite": name, "seed": seed, "results": {}}
    for s in names:
        t0 = time.perf_counter()
        rep = runners[s]()
        if "runs" in rep:
            rep["passed"] = all(r["passed"] for r in rep["runs"])
        out["results"][s] = rep
        log.info("suite %s finished in %.1fs", s, time.perf_counter() - t0)
    out["passed"] = all(r["passed"] for r in out["results"].values())
    return out


def cmd_suite(args) -> int:
    cfg = _load_config(args.config)
    data = run_suite(args.name, cfg, _seed(args))
    text = "\n".join(f"{s}: {'PASS' if r['passed'] else 'FAIL'}" for s, r in data["results"].items())
    _emit(args, data, text)
    return _status(data["passed"])


# -- argument parsing ------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (default: $SYMPQ_SEED or 0)")
    common.add_argument("--json", action="store_true", help="print a machine-readable report")
    common.add_argument("--out", metavar="FILE", help="also write the report to FILE")
    common.add_argument("-v", "--verbose", action="store_true")

    def example(p, default):
        p.add_argument("--example", default=default, help=f"built-in example ({', '.join(BUILTIN_NAMES)}, zk-cone:K)")

    def degree(p, default):
        p.add_argument("--max-degree", "-D", type=int, default=default, help="truncation degree D")

    parser = argparse.ArgumentParser(prog="sympq", description="De Rham complexes of singular symplectic quotients.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", parents=[common], help="parse a form and print it canonically")
    p.add_argument("form", help="form expression, or - for stdin")
    p.add_argument("--n", type=int, default=None, help="number of complex planes (default: inferred)")
    p.add_argument("--angles", type=int, default=0, help="number of leading angle coordinates th1, th2, ...")
    p.set_defaults(func=cmd_parse)

    for name, func, helptext in (("check-basic", cmd_check_basic, "test whether a form is Phi-basic"),
                                 ("check-ideal", cmd_check_ideal, "test whether an invariant form lies in I_Phi")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("form")
        example(p, "cone11")
        p.set_defaults(func=func)

    p = sub.add_parser("cohomology", parents=[common], help="truncated Betti numbers of Omega(X)")
    example(p, "cone11")
    degree(p, 6)
    p.set_defaults(func=cmd_cohomology)

    p = sub.add_parser("poincare", parents=[common], help="verify the Poincaré lemma with the radial homotopy")
    example(p, "cone11")
    degree(p, 8)
    p.set_defaults(func=cmd_poincare)

    p = sub.add_parser("stokes", parents=[common], help="Stokes residuals for compactly supported forms")
    example(p, "teardrop")
    p.add_argument("--samples", type=int, default=1 << 16, help="Monte Carlo samples (0 disables)")
    p.add_argument("--forms", type=int, default=20, help="number of random forms")
    p.add_argument("--form", default=None, help="use this 1-form instead of random ones")
    p.set_defaults(func=cmd_stokes)

    p = sub.add_parser("volume", parents=[common], help="volumes of X_prin minus shrinking neighbourhoods")
    example(p, "teardrop")
    p.add_argument("--k", type=int, default=32, help="largest k")
    p.add_argument("--csv", metavar="FILE", help="write the table as CSV")
    p.set_defaults(func=cmd_volume)

    p = sub.add_parser("cone-scaling", parents=[common], help="log-log slope of conical neighbourhood volumes")
    example(p, "teardrop")
    p.add_argument("--k", type=int, default=16, help="number of k values")
    p.add_argument("--sharp", action="store_true", help="use sharp balls instead of the smooth cutoff")
    p.set_defaults(func=cmd_cone_scaling)

    p = sub.add_parser("pairing", parents=[common], help="integrate omega over X against the DH oracle")
    example(p, "cp1")
    p.add_argument("--power", type=int, default=1, help="k in <omega^k, omega^(n-k)>")
    p.add_argument("--samples", type=int, default=1 << 16, help="Monte Carlo samples")
    p.set_defaults(func=cmd_pairing)

    p = sub.add_parser("induction", parents=[common], help="reduction in stages for an induced space")
    p.add_argument("--config", choices=_INDUCTION_CONFIGS, default="cyclic")
    degree(p, 6)
    p.set_defaults(func=cmd_induction)

    p = sub.add_parser("appendix", parents=[common], help="extension and functoriality lemmas for bundles")
    p.add_argument("--samples", type=int, default=200, help="cases per batch")
    p.set_defaults(func=cmd_appendix)

    p = sub.add_parser("suite", parents=[common], help="run an acceptance suite")
    p.add_argument("name", choices=SUITES)
    p.add_argument("--config", help="JSON file with suite parameters")
    p.set_defaults(func=cmd_suite)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        _threads()
        return args.func(args)
    except ParseError as exc:
        print(f"sympq: parse error: {exc}", file=sys.stderr)
        return 2
    except UsageError as exc:
        print(f"sympq: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"sympq: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
