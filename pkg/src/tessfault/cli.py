"""``tessfault`` command line: build, verify, simulate, classify.

Exit codes: 0 success, 1 verification failed, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

import numpy as np

from . import __version__
from .errors import TessfaultError
from .tessellation import TessellationSpec, audit_tessellation, build_tessellation, format_p, parse_p

log = logging.getLogger("tessfault")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _p(value):
    try:
        return parse_p(value)
    except (TypeError, ValueError) as e:
        raise argparse.ArgumentTypeError(str(e))


def _add_shape(sp, generations=5):
    sp.add_argument("--p", type=_p, required=False, help="face size, or 'inf'")
    sp.add_argument("--q", type=int, required=False, help="faces per vertex")
    sp.add_argument("--generations", "-G", type=int, default=generations)
    sp.add_argument("--budget", type=int, default=None, help="vertex budget")
    sp.add_argument("--config", help="JSON file whose keys override flags")
    sp.add_argument("--json", dest="json_out", help="write the report as JSON here")


def _need_shape(args):
    if args.p is None or args.q is None:
        raise UsageError("--p and --q are required")


def _tess(args, allow_spherical=False):
    _need_shape(args)
    return build_tessellation(
        TessellationSpec(args.p, args.q, args.generations, args.budget, allow_spherical=allow_spherical)
    )


def _write_json(path, obj):
    if path:
        with open(path, "w") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True, default=str)


def _load_config(args):
    if not getattr(args, "config", None):
        return
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read config {args.config}: {e}")
    for k, v in cfg.items():
        key = k.replace("-", "_")
        if key == "p":
            v = parse_p(v)
        setattr(args, key, v)


# --------------------------------------------------------------------------


def cmd_build(args):
    t = _tess(args, args.allow_spherical)
    rep = audit_tessellation(t)
    data = t.to_dict()
    data["audit"] = rep.as_dict()
    text = json.dumps(data, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        print(text)
    verdict = "pass" if rep.passed else "fail"
    print(f"{t.spec.label} G={t.max_generation} vertices={t.num_vertices} audit: {verdict}", file=sys.stderr if not args.out else sys.stdout)
    for v in rep.violations[:10]:
        print(f"  {v.rule}: {v.message} {v.ids}")
    return EXIT_OK if rep.passed else EXIT_FAIL


def _verify_spi(args):
    from .addressing import build_scheme, verify_spi

    t = _tess(args)
    res = verify_spi(t, build_scheme(t))
    for v in res.violations:
        print(f"  vertex {v.vertex}: paths {v.path_a} / {v.path_b}")
    return res.passed, {"violations": [vars(v) for v in res.violations]}


def _verify_lemmas(args):
    t = _tess(args)
    rep = audit_tessellation(t)
    for v in rep.violations[:10]:
        print(f"  {v.rule}: {v.message} {v.ids}")
    print(f"  rules: {', '.join(rep.rules_checked)}")
    return rep.passed, rep.as_dict()


def _verify_toom(args):
    from .addressing import build_scheme
    from .analysis.toom import build_potential, verify_toom
    from .automaton import build_automaton

    t = _tess(args)
    pot = build_potential(t, build_scheme(t), args.speedup, args.M)
    rep = verify_toom(build_automaton(t), pot, kappa=args.speedup, seed=args.seed or 0)
    print(f"  condition 1: {'pass' if rep.cond1_ok else 'FAIL'} (M={rep.M}, observed {rep.observed_M})")
    if rep.cond1_witness:
        print(f"    witness (a, b, component, delta): {rep.cond1_witness}")
    print(f"  condition 2: {'pass' if rep.cond2_ok else 'FAIL'}")
    print(f"  condition 3: {'pass' if rep.cond3_ok else 'FAIL'} ({rep.cond3_failures} of {rep.region_size} vertices fail)")
    if rep.cond3_witness:
        print(f"    witness: {rep.cond3_witness}")
    if rep.validated:
        agree = sum(v[1] for v in rep.validated)
        print(f"  exhaustive cross-check: {agree}/{len(rep.validated)} vertices agree")
    return rep.passed, rep.to_dict()


def _verify_flows(args):
    from .analysis.flows import make_flow, verify_flows
    from .automaton import build_automaton

    t = _tess(args)
    flow = make_flow(t.p, t.q)
    rep = verify_flows(t, build_automaton(t, "auto"), flow)
    print(f"  family {flow.family}: r={flow.r} s={flow.s} M={flow.M}")
    for name, b in flow.classes.items():
        o = rep.observed.get(name)
        seen = f"worst seen out {o.out_min} in {o.in_max} net {o.net_min} (n={o.count})" if o else "not present"
        print(f"  {name:<28} out>={b.out_min:<3} in<={b.in_max:<3} net>={b.net:<3} {seen}")
    for v in rep.violations[:10]:
        print(f"  !! {v['message']}: {v}")
    return rep.passed, rep.to_dict()


def _verify_island(args):
    from .analysis.certificates import make_island, verify_island
    from .automaton import build_automaton

    t = _tess(args, allow_spherical=True)
    cert = make_island(t)
    rep = verify_island(build_automaton(t), cert.cells, args.steps)
    print(f"  {cert.kind} island {list(cert.cells)}")
    for c in rep.counts:
        print(f"    cell {c.vertex}: {c.support}/{c.threshold}")
    print(f"  persists {rep.dynamic_steps} steps: {rep.dynamic_ok}")
    return rep.valid, rep.to_dict()


def _verify_bridge(args):
    from .analysis.certificates import make_bridge, verify_bridge
    from .automaton import build_automaton

    t = _tess(args)
    cert = make_bridge(t, args.m, args.n)
    rep = verify_bridge(build_automaton(t), cert.bridge, cert.piers, args.steps)
    print(f"  bridge {list(rep.bridge)} piers {list(rep.piers)}")
    bad = rep.violations
    print(f"  static: {'pass' if not bad else 'FAIL'}; in error for {rep.dynamic_steps} steps: {rep.dynamic_ok}")
    return rep.valid, rep.to_dict()


VERIFIERS = {
    "spi": _verify_spi,
    "lemmas": _verify_lemmas,
    "toom": _verify_toom,
    "flows": _verify_flows,
    "island": _verify_island,
    "bridge": _verify_bridge,
}


def cmd_verify(args):
    ok, report = VERIFIERS[args.target](args)
    print(f"verify {args.target} {{{format_p(args.p)},{args.q}}}: {'pass' if ok else 'fail'}")
    _write_json(args.json_out, {"schema_version": 1, "target": args.target, "passed": ok, "report": report})
    return EXIT_OK if ok else EXIT_FAIL


def _resolve_seed(args):
    if args.seed is None:
        args.seed = int(np.random.SeedSequence().entropy % 2**63)
        log.warning("no --seed given, using %d", args.seed)
    return args.seed


def cmd_simulate(args):
    from .automaton import build_automaton
    from .faults import FaultConfig
    from .simulate import manifest, manifest_json, monte_carlo

    seed = _resolve_seed(args)
    t = _tess(args)
    spec = build_automaton(t, "auto" if args.weakened else None)
    config = FaultConfig(args.alpha, args.beta, seed)
    started = time.time()
    curve = monte_carlo(spec, config, args.T, args.trials, args.boundary, workers=args.workers)
    csv_text = curve.to_csv()
    m = manifest(
        "simulate",
        spec,
        config,
        {
            "T": args.T,
            "trials": args.trials,
            "boundary": args.boundary,
            "master_seed": seed,
            "started": started,
            "finished": time.time(),
            "terminal_rate": curve.terminal_rate,
        },
    )
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(csv_text)
        with open(args.out + ".manifest.json", "w") as fh:
            fh.write(manifest_json(m))
        print(f"wrote {args.out} (terminal error rate {curve.terminal_rate:.4f})")
    else:
        sys.stdout.write(csv_text)
    return EXIT_OK


def cmd_classify(args):
    from .analysis.classify import INF, classify, format_table

    if args.table:
        pmax, qmax = args.table
        ps = list(range(3, pmax + 1)) + [INF]
        print(format_table(ps, range(2, qmax + 1)))
        return EXIT_OK
    _need_shape(args)
    print(classify(args.p, args.q).value)
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="tessfault", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build a truncation and audit it")
    _add_shape(b)
    b.add_argument("--allow-spherical", action="store_true")
    b.add_argument("--out", help="tessellation JSON path (default stdout)")
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("verify", help="run a checker")
    v.add_argument("target", choices=sorted(VERIFIERS))
    _add_shape(v)
    v.add_argument("--speedup", type=int, default=1, help="kappa for the Toom check")
    v.add_argument("--M", type=int, default=None, help="override the Toom bound M")
    v.add_argument("--m", type=int, default=3)
    v.add_argument("--n", type=int, default=3)
    v.add_argument("--steps", type=int, default=1000)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("simulate", help="Monte Carlo origin error curve")
    _add_shape(s, generations=8)
    s.add_argument("--alpha", type=float, default=0.0)
    s.add_argument("--beta", type=float, default=0.0)
    s.add_argument("--T", type=int, default=200)
    s.add_argument("--trials", type=int, default=200)
    s.add_argument("--boundary", default="adversarial", choices=["adversarial", "frozen-zero"])
    s.add_argument("--weakened", action="store_true", help="simulate the weakened automaton")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    s.add_argument("--out", help="CSV path; a manifest is written next to it")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("classify", help="tolerance class of {p,q}")
    c.add_argument("--p", type=_p)
    c.add_argument("--q", type=int)
    c.add_argument("--table", nargs=2, type=int, metavar=("PMAX", "QMAX"))
    c.add_argument("--config")
    c.set_defaults(func=cmd_classify)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        _load_config(args)
        return args.func(args)
    except (UsageError, TessfaultError, ValueError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
