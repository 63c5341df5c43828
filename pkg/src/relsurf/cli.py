"""Command-line interface.

Exit codes: 0 success, 2 when inconclusive Forni reports are present,
3 on an invariant violation detected during the run.
"""

import argparse
import json
import sys
from fractions import Fraction

from .census import (
    diagram_census,
    enumerate_origamis,
    parse_config,
    run_pipeline,
    summary_csv,
    zero_forni_census,
)
from .diagrams import classify_configuration
from .flat_core import CylDiagram, CylSurface, Origami, singularity_data
from .kz_monodromy import forni_subspace, lyapunov_estimate
from .rel_deform import (
    apply_matrix,
    apply_rel_twist,
    classify_collapse,
    direction_cylinders,
    rel_stretch_path,
)

EXIT_OK = 0
EXIT_INCONCLUSIVE = 2
EXIT_INVARIANT = 3


def _parse_stratum(text):
    if not text:
        return ()
    return tuple(int(x) for x in text.replace(" ", "").split(",") if x)


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def cmd_census_origamis(args):
    if args.forni:
        census = zero_forni_census(
            args.n_max, n_cap=max(args.n_max, 10),
            with_lyapunov=args.lyapunov, lyap_steps=args.lyap_steps,
        )
        for rec in census.records:
            print(json.dumps(rec.to_json(), sort_keys=True))
        print("# orbits: %d  nontrivial: %d  inconclusive: %d"
              % (len(census.records), len(census.nontrivial),
                 len(census.inconclusive)), file=sys.stderr)
        return EXIT_INCONCLUSIVE if census.inconclusive else EXIT_OK
    stratum = _parse_stratum(args.stratum) if args.stratum else None
    for n in range(1, args.n_max + 1):
        for o in enumerate_origamis(n, stratum=stratum, n_cap=max(args.n_max, 10)):
            rec = o.to_json()
            g, kappa, _ = singularity_data(o)
            rec["genus"] = g
            rec["stratum"] = list(kappa)
            print(json.dumps(rec, sort_keys=True))
    return EXIT_OK


def cmd_census_diagrams(args):
    rows, summary = diagram_census(_parse_stratum(args.stratum), args.reflection)
    for row in rows:
        print(json.dumps(row, sort_keys=True))
    print(summary_csv(summary), end="", file=sys.stderr)
    return EXIT_OK


def cmd_classify(args):
    d = CylDiagram.from_json(_load_json(args.diagram))
    label = classify_configuration(d)
    print(json.dumps({"configuration": label}))
    return EXIT_OK


def cmd_forni(args):
    o = Origami.from_json(_load_json(args.origami))
    caps = {}
    if args.orbit_cap:
        caps["orbit_cap"] = args.orbit_cap
    if args.closure_cap:
        caps["closure_cap"] = args.closure_cap
    report = forni_subspace(o, caps=caps or None)
    print(json.dumps(report.to_json(), sort_keys=True))
    return EXIT_OK if report.resolved() else EXIT_INCONCLUSIVE


def cmd_lyapunov(args):
    o = Origami.from_json(_load_json(args.origami))
    est = lyapunov_estimate(o, steps=args.steps, seed=args.seed)
    print(json.dumps(est.to_json(), sort_keys=True))
    return EXIT_OK


def cmd_deform(args):
    m = CylSurface.from_json(_load_json(args.surface))
    script = _load_json(args.script)
    logs = []
    for step in script:
        op = step["op"]
        params = step.get("args", {})
        if op == "rel_twist":
            m = apply_rel_twist(m, [Fraction(x) for x in params["t"]])
        elif op == "rel_stretch":
            out = rel_stretch_path(
                m, [Fraction(x) for x in params["s"]], Fraction(params["stop"]))
            if out.event is not None:
                cls = classify_collapse(out.event, m)
                log = out.event.to_json()
                log["target_stratum"] = list(cls.target_stratum)
                logs.append(log)
                print(json.dumps({"surface": None, "events": logs}, sort_keys=True))
                return EXIT_OK
            m = out.surface
        elif op == "direction":
            slope = params.get("slope", "vertical")
            if slope != "vertical":
                slope = Fraction(slope)
            dec = direction_cylinders(m, slope, params.get("cap", 100000))
            logs.append({
                "direction": str(slope),
                "cylinders": [
                    {"width": str(c.width), "circumference": str(c.circumference)}
                    for c in dec.cylinders
                ],
            })
        else:
            kwargs = dict(params)
            for key in ("t", "scale"):
                if key in kwargs:
                    kwargs[key] = Fraction(kwargs[key])
            result = apply_matrix(m, op, **kwargs)
            if hasattr(result, "u_star"):
                cls = classify_collapse(result, m)
                log = result.to_json()
                log["target_stratum"] = list(cls.target_stratum)
                logs.append(log)
                continue
            m = result
    print(json.dumps({"surface": m.to_json(), "events": logs}, sort_keys=True))
    return EXIT_OK


def cmd_pipeline(args):
    with open(args.config) as fh:
        config = parse_config(fh.read())
    manifest = run_pipeline(config, out_dir=args.out_dir, resume=not args.fresh)
    print(json.dumps(manifest, sort_keys=True, indent=1))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="relsurf",
                                description="cylinder diagrams, REL deformations "
                                            "and KZ monodromy")
    sub = p.add_subparsers(dest="command", required=True)

    census = sub.add_parser("census", help="run a census")
    csub = census.add_subparsers(dest="what", required=True)
    co = csub.add_parser("origamis", help="enumerate origamis / zero-Forni census")
    co.add_argument("--n-max", type=int, required=True)
    co.add_argument("--stratum", type=str, default="")
    co.add_argument("--forni", action="store_true",
                    help="run the zero-Forni screening per orbit")
    co.add_argument("--lyapunov", action="store_true")
    co.add_argument("--lyap-steps", type=int, default=100000)
    co.add_argument("--jobs", type=int, default=1)
    co.set_defaults(func=cmd_census_origamis)
    cd = csub.add_parser("diagrams", help="cylinder diagram census")
    cd.add_argument("--stratum", type=str, required=True)
    cd.add_argument("--reflection", action="store_true", default=True)
    cd.add_argument("--no-reflection", dest="reflection", action="store_false")
    cd.set_defaults(func=cmd_census_diagrams)

    cl = sub.add_parser("classify", help="classify a diagram's configuration")
    cl.add_argument("--diagram", required=True)
    cl.set_defaults(func=cmd_classify)

    fo = sub.add_parser("forni", help="Forni report for one origami")
    fo.add_argument("--origami", required=True)
    fo.add_argument("--orbit-cap", type=int, default=0)
    fo.add_argument("--closure-cap", type=int, default=0)
    fo.set_defaults(func=cmd_forni)

    ly = sub.add_parser("lyapunov", help="Lyapunov estimate for one origami")
    ly.add_argument("--origami", required=True)
    ly.add_argument("--steps", type=int, default=10 ** 6)
    ly.add_argument("--seed", type=int, default=0)
    ly.set_defaults(func=cmd_lyapunov)

    de = sub.add_parser("deform", help="apply a deformation script")
    de.add_argument("--surface", required=True)
    de.add_argument("--script", required=True)
    de.set_defaults(func=cmd_deform)

    pi = sub.add_parser("pipeline", help="run configured stages with manifest")
    pi.add_argument("--config", required=True)
    pi.add_argument("--out-dir", default=None)
    pi.add_argument("--fresh", action="store_true")
    pi.set_defaults(func=cmd_pipeline)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AssertionError as exc:
        print("invariant violation: %s" % exc, file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
