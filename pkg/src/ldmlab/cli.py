"""Command line entry point.

Exit codes: 0 success, 2 validation error, 3 resource limit.
"""

import argparse
import json
import sys

from .harness import ExperimentSpec, ResourceLimitError, ValidationError, dispatch


def _common(parser):
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", type=str, default=None, help="payload file (csv or json)")
    parser.add_argument("--format", choices=["csv", "json"], default=None)
    parser.add_argument("--record", type=str, default=None, help="also write the full run record here")


def build_parser():
    p = argparse.ArgumentParser(prog="ldmlab", description=__doc__)
    sub = p.add_subparsers(dest="subcommand", required=True)

    s = sub.add_parser("ldm-sim", help="sample the differencing discrepancy on uniform inputs")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--bits", default="auto", help="'auto' or an explicit bit width")
    s.add_argument("--hist-out", type=str, default=None)
    _common(s)

    s = sub.add_parser("exact-pdf", help="exact mixture coefficients of the final difference")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--max-n-override", action="store_true")
    _common(s)

    s = sub.add_parser("lambda-walk", help="random single-path tuple walks")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--hist-out", type=str, default=None)
    _common(s)

    s = sub.add_parser("rate-eq", help="deterministic mean-field evolution")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--field-out", type=str, default=None)
    _common(s)

    s = sub.add_parser("fibonacci", help="half-index Fibonacci sequence scaling curve")
    s.add_argument("--n-max", type=int, required=True)
    s.add_argument("--sample", type=str, default="dyadic", help="'dyadic' or comma list")
    _common(s)

    s = sub.add_parser("series", help="log-domain evaluation of the continuum series")
    s.add_argument("--log2-n", type=int, required=True)
    s.add_argument("--precision", type=int, default=256)
    _common(s)

    s = sub.add_parser("gamma", help="piecewise-polynomial recursion diagnostics")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k-max", type=int, default=8)
    _common(s)

    s = sub.add_parser("fit", help="structured or naive scaling fits over a csv")
    s.add_argument("--in", dest="in_", type=str, required=True)
    s.add_argument("--model", choices=["fit", "naive"], default="fit")
    s.add_argument("--range", type=str, default=None, help="nmin:nmax")
    _common(s)

    s = sub.add_parser("figure", help="emit the csv bundle behind a named figure")
    s.add_argument("--name", type=str, required=True, choices=["fig2", "fig3", "fig5", "fig6"])
    s.add_argument("--out-dir", type=str, default=".")
    s.add_argument("--scale", type=float, default=1.0, help="shrink preset trial counts")
    _common(s)
    return p


_PARAM_KEYS = {
    "ldm-sim": ["n", "trials", "bits", "hist_out"],
    "exact-pdf": ["n", "max_n_override"],
    "lambda-walk": ["n", "trials", "hist_out"],
    "rate-eq": ["n", "field_out"],
    "fibonacci": ["n_max", "sample"],
    "series": ["log2_n", "precision"],
    "fit": ["in", "model", "range"],
    "gamma": ["n", "k_max"],
    "figure": ["name", "out_dir", "scale"],
}


def spec_from_args(args):
    params = {}
    for key in _PARAM_KEYS[args.subcommand]:
        attr = "in_" if key == "in" else key
        params[key] = getattr(args, attr)
    if args.subcommand == "ldm-sim" and params["bits"] != "auto":
        try:
            params["bits"] = int(params["bits"])
        except ValueError:
            raise ValidationError("--bits must be 'auto' or an integer")
    return ExperimentSpec(
        subcommand=args.subcommand,
        params=params,
        seed=args.seed,
        out=args.out,
        format=args.format,
    )


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        spec = spec_from_args(args)
        record = dispatch(spec)
    except ValidationError as e:
        print("error: %s" % e, file=sys.stderr)
        return 2
    except ResourceLimitError as e:
        print("resource limit: %s" % e, file=sys.stderr)
        return 3
    if args.record:
        from .harness import atomic_write_text

        atomic_write_text(args.record, record.to_json() + "\n")
    if not spec.out:
        print(json.dumps(record.payload, sort_keys=True, indent=1))
    else:
        print("wrote %s" % ", ".join(record.output_files))
    for w in record.warnings:
        print("warning: %s" % w, file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
