"""Flip zeros of Paley-Wiener functions and check the stability bounds.

Exit codes: 0 success, 1 bound violation, 2 usage or configuration error,
3 numerical tolerance failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from . import harness, kernels
from .bounds import thm1_bound, thm2_bound
from .errors import ConstraintViolation, DomainError, ToleranceNotMet
from .flip import flip
from .pwcore import FlipPoint
from .stability import pair_distance, self_distance

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_TOLERANCE = 0, 1, 2, 3


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--seed", type=_u64, help="random seed (unsigned 64-bit)")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--threads", type=int, help="worker threads")
    common.add_argument("--preset", choices=sorted(harness.PRESETS), help="named test function")
    common.add_argument("--backend", choices=("numba", "numpy"), help="kernel backend")

    p = argparse.ArgumentParser(prog="zeroflip", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run randomized bound checks")
    v.add_argument("--trials", type=int)
    v.add_argument("--checks", help="comma separated check names ('' for none)")

    s = sub.add_parser("sweep", parents=[common], help="single-flip sweep over a grid")
    r = sub.add_parser("region", parents=[common], help="stability region map")
    for q in (s, r):
        q.add_argument("--grid", type=int, nargs=2, metavar=("NRE", "NIM"))
        q.add_argument("--re", type=float, nargs=2, metavar=("LO", "HI"))
        q.add_argument("--im", type=float, nargs=2, metavar=("LO", "HI"))

    c = sub.add_parser("converge", parents=[common], help="pair distances as a -> b")
    c.add_argument("--b", type=_complex, required=True, help="planted zero, e.g. 0.3+0.9j")
    c.add_argument("--a1", type=_complex, required=True, help="starting point")
    c.add_argument("--steps", type=int, default=10)

    f = sub.add_parser("flip", parents=[common], help="sample a flipped spectrum as CSV")
    f.add_argument("--a", type=_complex, required=True)
    f.add_argument("--xi", type=float, nargs=2, default=(-4.0, 4.0), metavar=("LO", "HI"))
    f.add_argument("--samples", type=int, default=801)

    d = sub.add_parser("distance", parents=[common], help="stability distance as JSON")
    d.add_argument("--a", type=_complex, required=True)
    d.add_argument("--b", type=_complex, help="second flip point (omit for F_a f vs f)")
    return p


def load_config(args) -> harness.SweepConfig:
    data = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise harness.ConfigError(f"cannot read config: {exc}") from exc
        if not isinstance(data, dict):
            raise harness.ConfigError("config must be a JSON object")
    cfg = harness.SweepConfig.from_dict(data)
    over = {}
    if args.seed is not None:
        over["seed"] = args.seed
    if args.threads is not None:
        over["threads"] = args.threads
    if args.preset is not None:
        over["preset"] = args.preset
        over["function"] = None
    if args.out is not None:
        over["out"] = args.out
    if getattr(args, "trials", None) is not None:
        over["trials"] = args.trials
    if getattr(args, "checks", None) is not None:
        over["checks"] = tuple(c for c in args.checks.split(",") if c)
    if getattr(args, "grid", None) or getattr(args, "re", None) or getattr(args, "im", None):
        g = cfg.grid
        over["grid"] = harness.Grid(tuple(args.re or g.re), tuple(args.im or g.im),
                                    tuple(args.grid or g.n))
    return replace(cfg, **over) if over else cfg


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _function(cfg):
    return cfg.fixed_function() or harness.preset("triangle", cfg.bandlimit)


def run(args) -> int:
    cfg = load_config(args)
    if args.command == "verify":
        report, status = harness.verify(cfg)
        _emit(harness.report_json(report), cfg.out)
        return status
    if args.command == "sweep":
        text = harness.sweep(cfg)
        _emit(text, cfg.out)
        rows = text.splitlines()[1:]
        bad = [r for r in rows if min(map(float, r.split(",")[-2:])) < -1e-9]
        return EXIT_VIOLATION if bad else EXIT_OK
    if args.command == "region":
        _emit(harness.region_map(cfg), cfg.out)
        return EXIT_OK
    if args.command == "converge":
        base = cfg.function or (harness.preset_spec(cfg.preset, cfg.bandlimit)
                                if cfg.preset else None)
        f = harness.planted_function(args.b, base, cfg.bandlimit)
        rows = harness.convergence_study(f, args.b, args.a1, args.steps)
        _emit(harness.convergence_csv(rows), cfg.out)
        return EXIT_VIOLATION if any(r[3] > r[4] + 1e-9 for r in rows[1:]) else EXIT_OK
    if args.command == "flip":
        fl = flip(_function(cfg), FlipPoint.from_complex(args.a))
        xi = np.linspace(args.xi[0], args.xi[1], args.samples)
        _emit(fl.spectrum_csv(xi), cfg.out)
        return EXIT_OK
    if args.command == "distance":
        f = _function(cfg)
        a = FlipPoint.from_complex(args.a)
        if args.b is None:
            rep = self_distance(f, a)
            checks = thm1_bound(f, a, rep)
        else:
            b = FlipPoint.from_complex(args.b)
            rep = pair_distance(f, a, b)
            checks = thm2_bound(f, a, b, rep) if abs(args.a - args.b) <= abs(args.b) / 2 else ()
        out = rep.to_dict()
        out["bounds"] = [c.to_dict() for c in checks]
        _emit(json.dumps(out, indent=2, sort_keys=True) + "\n", cfg.out)
        return EXIT_VIOLATION if any(c.margin < -1e-9 for c in checks) else EXIT_OK
    raise AssertionError(args.command)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.backend:
        kernels.set_backend(args.backend)
    try:
        return run(args)
    except (harness.ConfigError, ConstraintViolation, DomainError) as exc:
        print(f"zeroflip: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ToleranceNotMet as exc:
        print(f"zeroflip: tolerance not met: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except OSError as exc:
        print(f"zeroflip: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
