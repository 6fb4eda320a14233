"""Command-line entry point: ``squeeze-lab <subcommand> [flags]``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .counterexample import (
    beta_threshold,
    build_K,
    psh_violation_report,
    sq_upper_closed_form,
    sq_upper_numeric,
)
from .errors import SqueezeLabError
from .geometry import (
    DegreeVector,
    DomainSpec,
    conv_g2_contains,
    d_minkowski,
    g2_contains,
)
from .metrics import CircleGrid, c_g2
from .report import RunConfig, emit_csv, emit_svg_plot, run_verify_paper, write_bundle


class UsageError(SqueezeLabError):
    pass


# config key -> (type, CLI flag)
_KEYS = {
    "r": (float, "--r"),
    "eps": (float, "--eps"),
    "tol": (float, "--tol"),
    "tau_grid": (int, "--tau-grid"),
    "k_density": (int, "--k-density"),
    "slice_points": (int, "--slice-points"),
    "out": (str, "--out"),
    "seed": (int, "--seed"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}")


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; blank lines and ``#`` comments are ignored."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key '{key}'")
        try:
            values[key] = _KEYS[key][0](raw)
        except ValueError:
            raise UsageError(f"{path}:{lineno}: bad value for '{key}': {raw!r}")
    return values


def _build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    for key, (typ, flag) in _KEYS.items():
        common.add_argument(flag, dest=key, type=typ, default=argparse.SUPPRESS)
    common.add_argument("--config", default=argparse.SUPPRESS)
    common.add_argument("--timings", action="store_true", default=argparse.SUPPRESS,
                        help="include wall-clock timings in summary.json (breaks byte-determinism)")
    common.add_argument("--beta-offset", dest="beta_offset", type=float, default=argparse.SUPPRESS,
                        help=argparse.SUPPRESS)

    parser = _Parser(prog="squeeze-lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    domains = ["g2", "conv_g2", "polydisc", "ball"]
    p = sub.add_parser("membership", parents=[common], help="membership verdict for a point")
    p.add_argument("z1", type=_complex)
    p.add_argument("z2", type=_complex)
    p.add_argument("--domain", choices=domains, default="conv_g2")
    p.add_argument("--radius", type=float, default=None, help="polydisc/ball radius (default r)")

    p = sub.add_parser("minkowski", parents=[common], help="(1,2)-Minkowski gauge of a point")
    p.add_argument("z1", type=_complex)
    p.add_argument("z2", type=_complex)
    p.add_argument("--domain", choices=domains, default="conv_g2")
    p.add_argument("--radius", type=float, default=None)

    p = sub.add_parser("cdist", parents=[common], help="Caratheodory distance of G2")
    for name in ("z1", "z2", "w1", "w2"):
        p.add_argument(name, type=_complex)

    p = sub.add_parser("bounds", parents=[common], help="squeezing bounds at (z1, 0)")
    p.add_argument("z1", type=_complex)

    sub.add_parser("verify-paper", parents=[common], help="run every check and write the report bundle")
    sub.add_parser("plot", parents=[common], help="write slice_bounds.csv and slice.svg")
    return parser


def parse_config(argv=None, config_file=None):
    """Return (RunConfig, parsed namespace); flags override the file, which overrides defaults."""
    args = _build_parser().parse_args(argv)
    given = vars(args)
    values = {}
    path = given.get("config", config_file)
    if path is not None:
        try:
            values.update(read_config_file(path))
        except OSError as err:
            raise UsageError(f"--config: {err}")
    for key in list(_KEYS) + ["timings", "beta_offset"]:
        if key in given:
            values[key] = given[key]
    cfg = RunConfig(**values)
    try:
        cfg.counterexample()
        if cfg.tol <= 0:
            raise ValueError("tol must be positive")
    except ValueError as err:
        word = str(err).split()[0]
        flag = _KEYS[word][1] if word in _KEYS else "config"
        raise UsageError(f"{flag}: {err}")
    return cfg, args


def _domain(args, cfg):
    radius = args.radius if args.radius is not None else cfg.r
    if args.domain == "g2":
        return DomainSpec.symmetrized_bidisc(cfg.tol)
    if args.domain == "conv_g2":
        return DomainSpec.conv_hull_g2(cfg.tol)
    if args.domain == "polydisc":
        return DomainSpec.polydisc(radius, cfg.tol)
    return DomainSpec.ball((0, 0), radius, cfg.tol)


def _c(z: complex) -> list:
    return [z.real, z.imag]


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2))


def _cmd_membership(cfg, args):
    z = (args.z1, args.z2)
    if args.domain == "g2":
        v = g2_contains(z, cfg.tol)
    elif args.domain == "conv_g2":
        v = conv_g2_contains(z)
    else:
        v = _domain(args, cfg).verdict(z)
    out = {"domain": args.domain, "status": v.status.value, "margin": v.margin}
    if v.certificate is not None:
        out["certificate"] = [{"weight": float(w), "point": [_c(p.z1), _c(p.z2)]} for w, p in v.certificate]
    _emit(out)
    return 0


def _cmd_minkowski(cfg, args):
    dom = _domain(args, cfg)
    d = DegreeVector(1, 2)
    z = np.array([args.z1, args.z2])
    closed = dom.closed_form_gauge(z, d)
    _emit({"domain": args.domain, "gauge": d_minkowski(z, dom, d, cfg.tol),
           "closed_form": None if closed is None else float(closed)})
    return 0


def _cmd_cdist(cfg, args):
    v = c_g2((args.z1, args.z2), (args.w1, args.w2), CircleGrid(cfg.tau_grid))
    _emit({"rho": v.rho, "dist": v.dist, "argmax_tau": _c(v.argmax_tau), "tau_grid": cfg.tau_grid})
    return 0


def _cmd_bounds(cfg, args):
    ccfg = cfg.counterexample()
    z = np.array([args.z1, 0j])
    _emit({"z1": _c(args.z1), "r": cfg.r, "beta": beta_threshold(cfg.r), "center_lower": cfg.r / 2,
           "closed_form_upper": sq_upper_closed_form(args.z1, ccfg).upper,
           "numeric_upper": sq_upper_numeric(z, build_K(ccfg), ccfg).upper})
    return 0


def _cmd_verify(cfg, args):
    bundle = run_verify_paper(cfg)
    out = write_bundle(bundle, cfg.output_dir())
    for check in bundle.checks:
        print(f"{check.verdict.upper():5s} {check.name}")
    v = bundle.violation
    print(f"verdict: {v['verdict']} (sup slice upper {v['sup_slice_upper']:.6g} vs center lower "
          f"{v['center_lower']:.6g}, beta {v['beta']:.6g})")
    print(f"report written to {out}")
    return bundle.exit_code


def _cmd_plot(cfg, args):
    ccfg = cfg.counterexample()
    report = psh_violation_report(ccfg)
    out = cfg.output_dir()
    out.mkdir(parents=True, exist_ok=True)
    emit_csv(["r", "eps", "radius", "angle", "closed_form_upper", "numeric_upper"],
             [[cfg.r, cfg.eps, row.radius, row.angle, row.closed_form, row.numeric] for row in report.slice_upper],
             out / "slice_bounds.csv")
    xs = np.linspace(0.0, cfg.r, 201)[1:-1]
    emit_svg_plot([{"label": "closed-form upper bound", "x": list(xs),
                    "y": [sq_upper_closed_form(x, ccfg).upper for x in xs], "kind": "line"},
                   {"label": "numeric upper bound", "x": [row.radius for row in report.slice_upper],
                    "y": [row.numeric for row in report.slice_upper], "kind": "points"}],
                  out / "slice.svg", hlines=[(cfg.r / 2, "r/2")], vlines=[(report.beta, "beta")])
    print(f"wrote {out / 'slice.svg'}")
    return 0


_COMMANDS = {
    "membership": _cmd_membership,
    "minkowski": _cmd_minkowski,
    "cdist": _cmd_cdist,
    "bounds": _cmd_bounds,
    "verify-paper": _cmd_verify,
    "plot": _cmd_plot,
}


def main(argv=None) -> int:
    try:
        cfg, args = parse_config(argv)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](cfg, args)
    except SqueezeLabError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
