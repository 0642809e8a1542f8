"""Command-line front end.

Exit status: 0 on success, 2 when the input is mathematically invalid (or a
check fails), 1 on any other error.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field, replace

from . import schemas
from .direct import direct_weights, find_singularities, recover_a_polynomial
from .errors import InvalidInput, JacresError
from .inverse import SpectralMeasure, build_measure, density_table, validate_configuration
from .io import InputError, csv_text, dump_json, load_json, write_text
from .jacobi import EventuallyPeriodicOperator
from .periodic import BandSet, PeriodicBlock, bands_of
from .perturb import (PerturbationDeterminant, StabilityExperimentConfig, add_point_mass,
                      check_damsim, christoffel_add, remove_point_mass, stability_experiment)
from .reconstruct import (STIELTJES_NODES, TAIL_TOL, TailInfo, default_n_max, detect_tail,
                          hankel_reconstruct, moments, operator_from_tail,
                          stieltjes_reconstruct)
from .singularities import SingularityConfiguration

EXIT_OK, EXIT_ERROR, EXIT_INVALID = 0, 1, 2
COMMANDS = ("direct", "inverse", "validate", "reconstruct", "perturb", "stability", "damsim")


@dataclass(frozen=True)
class RunConfig:
    """Parsed command line."""

    command: str
    input_path: str
    output_path: str = "-"
    quadrature_nodes: int = STIELTJES_NODES
    tolerances: dict = field(default_factory=lambda: {"tail": TAIL_TOL})
    seed: int | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        n = self.quadrature_nodes
        if not (64 <= n <= 4096 and n & (n - 1) == 0):
            raise ValueError("--nodes must be a power of two between 64 and 4096")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", help="input file, or - for stdin")
    common.add_argument("-o", "--output", default="-", help="output file, or - for stdout")
    common.add_argument("--nodes", type=int, default=STIELTJES_NODES,
                        help="quadrature nodes per band (power of two, 64..4096)")
    common.add_argument("--tol", type=float, default=TAIL_TOL, help="tail detection tolerance")
    common.add_argument("--seed", type=int, default=None, help="random seed")

    parser = _Parser(prog="jacres", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("direct", parents=[common],
                       help="operator JSON -> singularities (+ measure, density CSV)")
    p.add_argument("--measure-out", help="write the spectral measure JSON here")
    p.add_argument("--density-csv", help="write x,f(x) samples here")
    p.add_argument("--grid", type=int, default=201, help="density grid size")

    p = sub.add_parser("inverse", parents=[common],
                       help="singularities JSON -> measure JSON (+ coefficients)")
    p.add_argument("--coeffs-out", help="write reconstructed coefficients JSON here")
    p.add_argument("--n-max", type=int, default=None)

    sub.add_parser("validate", parents=[common], help="singularities JSON -> validation report")

    p = sub.add_parser("reconstruct", parents=[common], help="measure JSON -> coefficients")
    p.add_argument("--n-max", type=int, default=None)
    p.add_argument("--method", choices=("stieltjes", "hankel"), default="stieltjes")
    p.add_argument("--csv", help="write n,a_n,b_n here")

    p = sub.add_parser("perturb", parents=[common], help="measure JSON + surgery -> measure")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--remove", type=float, metavar="E", help="remove the mass at E")
    g.add_argument("--add", type=float, metavar="E", help="add a mass at E (needs --weight)")
    g.add_argument("--christoffel", type=float, metavar="E",
                   help="quadratic Christoffel transform at E (needs --shift)")
    p.add_argument("--weight", type=float)
    p.add_argument("--shift", type=float, help="resonance offset for --christoffel")

    p = sub.add_parser("stability", parents=[common], help="experiment config -> report")
    p.add_argument("--epsilon", type=float, action="append", help="perturbation size (repeatable)")
    p.add_argument("--radius", type=float, action="append", help="truncation radius (repeatable)")
    p.add_argument("--edge-exclusion", type=float, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--csv", help="long-form CSV: epsilon,radius,n,median_err")

    p = sub.add_parser("damsim", parents=[common], help="L coefficients -> clause report")
    p.add_argument("--radius", type=float, default=1e6, help="radius R > 1")
    return parser


def _bands_from(obj: dict) -> BandSet:
    if "bands" in obj:
        return BandSet.from_json(obj["bands"])
    if "tail" in obj:
        return bands_of(PeriodicBlock.from_json(obj["tail"]))
    raise InputError("singularities input needs a 'bands' or 'tail' entry")


def _operator_from(obj: dict, tol: float = TAIL_TOL) -> EventuallyPeriodicOperator:
    if "s" in obj and "a" in obj:
        info = TailInfo(int(obj["s"]), PeriodicBlock.from_json(obj["tail"]), int(obj["k"]))
        return operator_from_tail(obj["a"], obj["b"], info, tol)
    return EventuallyPeriodicOperator.from_json(obj)


def _coeffs_json(a, b, info) -> dict:
    return {"a": [float(x) for x in a], "b": [float(x) for x in b], "s": info.s,
            "k": info.k, "tail": info.tail.to_json()}


def _reconstruct(measure: SpectralMeasure, cfg: RunConfig, n_max=None, method="stieltjes"):
    n_max = default_n_max(measure) if n_max is None else n_max
    if method == "hankel":
        a, b = hankel_reconstruct(moments(measure, 2 * n_max), n_max)
    else:
        a, b = stieltjes_reconstruct(measure, n_max, nodes=cfg.quadrature_nodes)
    info = detect_tail(a, b, measure.bands.p, cfg.tolerances["tail"])
    return a, b, info


def _cmd_direct(cfg: RunConfig) -> int:
    op = _operator_from(load_json(cfg.input_path, schemas.OPERATOR_OR_COEFFICIENTS),
                        cfg.tolerances["tail"])
    sing = find_singularities(op)
    a = recover_a_polynomial(op)
    out = sing.to_json()
    out["bands"] = op.bands.to_json()
    out["a_poly"] = [float(c) for c in a]
    dump_json(cfg.output_path, out)
    w = direct_weights(op, sing, a)
    measure = SpectralMeasure(op.bands, tuple(a), tuple(zip(sing.eigenvalues, w)))
    if cfg.extra.get("measure_out"):
        dump_json(cfg.extra["measure_out"], measure.to_json())
    if cfg.extra.get("density_csv"):
        tab = density_table(measure, cfg.extra.get("grid", 201))
        write_text(cfg.extra["density_csv"], csv_text(["x", "f(x)"], tab))
    return EXIT_OK


def _cmd_inverse(cfg: RunConfig) -> int:
    obj = load_json(cfg.input_path, schemas.SINGULARITIES)
    bands = _bands_from(obj)
    sing = SingularityConfiguration.from_json(obj)
    measure = build_measure(sing, bands, nodes=min(cfg.quadrature_nodes, 256))
    dump_json(cfg.output_path, measure.to_json())
    if cfg.extra.get("coeffs_out"):
        a, b, info = _reconstruct(measure, cfg, cfg.extra.get("n_max"))
        dump_json(cfg.extra["coeffs_out"], _coeffs_json(a, b, info))
    return EXIT_OK


def _cmd_validate(cfg: RunConfig) -> int:
    obj = load_json(cfg.input_path, schemas.SINGULARITIES)
    rep = validate_configuration(SingularityConfiguration.from_json(obj), _bands_from(obj))
    dump_json(cfg.output_path, rep.to_json())
    return EXIT_OK if rep.ok else EXIT_INVALID


def _cmd_reconstruct(cfg: RunConfig) -> int:
    measure = SpectralMeasure.from_json(load_json(cfg.input_path, schemas.SPECTRAL_MEASURE))
    a, b, info = _reconstruct(measure, cfg, cfg.extra.get("n_max"), cfg.extra.get("method", "stieltjes"))
    dump_json(cfg.output_path, _coeffs_json(a, b, info))
    if cfg.extra.get("csv"):
        rows = [(n + 1, a[n], b[n]) for n in range(len(a))]
        write_text(cfg.extra["csv"], csv_text(["n", "a_n", "b_n"], rows))
    return EXIT_OK


def _cmd_perturb(cfg: RunConfig) -> int:
    measure = SpectralMeasure.from_json(load_json(cfg.input_path, schemas.SPECTRAL_MEASURE))
    ex = cfg.extra
    if ex.get("remove") is not None:
        new = remove_point_mass(measure, ex["remove"])
    elif ex.get("add") is not None:
        if ex.get("weight") is None:
            raise InputError("--add needs --weight")
        res = add_point_mass(measure, ex["add"], ex["weight"])
        if not res.accepted:
            dump_json(cfg.output_path, res.report.to_json())
            return EXIT_INVALID
        new = res.measure
    else:
        if ex.get("shift") is None:
            raise InputError("--christoffel needs --shift")
        new = christoffel_add(measure, ex["christoffel"], ex["shift"])
    dump_json(cfg.output_path, new.to_json())
    return EXIT_OK


def _cmd_stability(cfg: RunConfig) -> int:
    exp = StabilityExperimentConfig.from_json(load_json(cfg.input_path, schemas.STABILITY_CONFIG))
    ex = cfg.extra
    changes = {"nodes": cfg.quadrature_nodes}
    if ex.get("epsilon"):
        changes["epsilons"] = tuple(ex["epsilon"])
    if ex.get("radius"):
        changes["truncation_radii"] = tuple(ex["radius"])
    if ex.get("edge_exclusion") is not None:
        changes["edge_exclusion"] = ex["edge_exclusion"]
    if ex.get("trials") is not None:
        changes["trials"] = ex["trials"]
    if cfg.seed is not None:
        changes["seed"] = cfg.seed
    exp = replace(exp, **changes)
    if not exp.epsilons:
        raise InputError("no epsilons given")
    rep = stability_experiment(exp)
    dump_json(cfg.output_path, rep.to_json())
    if ex.get("csv"):
        # an untruncated run has an empty radius field
        rows = [(r.epsilon, "" if math.isinf(r.radius) else r.radius, n + 1, e) for r in rep.rows
                for n, e in enumerate(r.median_err)]
        write_text(ex["csv"], csv_text(["epsilon", "radius", "n", "median_err"], rows))
    return EXIT_OK


def _cmd_damsim(cfg: RunConfig) -> int:
    L = PerturbationDeterminant.from_json(load_json(cfg.input_path, schemas.PERTURBATION_DETERMINANT))
    rep = check_damsim(L, cfg.extra.get("radius", 1e6))
    dump_json(cfg.output_path, rep.to_json())
    return EXIT_OK if rep.ok else EXIT_INVALID


_HANDLERS = {
    "direct": _cmd_direct, "inverse": _cmd_inverse, "validate": _cmd_validate,
    "reconstruct": _cmd_reconstruct, "perturb": _cmd_perturb,
    "stability": _cmd_stability, "damsim": _cmd_damsim,
}


def run(config: RunConfig) -> int:
    """Execute one command; returns the exit status."""
    try:
        return _HANDLERS[config.command](config)
    except InvalidInput as exc:
        print(f"jacres {config.command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (JacresError, ValueError) as exc:
        print(f"jacres {config.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    extra = {k: v for k, v in vars(args).items()
             if k not in ("command", "input", "output", "nodes", "tol", "seed")}
    try:
        config = RunConfig(args.command, args.input, args.output, args.nodes,
                           {"tail": args.tol}, args.seed, extra)
    except ValueError as exc:
        print(f"jacres: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
