"""Command-line front end: every command reads JSON files and writes canonical JSON.

Exit codes are shared by all commands: 0 ok, 1 usage or parse error,
2 incompatible input, 3 nothing found (or nothing exists), 4 numerical
failure.
"""

import argparse
import csv
import io
import sys
from dataclasses import dataclass, field

import numpy as np

from . import channel as C
from . import circuit, classical, entropy, jsonio, marginal, maxent
from . import pdo as P
from . import quasi
from .errors import (
    IncompatibleError,
    NoMarginalChannelError,
    NoSteadyStateError,
    NotChordalError,
    NotFoundError,
    NumericalError,
)

EXIT_OK, EXIT_USAGE, EXIT_INCOMPATIBLE, EXIT_NOT_FOUND, EXIT_NUMERIC = range(5)


class UsageError(Exception):
    pass


class _Exit(Exception):
    """Finished with a report and a nonzero status."""

    def __init__(self, code, payload=None, message=""):
        super().__init__(message)
        self.code = code
        self.payload = payload


@dataclass
class RunConfig:
    command: str
    inputs: list = field(default_factory=list)
    out: str = None
    seed: int = 0
    tol: float = None
    quiet: bool = False

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise UsageError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        if self.tol is not None and not self.tol > 0:
            raise UsageError(f"tolerance override must be positive, got {self.tol}")

    def tol_or(self, default):
        return default if self.tol is None else self.tol


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _read(path):
    return jsonio.load(path)


def _read_pdo(path):
    obj = _read(path)
    try:
        return P.from_json(obj)
    except (KeyError, TypeError) as exc:
        raise jsonio.ParseError(f"{path}: not a PDO file ({exc})") from None


def _sweep(text):
    try:
        a, b, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"sweep must look like start:stop:step, got {text!r}") from None
    if step <= 0 or b < a:
        raise argparse.ArgumentTypeError("sweep needs start <= stop and a positive step")
    return np.linspace(a, b, int(round((b - a) / step)) + 1)


# commands ----------------------------------------------------------------------


def cmd_gen(cfg, args):
    spec = circuit.spec_from_json(_read(args.circuit), args.circuit)
    p = circuit.build_pdo(spec, max_events=args.max_events)
    obj = P.to_json(p)
    obj["validation"] = P.validate(p, cfg.tol_or(1e-12)).to_dict()
    return obj


def _filter(f, args, cfg):
    kind = args.filter
    if kind == "positive":
        opts = marginal.SearchOptions(
            starts=args.starts, iterations=args.iterations, seed=cfg.seed, tol=cfg.tol_or(1e-10)
        )
        return marginal.filter_positive(f, opts)
    if args.constraints is None:
        raise UsageError(f"--filter {kind} needs --constraints")
    obj = _read(args.constraints)
    if kind == "halfspaces":
        hs = [
            marginal.HalfSpace(jsonio.decode_matrix(jsonio.field(h, "operator", args.constraints)), float(h.get("offset", 0.0)))
            for h in jsonio.field(obj, "halfspaces", args.constraints)
        ]
        return marginal.filter_halfspaces(f, hs, cfg.tol_or(1e-9))
    vertices = [P.from_json(v) for v in jsonio.field(obj, "vertices", args.constraints)]
    return marginal.filter_hull(f, vertices, cfg.tol_or(1e-9))


def cmd_solve(cfg, args):
    try:
        scen = marginal.scenario_from_json(_read(args.scenario))
    except IncompatibleError as exc:
        report = {"error": "incompatible", "pair": list(exc.pair), "max_deviation": exc.deviation}
        raise _Exit(EXIT_INCOMPATIBLE, report, str(exc)) from None
    f = marginal.solve_herm1(scen)
    out = marginal.family_to_json(f)
    if args.filter == "none":
        return out
    res = _filter(f, args, cfg)
    out["filter"] = {
        "kind": args.filter,
        "found": res.found,
        "min_eigenvalue": float(res.min_eigenvalue) if np.isfinite(res.min_eigenvalue) else None,
        "completion": P.to_json(res.pdo) if res.found else None,
    }
    if not res.found:
        raise _Exit(EXIT_NOT_FOUND, out, f"no completion passed the {args.filter} filter")
    return out


def cmd_entropy(cfg, args):
    if args.pdo is None and args.sweep is None:
        raise UsageError("entropy needs a PDO file, --sweep, or both")
    out = {}
    if args.pdo is not None:
        out = entropy.report(_read_pdo(args.pdo), tuple(args.alpha)).to_dict()
    if args.sweep is not None:
        rows = entropy.qubit_curve(args.sweep)
        if args.csv:
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["r", "S", "closed_form"])
            w.writerows([[repr(x) for x in row] for row in rows])
            with open(args.csv, "w", encoding="utf-8") as fh:
                fh.write(buf.getvalue())
        out["curve"] = [{"r": r, "S": s, "closed_form": c} for r, s, c in rows]
    return out


def cmd_maxent(cfg, args):
    kw = dict(seed=cfg.seed, iterations=args.iterations, restarts=args.restarts, domain=args.domain)
    if args.maxent_cmd == "infer":
        scen = marginal.scenario_from_json(_read(args.scenario))
        problem = maxent.MaxEntProblem(scen, parameterization=args.mode, **kw)
        res = maxent.infer(problem)
        out = res.to_dict()
        out["mode"] = args.mode
        return out
    g = maxent.genuine_correlation(_read_pdo(args.pdo), args.k, norm=args.norm, check_unique=args.check_unique, **kw)
    return {"value": g.value, "norm": g.norm, "k": args.k, "unique": g.unique, "inference": g.inference.to_dict()}


def _read_channel(path):
    return C.from_json(_read(path), path)


def cmd_channel(cfg, args):
    sub = args.channel_cmd
    if sub == "apply":
        return P.to_json(C.apply(_read_channel(args.channel), _read_pdo(args.pdo)))
    if sub == "choi":
        return P.to_json(C.choi_pdo(_read_channel(args.channel)))
    if sub == "marginal":
        c = _read_channel(args.channel)
        return C.to_json(C.marginal_channel(c, args.keep_in, args.keep_out, cfg.tol_or(C.FACTOR_TOL)))
    parts = [_read_channel(p) for p in args.parts]
    try:
        fam, _ = C.solve_channel_marginal(parts)
    except IncompatibleError as exc:
        report = {"error": "incompatible", "pair": list(exc.pair), "max_deviation": exc.deviation}
        raise _Exit(EXIT_INCOMPATIBLE, report, str(exc)) from None
    out = marginal.family_to_json(fam)
    out["channel"] = C.to_json(C.channel_from_completion(fam.base_point))
    return out


def cmd_classical(cfg, args):
    obj = _read(args.scenario)
    parts = [quasi.from_json(q) for q in obj.get("parts", [])]
    edges = obj.get("hyperedges")
    if edges is None:
        if not parts:
            raise jsonio.ParseError(f"{args.scenario}: need 'hyperedges' or 'parts'")
        edges = [list(q.variables) for q in parts]
    g = classical.CompatibilityGraph(tuple(tuple(h) for h in edges))
    res = classical.is_chordal(g)
    out = {"chordal": res.chordal, "ordering": None if res.ordering is None else list(res.ordering)}
    if not res.chordal:
        raise _Exit(EXIT_NOT_FOUND, out, "compatibility graph is not chordal")
    if parts:
        joint = classical.solve_chordal(g, parts)
        out["joint"] = quasi.to_json(joint)
        out["negativity"] = joint.negativity
    return out


def cmd_decompose(cfg, args):
    p = _read_pdo(args.pdo)
    exp = P.separable_expansion(p)
    return {
        "dims": list(exp.dims),
        "labels": list(exp.labels),
        "weights": quasi.to_json(exp.weights),
        "negativity": exp.weights.negativity,
        "local_states": [[[[float(z.real), float(z.imag)] for z in v] for v in s] for s in exp.local_states],
        "reassembly_error": float(np.max(np.abs(exp.reassemble() - p.matrix))),
    }


def cmd_purify(cfg, args):
    p = _read_pdo(args.pdo)
    pur = P.purify(p)
    return {
        "dims": list(pur.dims),
        "state_vector": [[float(z.real), float(z.imag)] for z in pur.state_vector],
        "sign_unitary": jsonio.encode_matrix(pur.sign_unitary),
        "norm_squared": pur.norm_squared,
        "reconstruction_error": float(np.max(np.abs(pur.reconstruct() - p.matrix))),
    }


def cmd_lindblad(cfg, args):
    gen = C.lindbladian_from_json(_read(args.generator), args.generator)
    if args.steady:
        return P.to_json(C.steady_state(gen, cfg.tol_or(1e-10)))
    if args.pdo is None:
        raise UsageError("lindblad needs --pdo (with --tau) or --steady")
    if args.dt <= 0 or args.tau < 0:
        raise UsageError("need tau >= 0 and dt > 0")
    return P.to_json(C.evolve(gen, _read_pdo(args.pdo), args.tau, args.dt))


COMMANDS = {
    "gen": cmd_gen,
    "solve": cmd_solve,
    "entropy": cmd_entropy,
    "maxent": cmd_maxent,
    "channel": cmd_channel,
    "classical": cmd_classical,
    "decompose": cmd_decompose,
    "purify": cmd_purify,
    "lindblad": cmd_lindblad,
}


def _globals(parser, suppress):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=d(0), help="RNG seed (default 0)")
    parser.add_argument("--tol", type=float, default=d(None), help="override the command's tolerance")
    parser.add_argument("--out", default=d(None), help="output file (default stdout)")
    parser.add_argument("--quiet", action="store_true", default=d(False), help="no summary on stderr")


def build_parser():
    common = _Parser(add_help=False)
    _globals(common, suppress=True)
    parser = _Parser(prog="pdolab", description="Pseudo-density operator toolkit.")
    _globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", parents=[common], help="build the PDO of a circuit file")
    p.add_argument("circuit")
    p.add_argument("--max-events", type=int, default=4)

    p = sub.add_parser("solve", parents=[common], help="solve a marginal scenario")
    p.add_argument("scenario")
    p.add_argument("--filter", choices=("none", "positive", "halfspaces", "hull"), default="none")
    p.add_argument("--constraints", help="half-space or vertex file for the linear filters")
    p.add_argument("--starts", type=int, default=64)
    p.add_argument("--iterations", type=int, default=500)

    p = sub.add_parser("entropy", parents=[common], help="entropy and causality report")
    p.add_argument("pdo", nargs="?")
    p.add_argument("--alpha", type=float, nargs="+", default=[2.0])
    p.add_argument("--sweep", type=_sweep, help="Bloch radii start:stop:step for the qubit curve")
    p.add_argument("--csv", help="write the sweep as CSV here")

    p = sub.add_parser("maxent", parents=[common], help="maximum-entropy inference")
    msub = p.add_subparsers(dest="maxent_cmd", required=True, parser_class=_Parser)
    for name in ("infer", "genuine"):
        q = msub.add_parser(name, parents=[common])
        q.add_argument("--iterations", type=int, default=300)
        q.add_argument("--restarts", type=int, default=4)
        q.add_argument("--domain", choices=("herm1", "positive"), default="herm1")
        if name == "infer":
            q.add_argument("--scenario", required=True)
            q.add_argument("--mode", choices=("direct", "mlp"), default="direct")
        else:
            q.add_argument("--pdo", required=True)
            q.add_argument("--k", type=int, default=1)
            q.add_argument("--norm", choices=("trace", "frobenius"), default="trace")
            q.add_argument("--check-unique", action="store_true", help="also search for a second maximizer")

    p = sub.add_parser("channel", parents=[common], help="pseudo-channel operations")
    csub = p.add_subparsers(dest="channel_cmd", required=True, parser_class=_Parser)
    q = csub.add_parser("apply", parents=[common])
    q.add_argument("--channel", required=True)
    q.add_argument("--pdo", required=True)
    q = csub.add_parser("choi", parents=[common])
    q.add_argument("--channel", required=True)
    q = csub.add_parser("marginal", parents=[common])
    q.add_argument("--channel", required=True)
    q.add_argument("--keep-in", type=int, nargs="+", required=True)
    q.add_argument("--keep-out", type=int, nargs="+", required=True)
    q = csub.add_parser("solve", parents=[common])
    q.add_argument("parts", nargs="+")

    p = sub.add_parser("classical", parents=[common], help="chordal classical marginal problem")
    p.add_argument("scenario")

    p = sub.add_parser("decompose", parents=[common], help="quasi-probabilistic product-state expansion")
    p.add_argument("pdo")

    p = sub.add_parser("purify", parents=[common], help="space-time purification")
    p.add_argument("pdo")

    p = sub.add_parser("lindblad", parents=[common], help="Lindblad evolution or steady state")
    p.add_argument("generator")
    p.add_argument("--pdo")
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=1e-2)
    p.add_argument("--steady", action="store_true")
    return parser


def _inputs(args):
    names = ("circuit", "scenario", "pdo", "channel", "generator", "constraints", "parts")
    found = []
    for n in names:
        v = getattr(args, n, None)
        if v:
            found.extend(v if isinstance(v, list) else [v])
    return found


def _emit(obj, cfg, stdout):
    text = jsonio.dumps(obj)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def _status(exc):
    if isinstance(exc, IncompatibleError):
        return EXIT_INCOMPATIBLE
    if isinstance(exc, (NotFoundError, NotChordalError, NoMarginalChannelError, NoSteadyStateError)):
        return EXIT_NOT_FOUND
    if isinstance(exc, (NumericalError, np.linalg.LinAlgError, FloatingPointError)):
        return EXIT_NUMERIC
    if isinstance(exc, (UsageError, ValueError, KeyError, TypeError, OSError)):
        return EXIT_USAGE
    return None


def main(argv=None, stdout=None, stderr=None):
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    cfg = None
    try:
        args = build_parser().parse_args(argv)
        cfg = RunConfig(args.command, _inputs(args), args.out, args.seed, args.tol, args.quiet)
        obj = COMMANDS[args.command](cfg, args)
    except _Exit as exc:
        if exc.payload is not None:
            _emit(exc.payload, cfg, stdout)
        if not cfg.quiet:
            print(f"pdolab: {exc}", file=stderr)
        return exc.code
    except Exception as exc:
        code = _status(exc)
        if code is None:
            raise
        print(f"pdolab: error: {exc}", file=stderr)
        return code
    _emit(obj, cfg, stdout)
    if not cfg.quiet and cfg.out:
        print(f"pdolab: wrote {cfg.out}", file=stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
