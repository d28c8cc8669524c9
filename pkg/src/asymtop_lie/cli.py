"""Command line: spectrum | drives | closure | prove | graph.

Every command writes one JSON document (``"schema": 1``) to stdout or to
``--json PATH``; ``prove`` and ``graph`` also write DOT. Options can come from
a flat ``key = value`` config file (``--config``); command-line flags win.
Exit status is 0 iff the requested check passed, 1 if it ran and failed, 2 on
invalid input.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from ._validation import check_j, check_polarizations, polarization_condition

SCHEMA = 1

DEFAULTS = {
    "A": 1.0,
    "B": 0.6,
    "C": 0.2,
    "dipole": "1,1,1",
    "tolerance": 1e-9,
    "polarizations": "x,y,y,z",
    "energies": None,
    "j": 1,
    "j_max": 1,
    "max_pairs": None,
    "source": "auto",
    "stage": "step6",
    "threads": None,
    "label": None,
}

_TYPES = {
    "A": float,
    "B": float,
    "C": float,
    "tolerance": float,
    "j": int,
    "j_max": int,
    "max_pairs": int,
    "threads": int,
}


class ConfigError(ValueError):
    pass


def read_config(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment; dashes in keys are
    read as underscores."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def _resolve(args) -> dict:
    cfg = read_config(args.config) if args.config else {}
    opts = {}
    for key, default in DEFAULTS.items():
        val = getattr(args, key, None)
        if val is None:
            val = cfg.get(key, default)
        if val is not None and key in _TYPES:
            try:
                val = _TYPES[key](val)
            except (TypeError, ValueError):
                raise ConfigError(f"option {key} must be {_TYPES[key].__name__}, got {val!r}") from None
        opts[key] = val
    return opts


def _floats(text: str, count: int, name: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in str(text).split(","))
    except ValueError:
        raise ConfigError(f"{name} must be {count} comma-separated numbers, got {text!r}") from None
    if len(vals) != count:
        raise ConfigError(f"{name} must have {count} entries, got {len(vals)}")
    return vals


def _constants(opts):
    from .rotor import RotationalConstants

    return RotationalConstants(opts["A"], opts["B"], opts["C"])


def _drift(opts):
    from .oplib import DriftSpec

    if opts["energies"] is None:
        return DriftSpec.default()
    return DriftSpec.from_floats(*_floats(opts["energies"], 3, "energies"))


def _emit(doc: dict, path=None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _round(x: float, digits: int = 12) -> float:
    return float(f"{x:.{digits}g}")


def cmd_spectrum(opts, args) -> tuple[dict, bool]:
    from .rotor import diagonalize

    from .rotor import RotationalConstants

    # the symmetric-top limits are allowed here, nowhere else
    c = RotationalConstants.limit(opts["A"], opts["B"], opts["C"])
    j_max = check_j(opts["j_max"])
    levels = []
    for J in range(j_max + 1):
        dec = diagonalize(J, c)
        for tau in range(-J, J + 1):
            levels.append(
                {
                    "J": J,
                    "tau": tau,
                    "energy": _round(dec.energy(tau)),
                    "coefficients": [_round(v) + 0.0 for v in dec.vector(tau)],
                }
            )
    return {"constants": {"A": c.A, "B": c.B, "C": c.C}, "levels": levels}, True


def cmd_drives(opts, args) -> tuple[dict, bool]:
    from .drives import physical_consistency, structural_drive
    from .oplib import Subsystem

    J = check_j(opts["j"])
    sub = Subsystem(J)
    drift = _drift(opts)
    labels = [opts["label"]] if opts["label"] else ["w1x", "w1y", "w2y", "w2z", "sigmaPlus", "sigmaMinus"]
    out, ok = [], True
    for label in labels:
        d = structural_drive(label, J, drift)
        entry = {
            "label": label,
            "terms": [{"element": sub.label(e), "coefficient": str(c)} for e, c in d.op.sorted_items()],
        }
        if args.physical and label in ("w1x", "w1y", "w2y", "w2z"):
            r = physical_consistency(label, J, _constants(opts))
            good = r["max_relative_deviation"] < 1e-9
            ok = ok and good
            k = r["factor"]
            entry["physical"] = {
                "factor": None if k is None else [_round(k.real, 9) + 0.0, _round(k.imag, 9) + 0.0],
                "proportional": good,
            }
        out.append(entry)
    return {"j": J, "n": sub.n, "drives": out}, ok


def cmd_closure(opts, args) -> tuple[dict, bool]:
    from threadpoolctl import threadpool_limits

    from .closure import full_rank_check
    from .rotor import find_subsystem

    J = check_j(opts["j"])
    pols = check_polarizations(opts["polarizations"])
    constants = _constants(opts)
    dipole = _floats(opts["dipole"], 3, "dipole")
    spec = None
    if opts["source"] == "physical" or (opts["source"] == "auto" and pols != ("x", "y", "y", "z")):
        spec = find_subsystem(J, constants, dipole)
    with threadpool_limits(limits=opts["threads"]):
        ok, rep = full_rank_check(
            J,
            _drift(opts),
            pols,
            opts["tolerance"],
            spec=spec,
            constants=constants,
            source=opts["source"],
            max_pairs=opts["max_pairs"],
        )
    doc = rep.to_dict()
    if not args.timing:
        doc["elapsed"] = None
    doc.update(
        {
            "j": J,
            "polarizations": list(pols),
            "admissible": polarization_condition(pols),
            "zero_drives": getattr(rep, "zero_drives", []),
            "pass": ok,
        }
    )
    if spec is not None:
        doc["subsystem"] = {"tau": spec.tau, "tauP": spec.tauP, "tauPP": spec.tauPP}
    return doc, ok


def _proof(opts):
    from .proof import verify_proof

    return verify_proof(check_j(opts["j"]), _drift(opts))


def cmd_prove(opts, args) -> tuple[dict, bool]:
    from .proof import TransitionGraph, export_graph

    rep = _proof(opts)
    if args.dot_dir:
        d = Path(args.dot_dir)
        d.mkdir(parents=True, exist_ok=True)
        graph = TransitionGraph.from_isolated(rep.isolated)
        for s in rep.steps:
            (d / f"proof_J{rep.j}_{s.tag}.dot").write_text(export_graph(graph, s.tag), encoding="utf-8")
    return rep.to_dict(), rep.passed


def cmd_graph(opts, args) -> tuple[dict, bool]:
    from .proof import TransitionGraph, export_graph

    rep = _proof(opts)
    graph = TransitionGraph.from_isolated(rep.isolated, opts["stage"])
    dot = export_graph(graph, opts["stage"])
    if args.out:
        Path(args.out).write_text(dot, encoding="utf-8")
    elif not args.json:
        sys.stdout.write(dot)
    comps = graph.components()
    doc = {
        "j": rep.j,
        "stage": opts["stage"],
        "vertices": rep.n,
        "edges": len(graph.edges),
        "components": len(comps),
        "connected": len(comps) == 1,
        "proof_pass": rep.passed,
    }
    return doc, True


COMMANDS = {
    "spectrum": cmd_spectrum,
    "drives": cmd_drives,
    "closure": cmd_closure,
    "prove": cmd_prove,
    "graph": cmd_graph,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file")
    common.add_argument("--json", help="write the JSON report here instead of stdout")
    common.add_argument("--A", type=float, dest="A")
    common.add_argument("--B", type=float, dest="B")
    common.add_argument("--C", type=float, dest="C")
    common.add_argument("--dipole", help="mu_a,mu_b,mu_c (default 1,1,1)")
    common.add_argument("--energies", help="E_tau,E_tau',E_tau'' for the drift (default 0,1,sqrt 2)")

    p = argparse.ArgumentParser(prog="asymtop-lie", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sp = p.add_subparsers(dest="command", required=True)

    s = sp.add_parser("spectrum", parents=[common], help="asymmetric-top levels and eigenvectors")
    s.add_argument("--j-max", type=int, dest="j_max")

    s = sp.add_parser("drives", parents=[common], help="structural drive operators")
    s.add_argument("--j", type=int)
    s.add_argument("--label", choices=["w1x", "w1y", "w2y", "w2z", "sigmaPlus", "sigmaMinus"])
    s.add_argument("--physical", action="store_true", help="check proportionality to the dipole drives")

    s = sp.add_parser("closure", parents=[common], help="numerical Lie closure dimension")
    s.add_argument("--j", type=int)
    s.add_argument("--polarizations", help="p1,p2,p3,p4 (default x,y,y,z)")
    s.add_argument("--tolerance", type=float)
    s.add_argument("--max-pairs", type=int, dest="max_pairs", help="commutator budget")
    s.add_argument("--source", choices=["auto", "structural", "physical"])
    s.add_argument("--threads", type=int, help="cap BLAS threads")
    s.add_argument("--timing", action="store_true", help="report wall time (breaks byte-identical output)")

    s = sp.add_parser("prove", parents=[common], help="exact six-step replay")
    s.add_argument("--j", type=int)
    s.add_argument("--dot-dir", dest="dot_dir", help="write one DOT file per step here")

    s = sp.add_parser("graph", parents=[common], help="transition graph as DOT")
    s.add_argument("--j", type=int)
    s.add_argument("--stage", choices=["step1", "step2", "step3", "step4", "step5", "step6"])
    s.add_argument("--out", help="DOT output path (default stdout)")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    head = {"schema": SCHEMA, "command": args.command}
    try:
        opts = _resolve(args)
        doc, ok = COMMANDS[args.command](opts, args)
    except (ConfigError, ValueError, LookupError, TypeError) as exc:
        _emit({**head, "pass": False, "error": str(exc)}, getattr(args, "json", None))
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.command == "graph" and not args.out and not args.json:
        # stdout carries the DOT text
        sys.stderr.write(json.dumps({**head, **doc}, sort_keys=True, ensure_ascii=False) + "\n")
    else:
        _emit({**head, **doc}, args.json)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
