"""Command line interface: ``grc classify|analyze|preconditions|adiabatic``.

Exit codes: 0 non-entropy-ejecting (or plain success), 1 entropy-ejecting or
dissipative, 2 usage, parse or simulation error, 3 internal size or
enumeration cap exceeded.
"""
from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from typing import Any

from . import adiabatic as adia
from .circuit import analyze
from .dsl import Model, ModelError, parse_model
from .errors import (
    EnumerationCapError,
    GRCError,
    NondeterministicOperationError,
    SimulationError,
    SpaceTooLargeError,
)
from .opcore import (
    construct_precondition,
    count_maximal_preconditions,
    default_enum_limit,
    heat_dissipation,
    is_deterministic,
    is_unconditionally_reversible,
    iter_maximal_preconditions,
    transition_relation,
)
from .physical import to_bits

EXIT_OK, EXIT_EJECTING, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3

#: Total ejection (nats) at or below which a run counts as non-entropy-ejecting.
EJECTION_TOL = 1e-9


class _Exit(Exception):
    def __init__(self, code: int, message: str = ""):
        super().__init__(message)
        self.code = code
        self.message = message


def _num(x: float) -> str:
    return f"{x + 0.0:.6g}"


def _emit_json(obj: Any) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def _load(path: str) -> Model:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise _Exit(EXIT_USAGE, f"{path}: {exc}") from None
    try:
        return parse_model(text)
    except ModelError as exc:
        raise _Exit(EXIT_USAGE, "\n".join(d.format(path) for d in exc.diagnostics)) from None


def _pick(what: str, names, chosen: str | None) -> str:
    names = list(names)
    if chosen is not None:
        if chosen not in names:
            raise _Exit(EXIT_USAGE, f"no {what} named {chosen!r} (have: {', '.join(names) or 'none'})")
        return chosen
    if len(names) != 1:
        raise _Exit(EXIT_USAGE, f"specify the {what} (have: {', '.join(names) or 'none'})")
    return names[0]


def _labels(space, members) -> list[str]:
    return [space.label(i) for i in sorted(members)]


# ---------------------------------------------------------------- commands

def cmd_classify(args) -> int:
    model = _load(args.file)
    name = _pick("operation", [*model.gates, *model.ops], args.op)
    op = model.operation(name)
    space = model.space
    det = is_deterministic(op)
    if det:
        pre = construct_precondition(op)
        canonical: list[str] | None = _labels(space, pre.members)
        reachable = len(pre)
    else:
        canonical = None
        reachable = len({j for _, j in transition_relation(op)})
    report = {
        "deterministic": det,
        "unconditionally_reversible": is_unconditionally_reversible(op),
        "canonical_precondition": canonical,
        "reachable_final_count": reachable,
    }
    if args.json:
        _emit_json(report)
        return EXIT_OK
    yes = {True: "yes", False: "no"}
    print(f"operation: {name}")
    print(f"deterministic: {yes[det]}")
    print(f"unconditionally reversible: {yes[report['unconditionally_reversible']]}")
    print(f"reachable final states (K): {reachable}")
    if canonical is not None:
        print(f"canonical precondition: {{{', '.join(canonical)}}}")
    if name in model.gates:
        assumed = model.gate(name).assumed
        print(f"declared precondition: {{{', '.join(_labels(space, assumed.members))}}}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    model = _load(args.file)
    cname = _pick("circuit", model.circuits, args.circuit)
    dname = _pick("distribution", model.distributions, args.dist)
    report = analyze(model.circuit(cname), model.distribution(dname))
    cumulative = 0.0
    rows = []
    for g in report.gates:
        cumulative += g.delta_s_nats
        rows.append(
            {
                "index": g.index,
                "gate": g.name,
                "precondition_probability": g.precondition_probability,
                "precondition_satisfied": g.satisfied,
                "delta_s_nc_nats": g.delta_s_nats,
                "delta_s_nc_bits": g.delta_s_bits,
                "cumulative_nats": cumulative,
                "cumulative_bits": to_bits(cumulative),
            }
        )
    total = report.total_nats
    ejecting = total > EJECTION_TOL
    out: dict[str, Any] = {
        "circuit": cname,
        "distribution": dname,
        "gates": rows,
        "total_nats": total,
        "total_bits": report.total_bits,
        "entropy_ejecting": ejecting,
    }
    if args.temperature is not None:
        if args.temperature <= 0:
            raise _Exit(EXIT_USAGE, "temperature must be positive")
        out["temperature_kelvin"] = args.temperature
        out["heat_joules"] = heat_dissipation(total, args.temperature)
    if args.json:
        _emit_json(out)
    else:
        print(f"circuit {cname} under distribution {dname}")
        header = ("#", "gate", "P(pre)", "sat", "dS_nc[bit]", "dS_nc[nat]", "cum[bit]")
        print("  ".join(f"{h:>10}" for h in header))
        for r in rows:
            cells = (
                str(r["index"]),
                r["gate"],
                _num(r["precondition_probability"]),
                "yes" if r["precondition_satisfied"] else "NO",
                _num(r["delta_s_nc_bits"]),
                _num(r["delta_s_nc_nats"]),
                _num(r["cumulative_bits"]),
            )
            print("  ".join(f"{c:>10}" for c in cells))
        print(f"total dS_nc: {_num(report.total_bits)} bit ({_num(total)} nat)")
        if "heat_joules" in out:
            print(f"heat at {_num(args.temperature)} K: {_num(out['heat_joules'])} J")
        print("verdict: " + ("entropy-ejecting" if ejecting else "non-entropy-ejecting"))
    return EXIT_EJECTING if ejecting else EXIT_OK


def cmd_preconditions(args) -> int:
    model = _load(args.file)
    name = _pick("operation", [*model.gates, *model.ops], args.op)
    op = model.operation(name)
    space = model.space
    try:
        total = count_maximal_preconditions(op)
    except NondeterministicOperationError:
        raise _Exit(EXIT_USAGE, f"{name}: preconditions are defined for deterministic operations only")
    cap = default_enum_limit()
    listed = None
    if total <= cap:
        chosen = itertools.islice(iter_maximal_preconditions(op), args.limit)
        listed = [_labels(space, p.members) for p in chosen]
    if args.json:
        _emit_json({"operation": name, "total_count": total, "limit": args.limit, "preconditions": listed})
    else:
        print(f"operation {name}: {total} maximal precondition(s)")
        if listed is None:
            print(f"count exceeds the enumeration cap {cap}; not listed")
        else:
            for k, labels in enumerate(listed):
                print(f"  {k}: {{{', '.join(labels)}}}")
            if total > len(listed):
                print(f"  ... {total - len(listed)} more")
    return EXIT_CAP if listed is None else EXIT_OK


def _parse_inputs(text: str, names) -> dict[str, int]:
    values: dict[str, int] = {}
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        key, sep, val = part.partition("=")
        if not sep or key not in names or val not in ("0", "1"):
            raise _Exit(EXIT_USAGE, f"bad input {part!r}; expected NAME=0|1 with NAME in {', '.join(names)}")
        values[key] = int(val)
    missing = [n for n in names if n not in values]
    if missing:
        raise _Exit(EXIT_USAGE, f"missing input value(s) for {', '.join(missing)}")
    return values


def _case_json(inputs: dict[str, int], r: adia.SimResult) -> dict[str, Any]:
    return {
        "inputs": inputs,
        "final_values": dict(r.final_values),
        "dissipative_events": r.dissipative_event_count,
        "rail_pair_events": r.signal_event_count,
    }


def cmd_adiabatic(args) -> int:
    if args.target == "fig7" and not os.path.exists(args.target):
        net, schedule = adia.fig7_model()
    else:
        model = _load(args.target)
        sname = _pick("schedule", model.schedules, args.schedule)
        net, schedule = model.switch(sname)
    io = adia.default_io(net, schedule)
    if not io:
        raise _Exit(EXIT_USAGE, "schedule has no input signals")
    try:
        extraction = adia.extract_operation(net, schedule, io, io)
        single = None
        if args.input and not args.all_inputs:
            inputs = _parse_inputs(args.input, io)
            single = (inputs, adia.simulate(net, schedule, inputs))
    except SimulationError as exc:
        raise _Exit(EXIT_USAGE, f"simulation error[{exc.code}]: {exc}") from None
    space = extraction.initial
    table = [
        {"from": space.label(i), "to": extraction.op.final.label(int(j))}
        for i, j in enumerate(extraction.op.targets)
    ]
    precondition = _labels(space, extraction.precondition)
    cases = [
        (dict(zip(io, values)), r) for values, r in zip(space.assignments(), extraction.results)
    ]

    if args.json:
        out: dict[str, Any] = {"signals": list(io)}
        if single is not None:
            inputs, r = single
            out["run"] = _case_json(inputs, r)
            out["run"]["final_levels"] = dict(r.final_levels)
            out["run"]["trace"] = [
                {"step": e.step, "node": e.node, "cause": e.cause, "before": e.before, "after": e.after}
                for e in r.trace
            ]
        else:
            out["cases"] = [_case_json(i, r) for i, r in cases]
        out["operation"] = table
        out["precondition"] = precondition
        _emit_json(out)
    else:
        if single is not None:
            inputs, r = single
            print("inputs: " + " ".join(f"{k}={v}" for k, v in inputs.items()))
            print("final levels: " + " ".join(f"{n}={'H' if v else 'L'}" for n, v in r.final_levels))
            print("final values: " + " ".join(f"{k}={v}" for k, v in r.final_values))
            print(f"dissipative events: {r.dissipative_event_count} node(s), {r.signal_event_count} rail pair(s)")
            if args.trace:
                sys.stdout.write(adia.trace_to_jsonl(r))
        else:
            for inputs, r in cases:
                label = " ".join(f"{k}={v}" for k, v in inputs.items())
                finals = " ".join(f"{k}={v}" for k, v in r.final_values)
                print(f"{label}: {finals}  dissipative events: {r.dissipative_event_count}")
        print("extracted operation:")
        for row in table:
            print(f"  {row['from']} -> {row['to']}")
        print(f"precondition (dissipation-free inputs): {{{', '.join(precondition)}}}")
    if single is not None and single[1].dissipative_event_count:
        return EXIT_EJECTING
    return EXIT_OK


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="grc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="determinism, reversibility and canonical precondition")
    p.add_argument("file")
    p.add_argument("--op", help="gate or operation name")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("analyze", help="per-gate Landauer analysis of a circuit")
    p.add_argument("file")
    p.add_argument("--circuit")
    p.add_argument("--dist", help="input distribution name")
    p.add_argument("--temperature", type=float, help="kelvin; adds the dissipated heat")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("preconditions", help="enumerate maximal preconditions for reversibility")
    p.add_argument("file")
    p.add_argument("--op", help="gate or operation name")
    p.add_argument("--limit", type=int, default=100, help="how many to list")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_preconditions)

    p = sub.add_parser("adiabatic", help="switch-level simulation of a dual-rail circuit")
    p.add_argument("target", help="model file, or 'fig7' for the built-in copy circuit")
    p.add_argument("--schedule")
    p.add_argument("--input", help="input values, e.g. A=1,B=0")
    p.add_argument("--all-inputs", action="store_true", help="sweep every input assignment")
    p.add_argument("--trace", action="store_true", help="print the event trace as JSON lines")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_adiabatic)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Exit as exc:
        if exc.message:
            print(exc.message, file=sys.stderr)
        return exc.code
    except (SpaceTooLargeError, EnumerationCapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except GRCError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
