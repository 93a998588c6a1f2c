"""Text format for models: variables, distributions, gates, circuits and switch nets.

Example::

    var x arity 2
    var y arity 2
    dist start { x=0 y=0: 1/2, x=1 y=0: 1/2 }
    gate copy = rCOPY(x, y | y=0)
    circuit c { copy }

:func:`parse_model` either returns a :class:`Model` or raises
:class:`ModelError` carrying a non-empty list of :class:`Diagnostic`.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .adiabatic import (
    INPUT,
    DualRailSignal,
    NodeKind,
    RampSignal,
    Schedule,
    SetInitial,
    SwitchNet,
    TransmissionGate,
)
from .circuit import Circuit
from .errors import GateSpecError, GRCError
from .gates import (
    FactorizedSpace,
    GateKind,
    GateSpec,
    TruthTable,
    VariableDecl,
    build_gate,
    check_spec,
    lift_to_space,
)
from .opcore import ConditionedOperation, Distribution, Operation

# Diagnostic codes.
E_SYNTAX = "E001"
E_UNKNOWN_KIND = "E002"
E_UNRESOLVED = "E003"
E_ARITY = "E004"
E_PROB_SUM = "E005"
E_DUPLICATE = "E006"
E_RANGE = "E007"
E_PRECONDITION = "E008"
E_TRUTH_TABLE = "E009"
E_OP_ROWS = "E010"
E_SWITCH = "E011"

TOP_KEYWORDS = {"var", "dist", "gate", "op", "circuit", "net", "schedule"}
KINDS = {k.value: k for k in GateKind if k is not GateKind.RCOPY_PRIME}

# Exact tolerance for a distribution or row to count as summing to 1.
SUM_TOLERANCE = Fraction(1, 10**9)


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    line: int
    column: int
    message: str
    code: str

    def format(self, source: str = "<model>") -> str:
        return f"{source}:{self.line}:{self.column}: {self.severity}[{self.code}]: {self.message}"


class ModelError(GRCError):
    def __init__(self, diagnostics: list[Diagnostic]):
        super().__init__("; ".join(d.format() for d in diagnostics))
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class OpDef:
    """Stochastic operation on a subset of variables, listed row by row."""

    variables: tuple[str, ...]
    rows: tuple[tuple[tuple[int, ...], tuple[tuple[tuple[int, ...], Fraction], ...]], ...]


@dataclass(frozen=True)
class Model:
    variables: tuple[VariableDecl, ...] = ()
    distributions: dict = field(default_factory=dict)
    gates: dict = field(default_factory=dict)
    ops: dict = field(default_factory=dict)
    circuits: dict = field(default_factory=dict)
    nets: dict = field(default_factory=dict)
    schedules: dict = field(default_factory=dict)

    @property
    def space(self) -> FactorizedSpace:
        if not self.variables:
            raise GRCError("model declares no variables")
        return FactorizedSpace(self.variables)

    def distribution(self, name: str) -> Distribution:
        entries = self.distributions[name]
        total = sum(p for _, p in entries)
        space = self.space
        support: dict[int, float] = {}
        for values, p in entries:
            if p:
                support[space.index(values)] = float(p / total)
        return Distribution.from_support(space, support)

    def gate(self, name: str) -> ConditionedOperation:
        return build_gate(self.gates[name], self.space)

    def operation(self, name: str) -> Operation:
        if name in self.gates:
            return self.gate(name).op
        opdef = self.ops[name]
        sub = self.space.sub(opdef.variables)
        rows = []
        for _, entries in opdef.rows:
            acc: dict[int, float] = {}
            total = sum(p for _, p in entries)
            for values, p in entries:
                if p:
                    acc[sub.index(values)] = float(p / total)
            rows.append(acc)
        return lift_to_space(Operation.from_rows(sub, sub, rows), opdef.variables, self.space)

    def circuit(self, name: str) -> Circuit:
        refs = self.circuits[name]
        return Circuit(self.space, tuple(self.gate(g) for g in refs), tuple(refs))

    def switch(self, name: str) -> tuple[SwitchNet, Schedule]:
        net_name, schedule = self.schedules[name]
        return self.nets[net_name], schedule


# ---------------------------------------------------------------- tokens

_TOKEN_RE = re.compile(
    r"""
    (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<ws>[ \t\r\f\v]+)
  | (?P<arrow>->|→)
  | (?P<number>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)?)
  | (?P<punct>[{}()\[\]|,:=/])
    """,
    re.VERBOSE | re.ASCII,
)

_MAX_NUMBER_LEN = 40
_MAX_EXPONENT = 300


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int
    bol: bool


def tokenize(text: str, diagnostics: list[Diagnostic]) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos, bol = 1, 0, 0, True
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            diagnostics.append(
                Diagnostic("error", line, col, f"unexpected character {text[pos]!r}", E_SYNTAX)
            )
            pos += 1
            continue
        kind = m.lastgroup
        if kind == "number" and not _number_ok(m.group()):
            diagnostics.append(Diagnostic("error", line, col, f"number {m.group()[:20]!r} is out of range", E_RANGE))
            tokens.append(Token(kind, "0", line, col, bol))
            bol = False
            pos = m.end()
            continue
        if kind == "newline":
            line, line_start, bol = line + 1, m.end(), True
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, col, bol))
            bol = False
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1, True))
    return tokens


def _number_ok(text: str) -> bool:
    if len(text) > _MAX_NUMBER_LEN:
        return False
    mantissa, _, exponent = text.lower().partition("e")
    return not exponent or abs(int(exponent)) <= _MAX_EXPONENT


# ---------------------------------------------------------------- syntax

class _Abort(Exception):
    pass


@dataclass
class _Decl:
    keyword: str
    name: str
    tok: Token
    body: object


class _Parser:
    def __init__(self, tokens: list[Token], diagnostics: list[Diagnostic]):
        self.toks = tokens
        self.pos = 0
        self.diags = diagnostics

    # helpers
    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, tok: Token, message: str, code: str = E_SYNTAX) -> _Abort:
        self.diags.append(Diagnostic("error", tok.line, tok.column, message, code))
        return _Abort()

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind in ("punct", "arrow") and tok.text == text or (
            text == "->" and tok.kind == "arrow"
        )

    def expect(self, text: str) -> Token:
        if not self.at(text):
            tok = self.peek()
            raise self.error(tok, f"expected {text!r}, found {tok.text or 'end of input'!r}")
        return self.next()

    def ident(self, what: str = "identifier") -> Token:
        tok = self.peek()
        if tok.kind != "ident":
            raise self.error(tok, f"expected {what}, found {tok.text or 'end of input'!r}")
        return self.next()

    def keyword(self, word: str) -> Token:
        tok = self.peek()
        if tok.kind != "ident" or tok.text != word:
            raise self.error(tok, f"expected {word!r}, found {tok.text or 'end of input'!r}")
        return self.next()

    def integer(self, what: str = "integer") -> tuple[int, Token]:
        tok = self.peek()
        if tok.kind != "number" or not tok.text.isdigit():
            raise self.error(tok, f"expected {what}, found {tok.text or 'end of input'!r}")
        self.next()
        return int(tok.text), tok

    def probability(self) -> tuple[Fraction, Token]:
        tok = self.peek()
        if tok.kind != "number":
            raise self.error(tok, f"expected a probability, found {tok.text or 'end of input'!r}")
        self.next()
        value = Fraction(tok.text)
        if self.at("/"):
            self.next()
            den_tok = self.peek()
            if den_tok.kind != "number":
                raise self.error(den_tok, "expected a denominator")
            self.next()
            den = Fraction(den_tok.text)
            if den == 0:
                raise self.error(den_tok, "zero denominator", E_RANGE)
            value /= den
        return value, tok

    def assignment(self) -> list[tuple[Token, int]]:
        """One or more ``name=value`` pairs."""
        pairs = []
        while self.peek().kind == "ident" and self.peek(1).text == "=":
            name = self.next()
            self.next()
            value, _ = self.integer("a variable value")
            pairs.append((name, value))
        if not pairs:
            tok = self.peek()
            raise self.error(tok, f"expected an assignment like x=0, found {tok.text or 'end of input'!r}")
        return pairs

    def recover(self) -> None:
        self.next()
        while self.peek().kind != "eof":
            tok = self.peek()
            if tok.bol and tok.kind == "ident" and tok.text in TOP_KEYWORDS:
                return
            self.next()

    # statements
    def parse(self) -> list[_Decl]:
        decls = []
        while self.peek().kind != "eof":
            tok = self.peek()
            try:
                if tok.kind != "ident" or tok.text not in TOP_KEYWORDS:
                    raise self.error(tok, f"expected a declaration, found {tok.text!r}")
                decls.append(getattr(self, f"stmt_{tok.text}")())
            except _Abort:
                self.recover()
        return decls

    def stmt_var(self) -> _Decl:
        self.next()
        name = self.ident("variable name")
        self.keyword("arity")
        arity, atok = self.integer("arity")
        return _Decl("var", name.text, name, (arity, atok))

    def stmt_dist(self) -> _Decl:
        self.next()
        name = self.ident("distribution name")
        self.expect("{")
        entries = []
        while not self.at("}"):
            pairs = self.assignment()
            self.expect(":")
            prob, ptok = self.probability()
            entries.append((pairs, prob, ptok))
            if not self.at("}"):
                self.expect(",")
        self.expect("}")
        return _Decl("dist", name.text, name, entries)

    def stmt_gate(self) -> _Decl:
        self.next()
        name = self.ident("gate name")
        self.expect("=")
        kind = self.ident("gate kind")
        param = None
        if self.at("["):
            self.next()
            param = self.integer("gate parameter")
            self.expect("]")
        self.expect("(")
        operands = [self.ident("operand")]
        while self.at(","):
            self.next()
            operands.append(self.ident("operand"))
        precond = None
        if self.at("|"):
            bar = self.next()
            if self.peek().kind == "ident" and self.peek().text == "true":
                precond = ("true", self.next(), None)
            else:
                lhs = self.ident("precondition variable")
                self.expect("=")
                rhs = self.peek()
                if rhs.kind == "number":
                    value, _ = self.integer("value")
                    precond = ("value", lhs, value)
                elif rhs.kind == "ident":
                    self.next()
                    precond = ("name", lhs, rhs.text)
                else:
                    raise self.error(rhs, "expected a value or name in the precondition")
            precond = precond + (bar,)
        self.expect(")")
        table = None
        if self.at("["):
            open_tok = self.next()
            rows = []
            while not self.at("]"):
                key = self.peek()
                if key.kind != "number" or not key.text.isdigit():
                    raise self.error(key, "expected a truth-table input pattern like 01")
                self.next()
                self.expect("->")
                out, _ = self.integer("truth-table output")
                rows.append((key, out))
                if self.at(","):
                    self.next()
            self.expect("]")
            table = (open_tok, rows)
        return _Decl("gate", name.text, name, (kind, param, operands, precond, table))

    def stmt_op(self) -> _Decl:
        self.next()
        name = self.ident("operation name")
        self.expect("(")
        variables = [self.ident("variable")]
        while self.at(","):
            self.next()
            variables.append(self.ident("variable"))
        self.expect(")")
        self.expect("{")
        rows = []
        while not self.at("}"):
            start = self.peek()
            src = self.assignment()
            self.expect("->")
            dst = self.assignment()
            self.expect(":")
            prob, _ = self.probability()
            rows.append((start, src, dst, prob))
            if not self.at("}"):
                self.expect(",")
        self.expect("}")
        return _Decl("op", name.text, name, (variables, rows))

    def stmt_circuit(self) -> _Decl:
        self.next()
        name = self.ident("circuit name")
        self.expect("{")
        refs = []
        while not self.at("}"):
            refs.append(self.ident("gate name"))
            if self.at(","):
                self.next()
        self.expect("}")
        return _Decl("circuit", name.text, name, refs)

    def stmt_net(self) -> _Decl:
        self.next()
        name = self.ident("net name")
        self.expect("{")
        signals, gates = [], []
        while not self.at("}"):
            word = self.ident("'driven', 'storage' or 'tgate'")
            if word.text in ("driven", "storage"):
                kind = NodeKind(word.text)
                signals.append((self.ident("signal name"), kind))
                while self.peek().kind == "ident" and self.peek().text not in ("driven", "storage", "tgate"):
                    signals.append((self.next(), kind))
            elif word.text == "tgate":
                control = self.ident("control signal")
                self.expect(":")
                a = self.ident("node")
                b = self.ident("node")
                gates.append((control, a, b))
            else:
                raise self.error(word, f"unknown net item {word.text!r}")
        self.expect("}")
        return _Decl("net", name.text, name, (signals, gates))

    def stmt_schedule(self) -> _Decl:
        self.next()
        name = self.ident("schedule name")
        self.keyword("for")
        net = self.ident("net name")
        self.expect("{")
        steps = []
        while not self.at("}"):
            word = self.ident("'init' or 'ramp'")
            if word.text == "init":
                for sig, value in self.assignment():
                    steps.append(("init", word, sig, value))
            elif word.text == "ramp":
                sig = self.ident("signal")
                start = None
                if self.peek().kind == "number":
                    start, _ = self.integer("ramp start value")
                self.expect("->")
                tok = self.peek()
                if tok.kind == "ident" and tok.text == INPUT:
                    self.next()
                    target: int | str = INPUT
                else:
                    target, _ = self.integer("ramp target")
                steps.append(("ramp", word, sig, (start, target)))
            else:
                raise self.error(word, f"unknown schedule item {word.text!r}")
        self.expect("}")
        return _Decl("schedule", name.text, name, (net, steps))


# ---------------------------------------------------------------- semantics

_PARAM_KINDS = {GateKind.RSETI, GateKind.RUNCOPY, GateKind.RUNFUNC}


class _Checker:
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diags = diagnostics

    def error(self, tok: Token, message: str, code: str) -> None:
        self.diags.append(Diagnostic("error", tok.line, tok.column, message, code))

    def run(self, decls: list[_Decl]) -> Model:
        variables: list[VariableDecl] = []
        seen: dict[str, set[str]] = {
            "var": set(), "dist": set(), "gate": set(), "circuit": set(), "net": set(), "schedule": set()
        }
        for d in decls:
            category = "gate" if d.keyword == "op" else d.keyword
            if d.name in seen[category]:
                self.error(d.tok, f"duplicate {category} name {d.name!r}", E_DUPLICATE)
                d.keyword = "skip"
            else:
                seen[category].add(d.name)
        for d in decls:
            if d.keyword == "var":
                arity, atok = d.body
                if "." in d.name:
                    self.error(d.tok, "variable names cannot contain '.'", E_SYNTAX)
                    continue
                if arity < 2:
                    self.error(atok, f"variable {d.name} needs arity >= 2", E_RANGE)
                    continue
                variables.append(VariableDecl(d.name, arity))
        self.vars = {v.name: v.arity for v in variables}
        self.space = FactorizedSpace(tuple(variables)) if variables else None
        model = Model(variables=tuple(variables))
        for d in decls:
            if d.keyword == "dist":
                self.check_dist(d, model)
            elif d.keyword == "gate":
                self.check_gate(d, model)
            elif d.keyword == "op":
                self.check_op(d, model)
        for d in decls:
            if d.keyword == "circuit":
                self.check_circuit(d, model)
            elif d.keyword == "net":
                self.check_net(d, model)
        for d in decls:
            if d.keyword == "schedule":
                self.check_schedule(d, model)
        return model

    def full_assignment(self, pairs, anchor: Token, names=None) -> tuple[int, ...] | None:
        names = list(self.vars) if names is None else names
        values: dict[str, int] = {}
        ok = True
        for tok, value in pairs:
            if tok.text not in self.vars:
                self.error(tok, f"unknown variable {tok.text!r}", E_UNRESOLVED)
                ok = False
            elif tok.text not in names:
                self.error(tok, f"variable {tok.text!r} is not an operand here", E_UNRESOLVED)
                ok = False
            elif tok.text in values:
                self.error(tok, f"variable {tok.text!r} assigned twice", E_DUPLICATE)
                ok = False
            elif not 0 <= value < self.vars[tok.text]:
                self.error(tok, f"value {value} out of range for {tok.text} (arity {self.vars[tok.text]})", E_RANGE)
                ok = False
            else:
                values[tok.text] = value
        if ok and set(values) != set(names):
            missing = [n for n in names if n not in values]
            self.error(anchor, f"assignment does not give {', '.join(missing)}", E_ARITY)
            ok = False
        return tuple(values[n] for n in names) if ok else None

    def check_dist(self, d: _Decl, model: Model) -> None:
        entries, ok, seen = [], True, set()
        for pairs, prob, ptok in d.body:
            values = self.full_assignment(pairs, pairs[0][0])
            if values is None:
                ok = False
                continue
            if values in seen:
                self.error(pairs[0][0], "state listed twice", E_DUPLICATE)
                ok = False
            if prob > 1:
                self.error(ptok, f"probability {_fmt_prob(prob)} exceeds 1", E_RANGE)
                ok = False
            seen.add(values)
            entries.append((values, prob))
        if not ok:
            return
        total = sum((p for _, p in entries), Fraction(0))
        if abs(total - 1) > SUM_TOLERANCE:
            self.error(d.tok, f"probabilities sum to {float(total):.12g}", E_PROB_SUM)
            return
        model.distributions[d.name] = tuple(sorted(entries))

    def check_gate(self, d: _Decl, model: Model) -> None:
        kind_tok, param, operands, precond, table = d.body
        kind = KINDS.get(kind_tok.text)
        if kind is None:
            self.error(kind_tok, f"unknown gate kind {kind_tok.text!r}", E_UNKNOWN_KIND)
            return
        names = []
        for tok in operands:
            if tok.text not in self.vars:
                self.error(tok, f"unknown variable {tok.text!r}", E_UNRESOLVED)
                return
            names.append(tok.text)
        if param is not None and kind not in _PARAM_KINDS:
            self.error(param[1], f"{kind.value} takes no [parameter]", E_SYNTAX)
            return
        if kind in (GateKind.RFUNC, GateKind.RUNFUNC) and table is None:
            self.error(kind_tok, f"{kind.value} needs a truth table", E_TRUTH_TABLE)
            return
        if table is not None and kind not in (GateKind.RFUNC, GateKind.RUNFUNC):
            self.error(table[0], f"{kind.value} takes no truth table", E_SYNTAX)
            return
        params = self.gate_params(kind, names, param, precond, kind_tok)
        if params is None:
            return
        if table is not None:
            tt = self.truth_table(names, table)
            if tt is None:
                return
            params["table"] = tt
        spec = GateSpec(kind, tuple(names), **params)
        try:
            check_spec(spec, self.space)
        except GateSpecError as exc:
            code = E_RANGE if "out of range" in str(exc) else E_ARITY
            self.error(kind_tok, str(exc), code)
            return
        model.gates[d.name] = spec

    def gate_params(self, kind, names, param, precond, anchor) -> dict | None:
        """Parameters implied by the bracket value and the written precondition."""
        pvalue = None if param is None else param[0]
        target = names[-1] if names else None
        if precond is not None:
            form, lhs, rhs, bar = precond
            where = lhs
        else:
            form = lhs = rhs = None
            where = anchor

        def mismatch(expected: str) -> None:
            self.error(where, f"{kind.value} expects precondition {expected}", E_PRECONDITION)

        if kind in (GateKind.CNOT, GateKind.CCNOT):
            if form not in (None, "true"):
                mismatch("'true' (unconditional)")
                return None
            return {}
        if kind in (GateKind.RSET, GateKind.RCLR):
            need = 0 if kind is GateKind.RSET else 1
            if form is not None and (form != "value" or lhs.text != target or rhs != need):
                mismatch(f"{target}={need}")
                return None
            return {}
        if kind is GateKind.RSETI:
            if pvalue is None:
                self.error(anchor, "rSETi needs the value to set, e.g. rSETi[2](x | x=0)", E_SYNTAX)
                return None
            if form != "value" or lhs.text != target:
                mismatch(f"{target}=<j>")
                return None
            return {"i": pvalue, "j": rhs}
        if kind in (GateKind.RCOPY, GateKind.RFUNC):
            if form is None:
                return {"v": 0}
            if form != "value" or lhs.text != target:
                mismatch(f"{target}=<v>")
                return None
            return {"v": rhs}
        if kind is GateKind.RUNCOPY:
            if form is not None and (form != "name" or lhs.text != target or rhs != names[0]):
                mismatch(f"{target}={names[0]}")
                return None
            return {"v": pvalue or 0}
        if kind is GateKind.RUNFUNC:
            if form is not None and (form != "name" or lhs.text != target or rhs != "F"):
                mismatch(f"{target}=F")
                return None
            return {"v": pvalue or 0}
        return {}

    def truth_table(self, names: list[str], table) -> TruthTable | None:
        open_tok, rows = table
        inputs = names[:-1]
        arities = [self.vars[n] for n in inputs]
        out_arity = self.vars[names[-1]]
        mapping: dict[tuple[int, ...], int] = {}
        for key, out in rows:
            digits = tuple(int(c) for c in key.text)
            if len(digits) != len(inputs) or any(v >= a for v, a in zip(digits, arities)):
                self.error(key, f"pattern {key.text!r} does not match inputs {', '.join(inputs)}", E_TRUTH_TABLE)
                return None
            if digits in mapping:
                self.error(key, f"pattern {key.text!r} listed twice", E_TRUTH_TABLE)
                return None
            if not 0 <= out < out_arity:
                self.error(key, f"output {out} out of range for {names[-1]}", E_TRUTH_TABLE)
                return None
            mapping[digits] = out
        if any(a > 10 for a in arities) or len(mapping) != math.prod(arities):
            self.error(open_tok, "truth table must list every input pattern exactly once", E_TRUTH_TABLE)
            return None
        return TruthTable.from_mapping(inputs, mapping, arities, out_arity)

    def check_op(self, d: _Decl, model: Model) -> None:
        var_toks, rows = d.body
        names = []
        for tok in var_toks:
            if tok.text not in self.vars:
                self.error(tok, f"unknown variable {tok.text!r}", E_UNRESOLVED)
                return
            if tok.text in names:
                self.error(tok, f"variable {tok.text!r} listed twice", E_DUPLICATE)
                return
            names.append(tok.text)
        table: dict[tuple[int, ...], dict[tuple[int, ...], Fraction]] = {}
        for start, src, dst, prob in rows:
            a = self.full_assignment(src, start, names)
            b = self.full_assignment(dst, start, names)
            if a is None or b is None:
                return
            if prob > 1:
                self.error(start, "transition probability exceeds 1", E_RANGE)
                return
            row = table.setdefault(a, {})
            if b in row:
                self.error(start, "transition listed twice", E_DUPLICATE)
                return
            row[b] = prob
        expected = math.prod(self.vars[n] for n in names)
        if len(table) != expected:
            self.error(d.tok, f"operation lists {len(table)} of {expected} initial states", E_OP_ROWS)
            return
        for a, row in table.items():
            total = sum(row.values(), Fraction(0))
            if abs(total - 1) > SUM_TOLERANCE:
                self.error(d.tok, f"row {_fmt_assign(names, a)} sums to {float(total):.12g}", E_OP_ROWS)
                return
        model.ops[d.name] = OpDef(
            tuple(names),
            tuple((a, tuple(sorted(table[a].items()))) for a in sorted(table)),
        )

    def check_circuit(self, d: _Decl, model: Model) -> None:
        for tok in d.body:
            if tok.text not in model.gates:
                what = "is an operation, not a gate" if tok.text in model.ops else "is not a defined gate"
                self.error(tok, f"{tok.text!r} {what}", E_UNRESOLVED)
                return
        model.circuits[d.name] = tuple(t.text for t in d.body)

    def check_net(self, d: _Decl, model: Model) -> None:
        signal_toks, gate_toks = d.body
        signals, names = [], set()
        for tok, kind in signal_toks:
            if "." in tok.text:
                self.error(tok, "signal names cannot contain '.'", E_SYNTAX)
                return
            if tok.text in names:
                self.error(tok, f"duplicate signal {tok.text!r}", E_DUPLICATE)
                return
            names.add(tok.text)
            signals.append(DualRailSignal(tok.text, kind))
        nodes = {n.id for s in signals for n in (s.pos, s.neg)}
        gates = []
        for control, a, b in gate_toks:
            if control.text not in names:
                self.error(control, f"unknown signal {control.text!r}", E_UNRESOLVED)
                return
            for t in (a, b):
                if t.text not in nodes:
                    self.error(t, f"unknown node {t.text!r} (use <signal>.pos or <signal>.neg)", E_UNRESOLVED)
                    return
            gates.append(TransmissionGate(control.text, a.text, b.text))
        model.nets[d.name] = SwitchNet(tuple(signals), tuple(gates))

    def check_schedule(self, d: _Decl, model: Model) -> None:
        net_tok, steps = d.body
        net = model.nets.get(net_tok.text)
        if net is None:
            self.error(net_tok, f"unknown net {net_tok.text!r}", E_UNRESOLVED)
            return
        kinds = {s.name: s.kind for s in net.signals}
        out, ramped = [], False
        for what, word, sig, arg in steps:
            if sig.text not in kinds:
                self.error(sig, f"unknown signal {sig.text!r}", E_UNRESOLVED)
                return
            if what == "init":
                if ramped:
                    self.error(word, "init must precede every ramp", E_SWITCH)
                    return
                if arg not in (0, 1):
                    self.error(sig, "signal values are 0 or 1", E_RANGE)
                    return
                out.append(SetInitial(sig.text, arg))
            else:
                ramped = True
                start, target = arg
                if kinds[sig.text] is not NodeKind.DRIVEN:
                    self.error(sig, f"cannot ramp storage signal {sig.text!r}", E_SWITCH)
                    return
                if start not in (None, 0, 1) or target not in (0, 1, INPUT):
                    self.error(sig, "signal values are 0 or 1", E_RANGE)
                    return
                out.append(RampSignal(sig.text, target, start))
        model.schedules[d.name] = (net_tok.text, Schedule(tuple(out)))


def parse_model(text: str) -> Model:
    """Parse model text; raises :class:`ModelError` with diagnostics on failure."""
    diagnostics: list[Diagnostic] = []
    tokens = tokenize(text, diagnostics)
    lexical = bool(diagnostics)
    decls = _Parser(tokens, diagnostics).parse()
    # placeholder tokens for bad numbers would only cause follow-on semantic errors
    model = Model() if lexical else _Checker(diagnostics).run(decls)
    if diagnostics:
        raise ModelError(sorted(diagnostics, key=lambda d: (d.line, d.column)))
    return model


# ---------------------------------------------------------------- printing

def _fmt_prob(p: Fraction) -> str:
    return str(p)


def _fmt_assign(names, values) -> str:
    return " ".join(f"{n}={v}" for n, v in zip(names, values))


def _fmt_gate(spec: GateSpec) -> str:
    kind, ops = spec.kind, spec.operands
    target = ops[-1]
    head = kind.value
    if kind is GateKind.RSETI:
        head += f"[{spec.i}]"
    elif kind in (GateKind.RUNCOPY, GateKind.RUNFUNC):
        head += f"[{spec.v or 0}]"
    pre = {
        GateKind.RSET: f"{target}=0",
        GateKind.RCLR: f"{target}=1",
        GateKind.RSETI: f"{target}={spec.j}",
        GateKind.RCOPY: f"{target}={spec.v or 0}",
        GateKind.RFUNC: f"{target}={spec.v or 0}",
        GateKind.RUNCOPY: f"{target}={ops[0]}",
        GateKind.RUNFUNC: f"{target}=F",
    }.get(kind)
    args = ", ".join(ops) + (f" | {pre}" if pre else "")
    text = f"{head}({args})"
    if spec.table is not None:
        rows = " ".join(
            f"{''.join(str(v) for v in key)}->{out}" for key, out in spec.table.mapping.items()
        )
        text += f" [{rows}]"
    return text


def _lines(model: Model) -> Iterator[str]:
    for v in model.variables:
        yield f"var {v.name} arity {v.arity}"
    names = [v.name for v in model.variables]
    for name, entries in model.distributions.items():
        body = ", ".join(f"{_fmt_assign(names, a)}: {_fmt_prob(p)}" for a, p in entries)
        yield f"dist {name} {{ {body} }}"
    for name, spec in model.gates.items():
        yield f"gate {name} = {_fmt_gate(spec)}"
    for name, opdef in model.ops.items():
        rows = ", ".join(
            f"{_fmt_assign(opdef.variables, a)} -> {_fmt_assign(opdef.variables, b)}: {_fmt_prob(p)}"
            for a, entries in opdef.rows
            for b, p in entries
        )
        yield f"op {name}({', '.join(opdef.variables)}) {{ {rows} }}"
    for name, refs in model.circuits.items():
        yield f"circuit {name} {{ {' '.join(refs)} }}"
    for name, net in model.nets.items():
        yield f"net {name} {{"
        for sig in net.signals:
            yield f"  {sig.kind.value} {sig.name}"
        for g in net.gates:
            yield f"  tgate {g.control}: {g.terminal_a} {g.terminal_b}"
        yield "}"
    for name, (net_name, schedule) in model.schedules.items():
        yield f"schedule {name} for {net_name} {{"
        for step in schedule.steps:
            if isinstance(step, SetInitial):
                yield f"  init {step.signal}={step.value}"
            else:
                start = "" if step.from_value is None else f" {step.from_value}"
                yield f"  ramp {step.signal}{start} -> {step.to}"
        yield "}"


def format_model(model: Model) -> str:
    """Canonical text of a model."""
    return "\n".join(_lines(model)) + "\n"
