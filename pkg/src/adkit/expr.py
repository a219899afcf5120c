"""Expression front-end: grammar, AST, generic evaluation, DOT export.

The surface language is a small infix grammar::

    def    := ident "(" ident ("," ident)* ")" "=" body
    body   := "let" ident "=" sum "in" body | tuple
    tuple  := "(" sum ("," sum)+ ")" | sum
    sum    := prod (("+"|"-") prod)*
    prod   := unary (("*"|"/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" integer)?
    atom   := number | ident | ident "(" sum ("," sum)* ")" | "(" sum ")"

Callable idents are the catalogue transcendentals (exp, ln, sqrt, sin, cos,
tan).  A parenthesised, comma-separated body defines a multi-output function.
``let`` is the sharing mechanism: the bound expression becomes a single DAG
node no matter how often the name is used.  Nothing else is merged, so an
expression written twice is evaluated twice.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Sequence

from .catalog import (
    ADD,
    CATALOG,
    COPY,
    DIV,
    MUL,
    NEG,
    SUB,
    DomainError,
    ElementaryFn,
    pow_fn,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


class Expr:
    __slots__ = ()


class Variable(Expr):
    __slots__ = ("index",)

    def __init__(self, index: int):
        self.index = index  # 1-based

    def __repr__(self) -> str:
        return f"Variable({self.index})"


class Constant(Expr):
    __slots__ = ("value",)

    def __init__(self, value: float):
        self.value = float(value)

    def __repr__(self) -> str:
        return f"Constant({self.value!r})"


class Apply(Expr):
    __slots__ = ("fn", "args")

    def __init__(self, fn: ElementaryFn, args: Sequence[Expr]):
        fn.check_arity(args)
        self.fn = fn
        self.args = tuple(args)

    def __repr__(self) -> str:
        return f"Apply({self.fn.name}, {list(self.args)!r})"


@dataclass(frozen=True)
class FunctionDef:
    """A named function: m expression roots over shared nodes in n variables."""

    name: str
    params: tuple[str, ...]
    outputs: tuple[Expr, ...]

    @property
    def n(self) -> int:
        return len(self.params)

    @property
    def m(self) -> int:
        return len(self.outputs)


# --- tokenizer ---

_TOKEN_RE = re.compile(
    r"""
    (?P<number>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<symbol>[()+\-*/^,=])
  | (?P<ws>\s+)
  | (?P<bad>.)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "number" | "ident" | one of the symbol characters | "end"
    text: str
    line: int
    column: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    line, col = 1, 1
    for match in _TOKEN_RE.finditer(source):
        kind = match.lastgroup
        text = match.group()
        if kind == "bad":
            raise ParseError(f"unexpected character {text!r}", line, col)
        if kind != "ws":
            tk = kind if kind in ("number", "ident") else text
            tokens.append(_Token(tk, text, line, col))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
    tokens.append(_Token("end", "", line, col))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "end":
            self.pos += 1
        return tok

    def expect(self, kind: str, what: str | None = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            found = tok.text or "end of input"
            raise ParseError(
                f"expected {what or kind!r}, found {found!r}", tok.line, tok.column
            )
        return self.advance()

    def error(self, message: str) -> ParseError:
        tok = self.peek()
        return ParseError(message, tok.line, tok.column)

    # def := ident "(" ident ("," ident)* ")" "=" body
    def parse_def(self) -> FunctionDef:
        name = self.expect("ident", "function name").text
        self.expect("(")
        params = [self.expect("ident", "parameter name").text]
        while self.peek().kind == ",":
            self.advance()
            params.append(self.expect("ident", "parameter name").text)
        self.expect(")")
        self.expect("=")
        if len(set(params)) != len(params):
            raise self.error(f"duplicate parameter name in {params}")
        env = {p: Variable(i + 1) for i, p in enumerate(params)}
        outputs = self.parse_body(env)
        self.expect("end", "end of input")
        return FunctionDef(name, tuple(params), tuple(outputs))

    def parse_body(self, env: dict) -> list[Expr]:
        tok = self.peek()
        if tok.kind == "ident" and tok.text == "let":
            self.advance()
            name = self.expect("ident", "binding name").text
            self.expect("=")
            bound = self.parse_sum(env)
            in_tok = self.peek()
            if not (in_tok.kind == "ident" and in_tok.text == "in"):
                raise self.error("expected 'in' after let binding")
            self.advance()
            inner = dict(env)
            inner[name] = bound
            return self.parse_body(inner)
        return self.parse_tuple(env)

    def parse_tuple(self, env: dict) -> list[Expr]:
        # "(" sum ("," sum)+ ")" is a tuple only if a comma follows; otherwise
        # the parenthesis belongs to an ordinary atom.
        if self.peek().kind == "(":
            mark = self.pos
            self.advance()
            first = self.parse_sum(env)
            if self.peek().kind == ",":
                outs = [first]
                while self.peek().kind == ",":
                    self.advance()
                    outs.append(self.parse_sum(env))
                self.expect(")")
                return outs
            self.pos = mark  # plain parenthesised expression; reparse as sum
        return [self.parse_sum(env)]

    def parse_sum(self, env: dict) -> Expr:
        node = self.parse_prod(env)
        while self.peek().kind in ("+", "-"):
            op = self.advance().kind
            rhs = self.parse_prod(env)
            node = Apply(CATALOG_BIN[op], (node, rhs))
        return node

    def parse_prod(self, env: dict) -> Expr:
        node = self.parse_unary(env)
        while self.peek().kind in ("*", "/"):
            op = self.advance().kind
            rhs = self.parse_unary(env)
            node = Apply(CATALOG_BIN[op], (node, rhs))
        return node

    def parse_unary(self, env: dict) -> Expr:
        if self.peek().kind == "-":
            self.advance()
            return Apply(NEG, (self.parse_unary(env),))
        return self.parse_power(env)

    def parse_power(self, env: dict) -> Expr:
        node = self.parse_atom(env)
        if self.peek().kind == "^":
            self.advance()
            tok = self.expect("number", "integer exponent")
            if not tok.text.isdigit():
                raise ParseError(
                    f"exponent must be a nonnegative integer, found {tok.text!r}",
                    tok.line,
                    tok.column,
                )
            node = Apply(pow_fn(int(tok.text)), (node,))
        return node

    def parse_atom(self, env: dict) -> Expr:
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            return Constant(float(tok.text))
        if tok.kind == "ident":
            self.advance()
            if self.peek().kind == "(":
                self.advance()
                args = [self.parse_sum(env)]
                while self.peek().kind == ",":
                    self.advance()
                    args.append(self.parse_sum(env))
                self.expect(")")
                fn = CATALOG.get(tok.text)
                if fn is None:
                    raise ParseError(
                        f"unknown function {tok.text!r}", tok.line, tok.column
                    )
                if fn.arity != len(args):
                    raise ParseError(
                        f"{tok.text} expects {fn.arity} argument(s), got {len(args)}",
                        tok.line,
                        tok.column,
                    )
                return Apply(fn, args)
            node = env.get(tok.text)
            if node is None:
                raise ParseError(
                    f"unbound variable {tok.text!r}", tok.line, tok.column
                )
            return node
        if tok.kind == "(":
            self.advance()
            node = self.parse_sum(env)
            self.expect(")")
            return node
        found = tok.text or "end of input"
        raise ParseError(f"expected an expression, found {found!r}", tok.line, tok.column)


CATALOG_BIN = {"+": ADD, "-": SUB, "*": MUL, "/": DIV}


def parse(source: str) -> FunctionDef:
    """Parse a function definition; raises ParseError with line/column."""
    return _Parser(source).parse_def()


# --- generic evaluation ---


def eval_generic(fdef: FunctionDef, inputs: Sequence, algebra) -> list:
    """Evaluate the definition bottom-up over any scalar algebra.

    `algebra` supplies ``constant(c)`` and ``apply(fn, args)``.  Every shared
    node is evaluated exactly once; domain errors are re-raised with the
    offending node's path from the output root.
    """
    if len(inputs) != fdef.n:
        raise ValueError(f"expected {fdef.n} inputs, got {len(inputs)}")
    memo: dict[int, object] = {}

    def ev(node: Expr, path: str):
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, Variable):
            result = inputs[node.index - 1]
        elif isinstance(node, Constant):
            result = algebra.constant(node.value)
        else:
            args = [
                ev(child, f"{path}.{i}") for i, child in enumerate(node.args)
            ]
            try:
                result = algebra.apply(node.fn, args)
            except DomainError as err:
                if err.path is None:
                    raise err.at(path) from None
                raise
        memo[key] = result
        return result

    return [ev(root, f"out{j}") for j, root in enumerate(fdef.outputs)]


# --- topological schedule ---


def schedule(fdef: FunctionDef) -> list[Apply]:
    """A deterministic linear order of the operation nodes.

    Interior applications appear in left-to-right depth-first post-order;
    the step producing output j is the (mu - m + j)-th, in output order.
    Output roots that are plain variables/constants, or that are consumed
    elsewhere in the DAG, get an explicit trailing copy step.
    """
    consumed: set[int] = set()
    seen: set[int] = set()

    def scan(node: Expr) -> None:
        if id(node) in seen or not isinstance(node, Apply):
            return
        seen.add(id(node))
        for child in node.args:
            consumed.add(id(child))
            scan(child)

    for root in fdef.outputs:
        scan(root)

    tails: list[Apply] = []
    claimed: set[int] = set()
    for root in fdef.outputs:
        if (
            isinstance(root, Apply)
            and id(root) not in consumed
            and id(root) not in claimed
        ):
            claimed.add(id(root))
            tails.append(root)
        else:
            tails.append(Apply(COPY, (root,)))

    interior: list[Apply] = []
    visited: set[int] = set()

    def post(node: Expr) -> None:
        if id(node) in visited or not isinstance(node, Apply):
            return
        visited.add(id(node))
        for child in node.args:
            post(child)
        if id(node) not in claimed:
            interior.append(node)

    for root in fdef.outputs:
        post(root)

    return interior + tails


def linearize(fdef: FunctionDef) -> tuple[list[Constant], list[Apply]]:
    """Constants in first-use order plus the scheduled operations.

    Shared plumbing for every consumer that assigns one storage slot per
    constant and per operation.
    """
    steps = schedule(fdef)
    consts: list[Constant] = []
    seen: set[int] = set()
    for step in steps:
        for child in step.args:
            if isinstance(child, Constant) and id(child) not in seen:
                seen.add(id(child))
                consts.append(child)
    return consts, steps


# --- DOT export ---


def to_dot(fdef: FunctionDef, annotations: Optional[Sequence] = None) -> str:
    """Render the computational graph as a DOT digraph.

    Nodes are the n inputs, the constants, and the scheduled operations, in
    slot order.  A trailing copy step whose source leaf has no other consumer
    collapses into a single node (so the identity function is one node, not
    an input wired to a copy).  `annotations`, when given, is one
    (value, derivative) pair per slot (or None); values are tagged blue,
    derivatives red.
    """
    consts, steps = linearize(fdef)
    labels: list[str] = list(fdef.params)
    labels += [repr(c.value) for c in consts]
    labels += [_op_label(step.fn) for step in steps]
    if annotations is not None and len(annotations) != len(labels):
        raise ValueError(
            f"expected {len(labels)} annotation entries, got {len(annotations)}"
        )

    # inputs occupy slots 0..n-1; constants and steps follow.
    slot_of: dict[int, int] = {}
    for i, c in enumerate(consts):
        slot_of[id(c)] = fdef.n + i
    for i, step in enumerate(steps):
        slot_of[id(step)] = fdef.n + len(consts) + i

    def slot(node: Expr) -> int:
        if isinstance(node, Variable):
            return node.index - 1
        return slot_of[id(node)]

    consumers: dict[int, int] = {}
    for step in steps:
        for child in step.args:
            consumers[slot(child)] = consumers.get(slot(child), 0) + 1

    hidden: set[int] = set()
    merged_edges: set[int] = set()
    for step in steps:
        if step.fn.name == "copy" and not isinstance(step.args[0], Apply):
            src = slot(step.args[0])
            if consumers.get(src, 0) == 1:
                hidden.add(src)
                labels[slot(step)] = labels[src]
                merged_edges.add(slot(step))

    lines = ["digraph {", "  node [shape=box];"]
    for i, label in enumerate(labels):
        if i in hidden:
            continue
        attrs = [f'label="{label}"']
        if annotations is not None and annotations[i] is not None:
            value, deriv = annotations[i]
            attrs[0] = (
                f'label=<{_dot_escape(label)}'
                f'<BR/><FONT COLOR="blue">{value!r}</FONT>'
                f'<BR/><FONT COLOR="red">{deriv!r}</FONT>>'
            )
        lines.append(f"  n{i} [{', '.join(attrs)}];")
    for step in steps:
        if slot(step) in merged_edges:
            continue
        for child in step.args:
            lines.append(f"  n{slot(child)} -> n{slot(step)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dot_escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


_OP_SYMBOLS = {"add": "+", "sub": "-", "mul": "*", "div": "/", "neg": "-", "copy": "copy"}


def _op_label(fn: ElementaryFn) -> str:
    if fn.name in _OP_SYMBOLS:
        return _OP_SYMBOLS[fn.name]
    if fn.name.startswith("pow") and fn.name[3:].isdigit():
        return f"^{fn.name[3:]}"
    return fn.name


# --- unparsing ---

_PREC_SUM, _PREC_PROD, _PREC_UNARY, _PREC_POWER, _PREC_ATOM = 1, 2, 3, 4, 5


def unparse(fdef: FunctionDef) -> str:
    """Render a definition back to source.  Operation nodes referenced more
    than once are emitted as let bindings, preserving the sharing structure
    through a reparse."""
    refs: dict[int, int] = {}
    order: list[Apply] = []  # post-order: dependencies before dependents
    seen: set[int] = set()

    def count(node: Expr) -> None:
        if isinstance(node, Apply):
            refs[id(node)] = refs.get(id(node), 0) + 1
            if id(node) in seen:
                return
            seen.add(id(node))
            for child in node.args:
                count(child)
            order.append(node)

    for root in fdef.outputs:
        count(root)

    shared = [node for node in order if refs[id(node)] > 1]
    names = {id(node): f"_v{i + 1}" for i, node in enumerate(shared)}

    def render(node: Expr, bound_ok: bool = True) -> tuple[str, int]:
        if isinstance(node, Variable):
            return fdef.params[node.index - 1], _PREC_ATOM
        if isinstance(node, Constant):
            return _render_number(node.value), _PREC_ATOM
        if bound_ok and id(node) in names:
            return names[id(node)], _PREC_ATOM
        fn = node.fn
        if fn.name == "add" or fn.name == "sub":
            sym = "+" if fn.name == "add" else "-"
            lhs = _wrap(render(node.args[0]), _PREC_SUM, strict=False)
            rhs = _wrap(render(node.args[1]), _PREC_SUM, strict=True)
            return f"{lhs} {sym} {rhs}", _PREC_SUM
        if fn.name == "mul" or fn.name == "div":
            sym = "*" if fn.name == "mul" else "/"
            lhs = _wrap(render(node.args[0]), _PREC_PROD, strict=False)
            rhs = _wrap(render(node.args[1]), _PREC_PROD, strict=True)
            return f"{lhs} {sym} {rhs}", _PREC_PROD
        if fn.name == "neg":
            inner = _wrap(render(node.args[0]), _PREC_UNARY, strict=False)
            return f"-{inner}", _PREC_UNARY
        if fn.name.startswith("pow") and fn.name[3:].isdigit():
            base = _wrap(render(node.args[0]), _PREC_POWER, strict=True)
            return f"{base}^{fn.name[3:]}", _PREC_POWER
        args = ", ".join(render(a)[0] for a in node.args)
        return f"{fn.name}({args})", _PREC_ATOM

    body_parts = [render(root)[0] for root in fdef.outputs]
    body = body_parts[0] if len(body_parts) == 1 else "(" + ", ".join(body_parts) + ")"
    for node in reversed(shared):
        defn = render(node, bound_ok=False)[0]
        body = f"let {names[id(node)]} = {defn} in {body}"
    return f"{fdef.name}({', '.join(fdef.params)}) = {body}"


def _wrap(rendered: tuple[str, int], parent_prec: int, strict: bool) -> str:
    text, prec = rendered
    if prec < parent_prec or (strict and prec == parent_prec):
        return f"({text})"
    return text


def _render_number(value: float) -> str:
    if value < 0:
        # negative constants do not exist in the grammar; render via unary minus
        return f"(-{_render_number(-value)})"
    text = repr(value)
    if text.endswith(".0"):
        text = text[:-2]
    return text
