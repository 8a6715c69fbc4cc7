"""Field-element expressions: JSON trees, a text grammar, and evaluation.

JSON nodes::

    "12"                                  integer leaf (decimal string)
    {"op": "add"|"mul"|"neg"|"inv"|"sqrt"|"sub"|"div", "args": [...]}
    {"var": "x"}                          template variable
    {"tower": {"radicands": ..., "coefficients": ...}}   canonical tower value
    {"inf": true}                         point at infinity (projective contexts)

Text grammar (recursive descent)::

    expr  := term (("+" | "-") term)*
    term  := unary (("*" | "/") unary)*
    unary := "-" unary | atom
    atom  := INT | NAME "(" expr ("," expr)* ")" | NAME | "(" expr ")"
"""

from __future__ import annotations

from fractions import Fraction

from .fields import RATIONAL, TOWER, Backend, FieldError
from .tower import TowerContext, TowerElement, TowerError, sqrt_positive

INF = "inf"

_FUNCS = {"add", "mul", "neg", "inv", "sqrt", "sub", "div"}
_ARITY = {"neg": 1, "inv": 1, "sqrt": 1, "sub": 2, "div": 2}


class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self._skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch):
        if self.peek() != ch:
            got = self.peek() or "end of input"
            raise ParseError(f"expected {ch!r}, found {got!r}", self.pos)
        self.pos += 1

    def parse(self):
        node = self.expr()
        if self.peek():
            raise ParseError(f"unexpected {self.peek()!r}", self.pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            rhs = self.term()
            node = {"op": "add" if op == "+" else "sub", "args": [node, rhs]}
        return node

    def term(self):
        node = self.unary()
        while self.peek() in ("*", "/"):
            op = self.text[self.pos]
            self.pos += 1
            rhs = self.unary()
            node = {"op": "mul" if op == "*" else "div", "args": [node, rhs]}
        return node

    def unary(self):
        if self.peek() == "-":
            self.pos += 1
            return {"op": "neg", "args": [self.unary()]}
        return self.atom()

    def atom(self):
        ch = self.peek()
        start = self.pos
        if ch == "(":
            self.pos += 1
            node = self.expr()
            self.expect(")")
            return node
        if ch.isdigit():
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            return self.text[start:self.pos]
        if ch.isalpha() or ch == "_":
            while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
                self.pos += 1
            name = self.text[start:self.pos]
            if self.peek() != "(":
                if name in ("inf", "oo"):
                    return {"inf": True}
                return {"var": name}
            if name not in _FUNCS:
                raise ParseError(f"unknown function {name!r}", start)
            self.pos += 1
            args = [self.expr()]
            while self.peek() == ",":
                self.pos += 1
                args.append(self.expr())
            self.expect(")")
            want = _ARITY.get(name)
            if want is not None and len(args) != want:
                raise ParseError(f"{name} takes {want} argument(s), got {len(args)}", start)
            return {"op": name, "args": args}
        raise ParseError(f"unexpected {ch or 'end of input'!r}", self.pos)


def parse(text: str):
    """Parse the text grammar into a JSON expression tree."""
    return _Parser(text).parse()


def as_node(obj):
    """Accept text, a JSON node, or a number and return a JSON node."""
    if isinstance(obj, str):
        s = obj.strip()
        if s.lstrip("-").isdigit():
            return s if not s.startswith("-") else {"op": "neg", "args": [s[1:]]}
        return parse(s)
    if isinstance(obj, bool):
        raise TypeError("booleans are not field elements")
    if isinstance(obj, int):
        return str(obj) if obj >= 0 else {"op": "neg", "args": [str(-obj)]}
    if isinstance(obj, Fraction):
        return to_node(obj)
    if isinstance(obj, dict):
        return obj
    raise TypeError(f"cannot interpret {obj!r} as an expression")


class Evaluator:
    """Evaluate expression trees in one backend.

    For the tower backend the current context is threaded left to right, so
    ``sqrt(2) + sqrt(3)`` ends in the context (2, 3).
    """

    def __init__(self, backend: Backend = RATIONAL, env=None, ctx: TowerContext | None = None,
                 depth_cap: int | None = None):
        self.backend = backend
        self.env = dict(env or {})
        self.ctx = ctx if ctx is not None else TowerContext.base()
        self.depth_cap = depth_cap if depth_cap is not None else getattr(backend, "depth_cap", 8)

    def _lift(self, v):
        if self.backend.is_tower:
            if isinstance(v, TowerElement):
                if len(v.ctx) > len(self.ctx) and self.ctx.is_prefix_of(v.ctx):
                    self.ctx = v.ctx
                return v
            return TowerElement.rational(Fraction(v))
        if isinstance(v, TowerElement):
            return RATIONAL.element(v)
        return Fraction(v)

    def __call__(self, node):
        if isinstance(node, str):
            try:
                return self._lift(Fraction(int(node)))
            except ValueError:
                raise ParseError(f"bad integer leaf {node!r}", 0) from None
        if isinstance(node, int) and not isinstance(node, bool):
            return self._lift(Fraction(node))
        if not isinstance(node, dict):
            raise ParseError(f"bad expression node {node!r}", 0)
        if "var" in node:
            name = node["var"]
            if name not in self.env:
                raise FieldError(f"unbound variable {name!r}")
            return self._lift(self.env[name])
        if "tower" in node:
            v = TowerElement.from_json(node)
            return self._lift(v if self.backend.is_tower else v.rational_value())
        if "inf" in node:
            raise FieldError("infinity is not a field element")
        op = node.get("op")
        args = [self(a) for a in node.get("args", ())]
        try:
            if op == "add":
                out = args[0]
                for a in args[1:]:
                    out = out + a
                return out
            if op == "mul":
                out = args[0]
                for a in args[1:]:
                    out = out * a
                return out
            if op == "sub":
                return args[0] - args[1]
            if op == "div":
                if args[1] == 0:
                    raise FieldError("division by zero")
                return args[0] / args[1]
            if op == "neg":
                return -args[0]
            if op == "inv":
                if args[0] == 0:
                    raise FieldError("inverse of zero")
                return 1 / args[0]
            if op == "sqrt":
                return self.sqrt(args[0])
        except ZeroDivisionError as exc:
            raise FieldError(str(exc)) from None
        raise ParseError(f"unknown op {op!r}", 0)

    def sqrt(self, x):
        if not self.backend.is_tower:
            return RATIONAL.sqrt(x)
        if x == 0:
            return x
        try:
            root, self.ctx = sqrt_positive(x, self.ctx, depth_cap=self.depth_cap)
        except TowerError as exc:
            raise FieldError(str(exc)) from None
        return root


def evaluate(obj, backend: Backend | str = RATIONAL, env=None, ctx=None):
    """Evaluate text or a JSON tree; returns a Fraction or a TowerElement."""
    if isinstance(backend, str):
        backend = TOWER if backend == "tower" else RATIONAL
    return Evaluator(backend, env, ctx)(as_node(obj))


def to_node(value):
    """Canonical JSON node for a field element."""
    if isinstance(value, TowerElement):
        if value.level() == 0:
            return to_node(value.rational_value())
        return value.to_json()
    q = Fraction(value)
    num = str(abs(q.numerator))
    node = num if q.denominator == 1 else {"op": "div", "args": [num, str(q.denominator)]}
    return node if q >= 0 else {"op": "neg", "args": [node]}


def to_text(value) -> str:
    if isinstance(value, TowerElement):
        return value.to_infix()
    return str(Fraction(value))
