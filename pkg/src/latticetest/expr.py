"""Small arithmetic expression language for item answer specs.

Grammar (recursive descent, one token lookahead):

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := unary ('^' factor)?          # '^' is right-associative
    unary  := '-' unary | atom
    atom   := NUMBER | IDENT
            | IDENT '(' expr (',' expr)* ')'
            | '(' expr ')'

Built-in functions: sin, cos, tan, exp, log, sqrt, abs, and the loop
accumulator midpoint_sum(f, lo, hi, inc) whose first argument is an
expression in the loop variable ``x``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Union


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class EvalError(ValueError):
    """Unbound variable or a numeric domain error during evaluation."""


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Expr", ...]


Expr = Union[Num, Var, Neg, BinOp, Call]

_UNARY_FUNCS: dict[str, Callable[[float], float]] = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
    "abs": abs,
}

LOOP_VAR = "x"
_ARITY = {name: 1 for name in _UNARY_FUNCS} | {"midpoint_sum": 4}


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Token:
    kind: str  # number | ident | op | lparen | rparen | comma | eof
    text: str
    line: int
    col: int


def _tokenize(source: str) -> Iterator[_Token]:
    line, col = 1, 1
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        start_col = col
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (source[j].isdigit() or (source[j] == "." and not seen_dot)):
                seen_dot = seen_dot or source[j] == "."
                j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            col += j - i
            i = j
            yield _Token("number", text, line, start_col)
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            col += j - i
            i = j
            yield _Token("ident", text, line, start_col)
        elif ch in "+-*/^":
            i += 1
            col += 1
            yield _Token("op", ch, line, start_col)
        elif ch == "(":
            i += 1
            col += 1
            yield _Token("lparen", ch, line, start_col)
        elif ch == ")":
            i += 1
            col += 1
            yield _Token("rparen", ch, line, start_col)
        elif ch == ",":
            i += 1
            col += 1
            yield _Token("comma", ch, line, start_col)
        else:
            raise ExprSyntaxError(f"unexpected character {ch!r}", line, col)
    yield _Token("eof", "", line, col)


class _Parser:
    def __init__(self, source: str):
        self.tokens = list(_tokenize(source))
        self.pos = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def _advance(self) -> _Token:
        tok = self.current
        self.pos += 1
        return tok

    def _expect(self, kind: str, what: str) -> _Token:
        if self.current.kind != kind:
            self._fail(f"expected {what}")
        return self._advance()

    def _fail(self, message: str) -> None:
        tok = self.current
        shown = tok.text or "end of input"
        raise ExprSyntaxError(f"{message}, found {shown!r}", tok.line, tok.col)

    def parse(self) -> Expr:
        node = self.expr()
        if self.current.kind != "eof":
            self._fail("unexpected trailing input")
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.current.kind == "op" and self.current.text in "+-":
            op = self._advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.current.kind == "op" and self.current.text in "*/":
            op = self._advance().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        node = self.unary()
        if self.current.kind == "op" and self.current.text == "^":
            self._advance()
            node = BinOp("^", node, self.factor())
        return node

    def unary(self) -> Expr:
        if self.current.kind == "op" and self.current.text == "-":
            self._advance()
            return Neg(self.unary())
        return self.atom()

    def atom(self) -> Expr:
        tok = self.current
        if tok.kind == "number":
            self._advance()
            return Num(float(tok.text))
        if tok.kind == "ident":
            self._advance()
            if self.current.kind != "lparen":
                return Var(tok.text)
            self._advance()
            args = [self.expr()]
            while self.current.kind == "comma":
                self._advance()
                args.append(self.expr())
            self._expect("rparen", "')'")
            if tok.text not in _ARITY:
                raise ExprSyntaxError(f"unknown function {tok.text!r}", tok.line, tok.col)
            if len(args) != _ARITY[tok.text]:
                raise ExprSyntaxError(
                    f"{tok.text} takes {_ARITY[tok.text]} argument(s), got {len(args)}",
                    tok.line,
                    tok.col,
                )
            return Call(tok.text, tuple(args))
        if tok.kind == "lparen":
            self._advance()
            node = self.expr()
            self._expect("rparen", "')'")
            return node
        self._fail("expected a number, variable, function call or '('")
        raise AssertionError("unreachable")


def parse_expr(source: str) -> Expr:
    return _Parser(source).parse()


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def eval_expr(expression: Expr | str, bindings: dict[str, float] | None = None) -> float:
    """Evaluate an expression (AST or source text) under variable bindings."""
    node = parse_expr(expression) if isinstance(expression, str) else expression
    return _eval(node, dict(bindings or {}))


def _eval(node: Expr, env: dict[str, float]) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise EvalError(f"unbound variable {node.name!r}") from None
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, BinOp):
        left = _eval(node.left, env)
        right = _eval(node.right, env)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if node.op == "/":
            if right == 0:
                raise EvalError("division by zero")
            return left / right
        if node.op == "^":
            try:
                result = left ** right
            except (OverflowError, ValueError, ZeroDivisionError) as exc:
                raise EvalError(f"cannot raise {left} to power {right}") from exc
            if isinstance(result, complex):
                raise EvalError(f"cannot raise {left} to power {right}")
            return result
        raise AssertionError(f"unknown operator {node.op}")
    if isinstance(node, Call):
        if node.func == "midpoint_sum":
            f, lo_node, hi_node, inc_node = node.args
            lo = _eval(lo_node, env)
            hi = _eval(hi_node, env)
            inc = _eval(inc_node, env)
            return midpoint_sum(f, lo, hi, inc, bindings=env)
        arg = _eval(node.args[0], env)
        try:
            return _UNARY_FUNCS[node.func](arg)
        except ValueError:
            raise EvalError(f"{node.func}({arg}) is undefined") from None
        except OverflowError:
            raise EvalError(f"{node.func}({arg}) overflows") from None
    raise AssertionError(f"unknown node {node!r}")


def midpoint_sum(
    f: Expr | str,
    lo: float,
    hi: float,
    inc: float,
    bindings: dict[str, float] | None = None,
) -> float:
    """Loop-accumulator semantics for the generated integration items.

    Iterates x_j = lo + j*inc for j = 0..n with n = floor((hi - lo)/inc + 1e-9)
    (the fudge keeps hi included when floating point lands just short of it),
    accumulates f(x_j + inc/2), and scales the total by inc. This mirrors the
    source loop the items are built around, including the half-step past hi.
    """
    if inc <= 0:
        raise EvalError(f"increment must be positive, got {inc}")
    if lo > hi:
        raise EvalError(f"lower bound {lo} exceeds upper bound {hi}")
    body = parse_expr(f) if isinstance(f, str) else f
    env = dict(bindings or {})
    steps = math.floor((hi - lo) / inc + 1e-9)
    total = 0.0
    for j in range(steps + 1):
        env[LOOP_VAR] = lo + j * inc + inc / 2
        total += _eval(body, env)
    return total * inc


def free_variables(node: Expr) -> set[str]:
    """Variables an expression reads, minus the loop variable inside midpoint_sum."""
    if isinstance(node, Num):
        return set()
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Neg):
        return free_variables(node.operand)
    if isinstance(node, BinOp):
        return free_variables(node.left) | free_variables(node.right)
    if isinstance(node, Call):
        if node.func == "midpoint_sum":
            body, *rest = node.args
            names = free_variables(body) - {LOOP_VAR}
            for arg in rest:
                names |= free_variables(arg)
            return names
        return set().union(*(free_variables(arg) for arg in node.args))
    raise AssertionError(f"unknown node {node!r}")


# ---------------------------------------------------------------------------
# Formatting (canonical source, parses back to an identical AST)
# ---------------------------------------------------------------------------

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}
_NEG_PRECEDENCE = 4  # unary minus binds tighter than '^' per the grammar


def format_expr(node: Expr) -> str:
    return _format(node, 0)


def _format(node: Expr, parent_prec: int) -> str:
    if isinstance(node, Num):
        value = node.value
        text = str(int(value)) if value == int(value) and abs(value) < 1e16 else repr(value)
        # a bare negative literal needs the same wrapping as unary minus
        if value < 0 and parent_prec > 0:
            return f"({text})"
        return text
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        inner = _format(node.operand, _NEG_PRECEDENCE)
        text = f"-{inner}"
        return f"({text})" if parent_prec > 0 else text
    if isinstance(node, BinOp):
        prec = _PRECEDENCE[node.op]
        if node.op == "^":
            left = _format(node.left, prec + 1)  # left operand of '^' must be atomic-ish
            right = _format(node.right, prec)    # right-associative
        else:
            left = _format(node.left, prec)
            right = _format(node.right, prec + 1)  # left-associative
        text = f"{left} {node.op} {right}" if node.op in "+-" else f"{left}{node.op}{right}"
        return f"({text})" if prec < parent_prec else text
    if isinstance(node, Call):
        args = ", ".join(_format(arg, 0) for arg in node.args)
        return f"{node.func}({args})"
    raise AssertionError(f"unknown node {node!r}")
