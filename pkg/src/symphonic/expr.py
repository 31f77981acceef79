"""Arithmetic expression DSL: parsing, printing, and jet evaluation.

Grammar (EBNF):

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | atom ('^' number)?
    atom   := number | ident | func '(' expr (',' expr)? ')' | '(' expr ')'
    func   := sin | cos | exp | log | sqrt | pow
    number := decimal, optionally scientific; in exponent position an
              integer fraction 'a/b' is also accepted

Exponents are real constants.  ``pow(base, e)`` accepts any constant
subexpression as e (it is folded at parse time), which is how the
fractional powers such as pow(t, 4/3) are written.
"""

from __future__ import annotations

from dataclasses import dataclass

from .jet import Jet, JetDomainError, s_cos, s_exp, s_log, s_pow, s_sin, s_sqrt

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "pow")


class ExprError(ValueError):
    """Base class for parsing and evaluation failures."""


class SyntaxErrorAt(ExprError):
    def __init__(self, message, line, column):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UndeclaredVariable(ExprError):
    def __init__(self, name, line, column):
        super().__init__(
            f"undeclared variable '{name}' (line {line}, column {column})"
        )
        self.name = name


class EvalDomainError(ExprError):
    def __init__(self, message, node):
        super().__init__(f"{message} in subexpression '{to_source(node)}'")
        self.node = node


# expression nodes -------------------------------------------------------


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class Const(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # one of + - * /
    left: Expr
    right: Expr


@dataclass(frozen=True)
class PowC(Expr):
    base: Expr
    exponent: float


@dataclass(frozen=True)
class Call(Expr):
    func: str  # sin cos exp log sqrt
    arg: Expr


# tokenizer ---------------------------------------------------------------


@dataclass(frozen=True)
class _Token:
    kind: str  # num ident op lparen rparen comma end
    text: str
    line: int
    column: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
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
                if source[j] == ".":
                    seen_dot = True
                j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    while k < n and source[k].isdigit():
                        k += 1
                    j = k
            tokens.append(_Token("num", source[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(_Token("ident", source[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if ch in "+-*/^":
            tokens.append(_Token("op", ch, line, start_col))
        elif ch == "(":
            tokens.append(_Token("lparen", ch, line, start_col))
        elif ch == ")":
            tokens.append(_Token("rparen", ch, line, start_col))
        elif ch == ",":
            tokens.append(_Token("comma", ch, line, start_col))
        else:
            raise SyntaxErrorAt(f"unexpected character {ch!r}", line, start_col)
        i += 1
        col += 1
    tokens.append(_Token("end", "", line, col))
    return tokens


# parser ------------------------------------------------------------------


class _Parser:
    def __init__(self, tokens, coords):
        self.tokens = tokens
        self.pos = 0
        self.coords = set(coords)

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind, text=None):
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            raise SyntaxErrorAt(f"expected {want!r}, found {tok.text or 'end of input'!r}",
                                tok.line, tok.column)
        return self.advance()

    def parse(self):
        e = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise SyntaxErrorAt(f"unexpected trailing input {tok.text!r}",
                                tok.line, tok.column)
        return e

    def expr(self):
        left = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            left = BinOp(op, left, self.term())
        return left

    def term(self):
        left = self.factor()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            left = BinOp(op, left, self.factor())
        return left

    def factor(self):
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return Neg(self.factor())
        base = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.advance()
            exponent = self.exponent_number()
            base = PowC(base, exponent)
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text == "^":
                raise SyntaxErrorAt("chained '^' is not allowed, use pow()",
                                    nxt.line, nxt.column)
        return base

    def exponent_number(self):
        sign = 1.0
        tok = self.peek()
        if tok.kind == "op" and tok.text in "+-":
            self.advance()
            if tok.text == "-":
                sign = -1.0
            tok = self.peek()
        if tok.kind != "num":
            raise SyntaxErrorAt("exponent must be a numeric constant",
                                tok.line, tok.column)
        self.advance()
        value = float(tok.text)
        # integer fraction exponent: a/b binds to the exponent
        nxt = self.peek()
        if (nxt.kind == "op" and nxt.text == "/"
                and self.tokens[self.pos + 1].kind == "num"
                and "." not in tok.text and "e" not in tok.text.lower()):
            den_tok = self.tokens[self.pos + 1]
            if "." not in den_tok.text and "e" not in den_tok.text.lower():
                self.advance()
                self.advance()
                value = value / float(den_tok.text)
        return sign * value

    def atom(self):
        tok = self.advance()
        if tok.kind == "num":
            return Const(float(tok.text))
        if tok.kind == "lparen":
            e = self.expr()
            self.expect("rparen")
            return e
        if tok.kind == "ident":
            if self.peek().kind == "lparen":
                return self.call(tok)
            if tok.text not in self.coords:
                raise UndeclaredVariable(tok.text, tok.line, tok.column)
            return Var(tok.text)
        raise SyntaxErrorAt(f"unexpected token {tok.text or 'end of input'!r}",
                            tok.line, tok.column)

    def call(self, name_tok):
        name = name_tok.text
        if name not in FUNCTIONS:
            raise SyntaxErrorAt(f"unknown function '{name}'",
                                name_tok.line, name_tok.column)
        self.expect("lparen")
        first = self.expr()
        if name == "pow":
            self.expect("comma")
            second = self.expr()
            self.expect("rparen")
            exponent = _fold_constant(second, name_tok)
            return PowC(first, exponent)
        self.expect("rparen")
        return Call(name, first)


def _fold_constant(node, tok):
    try:
        value = evaluate(node, {})
    except ExprError:
        raise SyntaxErrorAt("pow() exponent must be a constant expression",
                            tok.line, tok.column) from None
    return float(value)


def parse(source: str, coords) -> Expr:
    """Parse a DSL string against a list of coordinate names."""
    return _Parser(_tokenize(source), coords).parse()


# printer -----------------------------------------------------------------


def to_source(node: Expr) -> str:
    """Render a tree back to source text; parse(to_source(e)) == e."""
    return _print(node, 0)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _print(node, parent_prec):
    if isinstance(node, Const):
        s = repr(node.value)
        return f"({s})" if node.value < 0 else s
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        inner = _print(node.arg, 3)
        s = f"-{inner}"
        return f"({s})" if parent_prec >= 3 else s
    if isinstance(node, BinOp):
        prec = _PREC[node.op]
        left = _print(node.left, prec - 1)
        # left associativity: right subtree needs strictly higher precedence
        right = _print(node.right, prec)
        s = f"{left} {node.op} {right}"
        return f"({s})" if parent_prec >= prec else s
    if isinstance(node, PowC):
        return f"pow({_print(node.base, 0)}, {repr(node.exponent)})"
    if isinstance(node, Call):
        return f"{node.func}({_print(node.arg, 0)})"
    raise TypeError(f"not an expression node: {node!r}")


def free_variables(node: Expr) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Neg):
        return free_variables(node.arg)
    if isinstance(node, BinOp):
        return free_variables(node.left) | free_variables(node.right)
    if isinstance(node, PowC):
        return free_variables(node.base)
    if isinstance(node, Call):
        return free_variables(node.arg)
    return set()


# evaluation ---------------------------------------------------------------


def evaluate(node: Expr, env: dict):
    """Evaluate a tree in an environment mapping names to floats or Jets."""
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise EvalDomainError(f"unbound variable '{node.name}'", node) from None
    if isinstance(node, Neg):
        return -evaluate(node.arg, env)
    if isinstance(node, BinOp):
        a = evaluate(node.left, env)
        b = evaluate(node.right, env)
        try:
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            if isinstance(b, Jet):
                return a * (1.0 / b) if not isinstance(a, Jet) else a / b
            if b == 0.0 or abs(b) < 1e-300:
                raise JetDomainError("division by zero")
            return a / b
        except JetDomainError as err:
            raise EvalDomainError(str(err), node) from None
    if isinstance(node, PowC):
        base = evaluate(node.base, env)
        try:
            return s_pow(base, node.exponent)
        except JetDomainError as err:
            raise EvalDomainError(str(err), node) from None
    if isinstance(node, Call):
        arg = evaluate(node.arg, env)
        fn = {"sin": s_sin, "cos": s_cos, "exp": s_exp,
              "log": s_log, "sqrt": s_sqrt}[node.func]
        try:
            return fn(arg)
        except JetDomainError as err:
            raise EvalDomainError(str(err), node) from None
    raise TypeError(f"not an expression node: {node!r}")


def eval_jet(node: Expr, coords, base, order: int) -> Jet:
    """Jet of the expression at a base point, truncated at order."""
    nvars = len(coords)
    point = tuple(float(b) for b in base)
    env = {name: Jet.variable(k, point[k], nvars, order, point)
           for k, name in enumerate(coords)}
    result = evaluate(node, env)
    if not isinstance(result, Jet):
        return Jet.constant(float(result), nvars, order, point)
    return result


def eval_value(node: Expr, coords, point) -> float:
    env = {name: float(point[k]) for k, name in enumerate(coords)}
    result = evaluate(node, env)
    return float(result)


def is_constant(node: Expr) -> bool:
    return not free_variables(node)
