"""Machine-definition format: grammar, parser, serializer, expression evaluator.

The format is line-oriented.  A document is a ``machine`` header, alphabet
declarations, an init block, and sparse table entries whose values are
arithmetic expressions; missing entries are 0.  ``#`` starts a comment and
whitespace within a line is insignificant.  Parsing always validates the
resulting machine with the validator of its kind.

Five kinds:

==========  ====================================================
fpsm        standalone probabilistic machine; with a ``role``
            line it is one half of a pair instead
fqsm        standalone quantum machine
pair_fpsm   two probabilistic halves, per-side initial
            distributions (a product)
compound    two probabilistic halves, one joint distribution
            over the product state set
pair_fqsm   two quantum halves, per-side or entangled initial
            amplitudes
==========  ====================================================

Serialization is canonical: fixed section order, entries sorted by index
tuple, expressions re-rendered with minimal parentheses.  Documents built
from parsed text keep their original expressions; machines serialized
directly get shortest round-trip decimals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Alphabet, BellsimError, Distribution
from .fpsm import Fpsm, validate_fpsm
from .fqsm import Fqsm, validate_fqsm
from .compose import (
    HALF_OUTPUTS,
    SELECTIONS,
    CompoundFpsm,
    CompoundFqsm,
    EntangledAmplitude,
    HalfFpsm,
    HalfFqsm,
    JointInit,
    ProductAmplitude,
    ProductInit,
    bell_input_alphabet,
    bell_input_index,
    compose_fpsm,
    compose_fqsm,
    product_alphabet,
    split_tuple_label,
    tuple_label,
)

KINDS = ("fpsm", "fqsm", "pair_fpsm", "pair_fqsm", "compound")


class MdfSyntaxError(BellsimError):
    """Positioned error; constructors pass 0-based offsets, reported 1-based."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col + 1}: {message}")
        self.line = line
        self.col = col + 1


class UnknownSymbolError(BellsimError):
    def __init__(self, name: str, line: int, col: int):
        super().__init__(f"line {line}, column {col + 1}: unknown symbol {name!r}")
        self.name = name
        self.line = line
        self.col = col + 1


class DuplicateEntryError(BellsimError):
    def __init__(self, what: str, line: int):
        super().__init__(f"line {line}: duplicate {what}")
        self.line = line


class ValidationFailedError(BellsimError):
    def __init__(self, cause: BellsimError):
        super().__init__(f"parsed machine failed validation: {cause}")
        self.cause = cause


class NegativeSqrtError(BellsimError):
    pass


class DivisionByZeroError(BellsimError):
    pass


# --------------------------------------------------------------------------
# expressions


@dataclass(frozen=True)
class Num:
    text: str

    @property
    def value(self):
        if any(c in self.text for c in ".eE"):
            return float(self.text)
        return int(self.text)


@dataclass(frozen=True)
class Imag:
    pass


@dataclass(frozen=True)
class Sqrt:
    arg: object


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


def _prec(node) -> int:
    if isinstance(node, BinOp):
        return 2 if node.op in "*/" else 1
    if isinstance(node, Neg):
        return 3
    return 4


def render_expr(node) -> str:
    if isinstance(node, Num):
        return node.text
    if isinstance(node, Imag):
        return "i"
    if isinstance(node, Sqrt):
        return f"sqrt({render_expr(node.arg)})"
    if isinstance(node, Neg):
        inner = render_expr(node.arg)
        if _prec(node.arg) < _prec(node):
            inner = f"({inner})"
        return "-" + inner
    if isinstance(node, BinOp):
        left = render_expr(node.left)
        if _prec(node.left) < _prec(node):
            left = f"({left})"
        right = render_expr(node.right)
        # parenthesize an equal-precedence right child so the re-parsed
        # (left-associative) tree is identical to this one
        if _prec(node.right) <= _prec(node):
            right = f"({right})"
        return f"{left}{node.op}{right}"
    raise BellsimError(f"not an expression node: {node!r}")


def eval_ast(node):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Imag):
        return 1j
    if isinstance(node, Sqrt):
        v = eval_ast(node.arg)
        if isinstance(v, complex):
            raise NegativeSqrtError("sqrt of a complex value")
        if v < 0:
            raise NegativeSqrtError(f"sqrt of negative value {v!r}")
        return math.sqrt(v)
    if isinstance(node, Neg):
        return -eval_ast(node.arg)
    if isinstance(node, BinOp):
        lv = eval_ast(node.left)
        rv = eval_ast(node.right)
        if node.op == "+":
            return lv + rv
        if node.op == "-":
            return lv - rv
        if node.op == "*":
            return lv * rv
        if rv == 0:
            raise DivisionByZeroError(f"division by zero: {render_expr(node)}")
        return lv / rv
    raise BellsimError(f"not an expression node: {node!r}")


@dataclass
class _Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize_expr(text: str, line: int, col0: int) -> list[_Token]:
    tokens = []
    k = 0
    n = len(text)
    while k < n:
        c = text[k]
        if c in " \t":
            k += 1
            continue
        col = col0 + k
        if c.isdigit():
            j = k
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == ".":
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            if j < n and text[j] in "eE":
                m = j + 1
                if m < n and text[m] in "+-":
                    m += 1
                if m >= n or not text[m].isdigit():
                    raise MdfSyntaxError("malformed exponent", line, col0 + j)
                j = m
                while j < n and text[j].isdigit():
                    j += 1
            tokens.append(_Token("num", text[k:j], line, col))
            k = j
        elif c.isalpha() or c == "_":
            j = k
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("ident", text[k:j], line, col))
            k = j
        elif c in "+-*/()":
            tokens.append(_Token(c, c, line, col))
            k += 1
        else:
            raise MdfSyntaxError(f"unexpected character {c!r}", line, col)
    tokens.append(_Token("end", "", line, col0 + n))
    return tokens


class _ExprParser:
    """Recursive descent with one token of lookahead."""

    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def head(self) -> _Token:
        return self.tokens[self.pos]

    def _take(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def _expect(self, kind: str) -> _Token:
        if self.head.kind != kind:
            raise MdfSyntaxError(
                f"expected {kind!r}, found {self.head.text or 'end of expression'!r}",
                self.head.line,
                self.head.col,
            )
        return self._take()

    def parse(self):
        node = self.expr()
        if self.head.kind != "end":
            raise MdfSyntaxError(
                f"unexpected {self.head.text!r} after expression",
                self.head.line,
                self.head.col,
            )
        return node

    def expr(self):
        node = self.term()
        while self.head.kind in ("+", "-"):
            op = self._take().text
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.head.kind in ("*", "/"):
            op = self._take().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.head.kind == "-":
            self._take()
            return Neg(self.unary())
        return self.atom()

    def atom(self):
        tok = self.head
        if tok.kind == "num":
            return Num(self._take().text)
        if tok.kind == "ident":
            if tok.text == "i":
                self._take()
                return Imag()
            if tok.text == "sqrt":
                self._take()
                self._expect("(")
                node = Sqrt(self.expr())
                self._expect(")")
                return node
            raise UnknownSymbolError(tok.text, tok.line, tok.col)
        if tok.kind == "(":
            self._take()
            node = self.expr()
            self._expect(")")
            return node
        raise MdfSyntaxError(
            f"expected a value, found {tok.text or 'end of expression'!r}",
            tok.line,
            tok.col,
        )


def parse_expr(text: str, line: int = 1, col0: int = 0):
    return _ExprParser(_tokenize_expr(text, line, col0)).parse()


def eval_expr(text: str):
    """Evaluate one arithmetic expression to a float or complex."""
    return eval_ast(parse_expr(text))


def _float_ast(r: float):
    r = float(r)
    if r < 0.0:
        return Neg(Num(repr(-r)))
    return Num(repr(r))


def number_to_ast(v):
    """Shortest round-trip decimal AST for a real or complex value."""
    if isinstance(v, complex) and not isinstance(v, float):
        # numpy complex scalars subclass complex; coerce the parts or
        # repr() emits np.float64(...) instead of a bare decimal
        re, im = float(v.real), float(v.imag)
        if im == 0.0:
            return _float_ast(re)
        im_mag = Num(repr(abs(im)))
        im_ast = BinOp("*", im_mag if im > 0 else Neg(im_mag), Imag())
        if re == 0.0:
            return im_ast
        if im > 0:
            return BinOp("+", _float_ast(re), im_ast)
        return BinOp("-", _float_ast(re), BinOp("*", im_mag, Imag()))
    return _float_ast(float(v))


# --------------------------------------------------------------------------
# document scanning


_LIST_SECTIONS = ("inputs", "outputs", "states", "states_a", "states_b", "lambda")
_INIT_SECTIONS = ("init", "init_a", "init_b", "init_joint", "init_entangled")
_ENTRY_NAMES = ("p", "pa", "pb", "phi", "phia", "phib")


@dataclass
class _InitLine:
    symbol: str
    ast: object
    value: object
    line: int
    col: int


@dataclass
class _EntryLine:
    left: tuple[str, ...]
    right: tuple[str, ...]
    cols: tuple[int, ...]
    ast: object
    value: object
    line: int


@dataclass
class _RawDoc:
    kind: str
    name: str
    lists: dict[str, tuple[str, ...]]
    role: str | None
    inits: dict[str, list[_InitLine]]
    entries: dict[str, list[_EntryLine]]


def _strip_comment(line: str) -> str:
    k = line.find("#")
    return line if k < 0 else line[:k]


def _split_symbols(segment: str, line: int, col0: int) -> list[tuple[str, int]]:
    """Whitespace-separated symbols; a parenthesized group is one symbol."""
    out = []
    k = 0
    n = len(segment)
    while k < n:
        if segment[k] in " \t":
            k += 1
            continue
        start = k
        if segment[k] == "(":
            depth = 0
            while k < n:
                if segment[k] == "(":
                    depth += 1
                elif segment[k] == ")":
                    depth -= 1
                    if depth == 0:
                        k += 1
                        break
                k += 1
            if depth != 0:
                raise MdfSyntaxError("unbalanced parenthesis", line, col0 + start)
        else:
            while k < n and segment[k] not in " \t":
                k += 1
        out.append((segment[start:k], col0 + start))
    return out


def _split_indices(segment: str, line: int, col0: int) -> list[tuple[str, int]]:
    """Comma-separated index symbols; commas inside parentheses do not split."""
    out = []
    depth = 0
    start = 0
    for k, c in enumerate(segment + ","):
        if c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
            if depth < 0:
                raise MdfSyntaxError("unbalanced parenthesis", line, col0 + k)
        elif c == "," and depth == 0:
            sym = segment[start:k].strip()
            if not sym:
                raise MdfSyntaxError("empty index", line, col0 + start)
            pad = len(segment[start:k]) - len(segment[start:k].lstrip())
            out.append((sym, col0 + start + pad))
            start = k + 1
    if depth != 0:
        raise MdfSyntaxError("unbalanced parenthesis", line, col0 + len(segment))
    return out


def _scan(text: str, fragment: bool = False) -> _RawDoc:
    kind = "fpsm" if fragment else None
    name = "fragment" if fragment else None
    lists: dict[str, tuple[str, ...]] = {}
    role: str | None = None
    inits: dict[str, list[_InitLine]] = {}
    entries: dict[str, list[_EntryLine]] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = _strip_comment(raw).rstrip()
        if not body.strip():
            continue
        indent = len(body) - len(body.lstrip())
        stripped = body.strip()
        word = stripped.split(None, 1)[0]
        # entry lines may butt the bracket against the name: p[...]
        bracket = word.find("[")
        if bracket > 0:
            word = word[:bracket]

        if word == "machine":
            if fragment:
                raise MdfSyntaxError("a fragment may not declare a machine", lineno, indent)
            if kind is not None:
                raise MdfSyntaxError("second machine header", lineno, indent)
            parts = stripped.split()
            if len(parts) != 3:
                raise MdfSyntaxError("expected: machine KIND NAME", lineno, indent)
            _, kind, name = parts
            if kind not in KINDS:
                raise MdfSyntaxError(f"unknown kind {kind!r}", lineno, indent)
            if not (name[0].isalpha() or name[0] == "_") or not all(
                c.isalnum() or c == "_" for c in name
            ):
                raise MdfSyntaxError(f"bad machine name {name!r}", lineno, indent)
            continue
        if kind is None:
            raise MdfSyntaxError("document must start with a machine header", lineno, indent)

        if word == "role":
            parts = stripped.split()
            if len(parts) != 2 or parts[1] not in ("a", "b"):
                raise MdfSyntaxError("expected: role a|b", lineno, indent)
            if role is not None:
                raise DuplicateEntryError("role line", lineno)
            role = parts[1]
        elif word in _LIST_SECTIONS:
            if word in lists:
                raise DuplicateEntryError(f"{word} section", lineno)
            syms = _split_symbols(stripped[len(word):], lineno, indent + len(word))
            if not syms:
                raise MdfSyntaxError(f"{word} declares no symbols", lineno, indent)
            lists[word] = tuple(s for s, _ in syms)
        elif word in _INIT_SECTIONS:
            rest = stripped[len(word):]
            eq = rest.find("=")
            if eq < 0:
                raise MdfSyntaxError(f"expected: {word} SYMBOL = EXPR", lineno, indent)
            syms = _split_symbols(rest[:eq], lineno, indent + len(word))
            if len(syms) != 1:
                raise MdfSyntaxError("expected one symbol before '='", lineno, indent)
            expr_col = indent + len(word) + eq + 1
            ast = parse_expr(rest[eq + 1:], lineno, expr_col)
            value = _eval_positioned(ast, lineno, expr_col)
            inits.setdefault(word, []).append(
                _InitLine(syms[0][0], ast, value, lineno, syms[0][1])
            )
        elif word in _ENTRY_NAMES:
            bpos = stripped.find("[")
            if bpos < 0 or stripped[len(word):bpos].strip():
                raise MdfSyntaxError(
                    f"expected '[' after {word!r}", lineno, indent + len(word)
                )
            close = stripped.find("]", bpos)
            if close < 0:
                raise MdfSyntaxError("missing ']'", lineno, indent + bpos)
            inside = stripped[bpos + 1 : close]
            pipe = inside.find("|")
            if pipe < 0:
                raise MdfSyntaxError("missing '|' in index block", lineno, indent + bpos)
            col_in = indent + bpos + 1
            left = _split_indices(inside[:pipe], lineno, col_in)
            right = _split_indices(inside[pipe + 1:], lineno, col_in + pipe + 1)
            tail = stripped[close + 1:]
            eq = tail.find("=")
            if eq < 0 or tail[:eq].strip():
                raise MdfSyntaxError("expected '=' after index block", lineno, indent + close + 1)
            expr_col = indent + close + 1 + eq + 1
            ast = parse_expr(tail[eq + 1:], lineno, expr_col)
            value = _eval_positioned(ast, lineno, expr_col)
            entries.setdefault(word, []).append(
                _EntryLine(
                    left=tuple(s for s, _ in left),
                    right=tuple(s for s, _ in right),
                    cols=tuple(c for _, c in left + right),
                    ast=ast,
                    value=value,
                    line=lineno,
                )
            )
        else:
            raise MdfSyntaxError(f"unrecognized line {word!r}", lineno, indent)

    if not fragment and not entries:
        raise MdfSyntaxError("document declares no table entries", 1, 0)
    return _RawDoc(kind=kind, name=name, lists=lists, role=role, inits=inits, entries=entries)


def _eval_positioned(ast, line: int, col: int):
    try:
        return eval_ast(ast)
    except (NegativeSqrtError, DivisionByZeroError) as exc:
        raise type(exc)(f"line {line}, column {col + 1}: {exc}") from None


# --------------------------------------------------------------------------
# document assembly


@dataclass(frozen=True, eq=False)
class MdfDocument:
    """A parsed (and validated) document plus its original expressions."""

    kind: str
    name: str
    machine: object
    exprs: dict = field(repr=False)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MdfDocument)
            and self.kind == other.kind
            and self.name == other.name
            and self.machine == other.machine
            and self.exprs == other.exprs
        )


def _require(raw: _RawDoc, sections: tuple[str, ...], forbidden: tuple[str, ...]) -> None:
    for sec in sections:
        if sec not in raw.lists and sec not in raw.inits and sec not in raw.entries:
            raise MdfSyntaxError(f"kind {raw.kind!r} requires a {sec!r} section", 1, 0)
    for sec in forbidden:
        present = sec in raw.lists or sec in raw.inits or sec in raw.entries
        if present or (sec == "role" and raw.role is not None):
            raise MdfSyntaxError(f"kind {raw.kind!r} does not allow {sec!r}", 1, 0)


def _as_real(value, line: _EntryLine | _InitLine) -> float:
    if isinstance(value, complex):
        raise MdfSyntaxError(
            "probability entries must be real",
            line.line,
            line.cols[0] if isinstance(line, _EntryLine) else line.col,
        )
    return float(value)


def _lookup(alphabet: Alphabet, sym: str, line: int, col: int) -> int:
    try:
        return alphabet.index(sym)
    except BellsimError:
        raise UnknownSymbolError(sym, line, col) from None


def _init_distribution(
    lines: list[_InitLine], states: Alphabet, exprs: dict, section: str
) -> Distribution:
    w = np.zeros(len(states))
    table = exprs.setdefault(section, {})
    for ln in lines:
        j = _lookup(states, ln.symbol, ln.line, ln.col)
        if (j,) in table:
            raise DuplicateEntryError(f"{section} line for {ln.symbol!r}", ln.line)
        table[(j,)] = ln.ast
        w[j] = _as_real(ln.value, ln)
    return Distribution(w)


def _init_amplitudes(
    lines: list[_InitLine], states: Alphabet, exprs: dict, section: str
) -> np.ndarray:
    psi = np.zeros(len(states), dtype=np.complex128)
    table = exprs.setdefault(section, {})
    for ln in lines:
        j = _lookup(states, ln.symbol, ln.line, ln.col)
        if (j,) in table:
            raise DuplicateEntryError(f"{section} line for {ln.symbol!r}", ln.line)
        table[(j,)] = ln.ast
        psi[j] = complex(ln.value)
    return psi


def _joint_init_lines(
    lines: list[_InitLine],
    states_a: Alphabet,
    states_b: Alphabet,
    exprs: dict,
    section: str,
    complex_valued: bool,
):
    n = len(states_a) * len(states_b)
    vec = np.zeros(n, dtype=np.complex128 if complex_valued else np.float64)
    table = exprs.setdefault(section, {})
    for ln in lines:
        parts = split_tuple_label(ln.symbol) if ln.symbol.startswith("(") else None
        if parts is None or len(parts) != 2:
            raise MdfSyntaxError(
                f"{section} expects a (state_a,state_b) pair", ln.line, ln.col
            )
        # the pair is structural, not a symbol, so interior spacing is free
        parts = [p.strip() for p in parts]
        sa = _lookup(states_a, parts[0], ln.line, ln.col)
        sb = _lookup(states_b, parts[1], ln.line, ln.col)
        if (sa, sb) in table:
            raise DuplicateEntryError(f"{section} line for {ln.symbol!r}", ln.line)
        table[(sa, sb)] = ln.ast
        vec[sa * len(states_b) + sb] = (
            complex(ln.value) if complex_valued else _as_real(ln.value, ln)
        )
    return vec


def _fill_entries(
    lines: list[_EntryLine],
    section: str,
    left_alphabets: tuple[Alphabet, ...],
    right_alphabets: tuple[Alphabet, ...],
    exprs: dict,
    complex_valued: bool,
):
    """Resolve symbols to an index-keyed table {(left..., right...): value}."""
    table = exprs.setdefault(section, {})
    values = {}
    n_left, n_right = len(left_alphabets), len(right_alphabets)
    for ln in lines:
        if len(ln.left) != n_left or len(ln.right) != n_right:
            raise MdfSyntaxError(
                f"{section} entries take {n_left} output and {n_right} input indices",
                ln.line,
                ln.cols[0],
            )
        idx = []
        for sym, col, alph in zip(
            ln.left + ln.right, ln.cols, left_alphabets + right_alphabets
        ):
            idx.append(_lookup(alph, sym, ln.line, col))
        idx = tuple(idx)
        if idx in table:
            raise DuplicateEntryError(f"{section} entry", ln.line)
        table[idx] = ln.ast
        values[idx] = complex(ln.value) if complex_valued else _as_real(ln.value, ln)
    return values


def _validated(build, validate):
    try:
        machine = build()
        validate(machine)
    except (MdfSyntaxError, UnknownSymbolError, DuplicateEntryError):
        raise
    except BellsimError as exc:
        raise ValidationFailedError(exc) from exc
    return machine


def _half_fpsm_from_entries(
    role: str,
    lam: Alphabet,
    states: Alphabet,
    p0: Distribution,
    values: dict,
) -> HalfFpsm:
    table = np.zeros((4 * len(lam), len(states), 2, len(states)))
    for (o, t, a, b, l, s), v in values.items():
        table[bell_input_index(a, b, l, len(lam)), s, o, t] = v
    fpsm = Fpsm(bell_input_alphabet(lam), HALF_OUTPUTS, states, p0, table)
    return HalfFpsm(fpsm, role, lam)


def _half_fqsm_from_entries(
    states: Alphabet, psi0: np.ndarray, values: dict
) -> HalfFqsm:
    phi = np.zeros((2, len(states), 2, len(states)), dtype=np.complex128)
    for (o, t, x, s), v in values.items():
        phi[x, s, o, t] = v
    return HalfFqsm(Fqsm(SELECTIONS, HALF_OUTPUTS, states, psi0, phi))


def _half_right_alphabets(lam: Alphabet, states: Alphabet) -> tuple[Alphabet, ...]:
    return (SELECTIONS, SELECTIONS, lam, states)


def _assemble(raw: _RawDoc) -> MdfDocument:
    exprs: dict = {}

    if raw.kind == "fpsm" and raw.role is None:
        _require(raw, ("inputs", "outputs", "states", "init", "p"),
                 ("lambda", "states_a", "states_b", "init_a", "init_b",
                  "init_joint", "init_entangled", "pa", "pb", "phi", "phia", "phib"))
        inputs = Alphabet(raw.lists["inputs"])
        outputs = Alphabet(raw.lists["outputs"])
        states = Alphabet(raw.lists["states"])
        p0 = _init_distribution(raw.inits["init"], states, exprs, "init")
        values = _fill_entries(
            raw.entries["p"], "p", (outputs, states), (inputs, states), exprs, False
        )

        def build():
            table = np.zeros((len(inputs), len(states), len(outputs), len(states)))
            for (o, t, i, s), v in values.items():
                table[i, s, o, t] = v
            return Fpsm(inputs, outputs, states, p0, table)

        machine = _validated(build, validate_fpsm)

    elif raw.kind == "fpsm":
        _require(raw, ("lambda", "states", "init", "p"),
                 ("inputs", "outputs", "states_a", "states_b", "init_a", "init_b",
                  "init_joint", "init_entangled", "pa", "pb", "phi", "phia", "phib"))
        lam = Alphabet(raw.lists["lambda"])
        states = Alphabet(raw.lists["states"])
        p0 = _init_distribution(raw.inits["init"], states, exprs, "init")
        values = _fill_entries(
            raw.entries["p"], "p", (HALF_OUTPUTS, states),
            _half_right_alphabets(lam, states), exprs, False,
        )
        machine = _validated(
            lambda: _half_fpsm_from_entries(raw.role, lam, states, p0, values),
            lambda h: validate_fpsm(h.fpsm),
        )

    elif raw.kind == "fqsm":
        if raw.role is not None:
            raise MdfSyntaxError("role lines apply to probabilistic halves only", 1, 0)
        _require(raw, ("inputs", "outputs", "states", "init", "phi"),
                 ("lambda", "states_a", "states_b", "init_a", "init_b",
                  "init_joint", "init_entangled", "p", "pa", "pb", "phia", "phib"))
        inputs = Alphabet(raw.lists["inputs"])
        outputs = Alphabet(raw.lists["outputs"])
        states = Alphabet(raw.lists["states"])
        psi0 = _init_amplitudes(raw.inits["init"], states, exprs, "init")
        values = _fill_entries(
            raw.entries["phi"], "phi", (outputs, states), (inputs, states), exprs, True
        )

        def build():
            phi = np.zeros(
                (len(inputs), len(states), len(outputs), len(states)),
                dtype=np.complex128,
            )
            for (o, t, i, s), v in values.items():
                phi[i, s, o, t] = v
            return Fqsm(inputs, outputs, states, psi0, phi)

        machine = _validated(build, validate_fqsm)

    elif raw.kind in ("pair_fpsm", "compound"):
        product = raw.kind == "pair_fpsm"
        init_secs = ("init_a", "init_b") if product else ("init_joint",)
        _require(raw, ("lambda", "states_a", "states_b", "pa", "pb") + init_secs,
                 ("inputs", "outputs", "states", "init", "init_entangled",
                  "p", "phi", "phia", "phib", "role")
                 + (("init_joint",) if product else ("init_a", "init_b")))
        lam = Alphabet(raw.lists["lambda"])
        states_a = Alphabet(raw.lists["states_a"])
        states_b = Alphabet(raw.lists["states_b"])
        if product:
            p0a = _init_distribution(raw.inits["init_a"], states_a, exprs, "init_a")
            p0b = _init_distribution(raw.inits["init_b"], states_b, exprs, "init_b")
            init = None
        else:
            # halves of a joint-init pair carry placeholder point masses;
            # the joint distribution is what the compound actually uses
            p0a = Distribution.point_mass(len(states_a), 0)
            p0b = Distribution.point_mass(len(states_b), 0)
            vec = _joint_init_lines(
                raw.inits["init_joint"], states_a, states_b, exprs, "init_joint", False
            )
            init = JointInit(Distribution(vec.real), len(states_a), len(states_b))
        va = _fill_entries(
            raw.entries["pa"], "pa", (HALF_OUTPUTS, states_a),
            _half_right_alphabets(lam, states_a), exprs, False,
        )
        vb = _fill_entries(
            raw.entries["pb"], "pb", (HALF_OUTPUTS, states_b),
            _half_right_alphabets(lam, states_b), exprs, False,
        )

        def build():
            ha = _half_fpsm_from_entries("a", lam, states_a, p0a, va)
            hb = _half_fpsm_from_entries("b", lam, states_b, p0b, vb)
            # validate halves first so diagnostics name the offending side
            validate_fpsm(ha.fpsm)
            validate_fpsm(hb.fpsm)
            return compose_fpsm(ha, hb, init)

        machine = _validated(build, lambda c: None)

    elif raw.kind == "pair_fqsm":
        _require(raw, ("states_a", "states_b", "phia", "phib"),
                 ("inputs", "outputs", "states", "lambda", "init", "init_joint",
                  "p", "pa", "pb", "phi", "role"))
        states_a = Alphabet(raw.lists["states_a"])
        states_b = Alphabet(raw.lists["states_b"])
        entangled = "init_entangled" in raw.inits
        per_side = "init_a" in raw.inits or "init_b" in raw.inits
        if entangled and per_side:
            raise MdfSyntaxError(
                "give either init_entangled or init_a/init_b, not both", 1, 0
            )
        if not entangled and not per_side:
            raise MdfSyntaxError(
                "pair_fqsm needs init_entangled or init_a/init_b lines", 1, 0
            )
        if entangled:
            psi0a = np.zeros(len(states_a), dtype=np.complex128)
            psi0a[0] = 1.0
            psi0b = np.zeros(len(states_b), dtype=np.complex128)
            psi0b[0] = 1.0
            vec = _joint_init_lines(
                raw.inits["init_entangled"], states_a, states_b, exprs,
                "init_entangled", True,
            )
            init = EntangledAmplitude(vec, len(states_a), len(states_b))
        else:
            if "init_a" not in raw.inits or "init_b" not in raw.inits:
                raise MdfSyntaxError("init_a and init_b are both required", 1, 0)
            psi0a = _init_amplitudes(raw.inits["init_a"], states_a, exprs, "init_a")
            psi0b = _init_amplitudes(raw.inits["init_b"], states_b, exprs, "init_b")
            init = None
        va = _fill_entries(
            raw.entries["phia"], "phia", (HALF_OUTPUTS, states_a),
            (SELECTIONS, states_a), exprs, True,
        )
        vb = _fill_entries(
            raw.entries["phib"], "phib", (HALF_OUTPUTS, states_b),
            (SELECTIONS, states_b), exprs, True,
        )

        def build():
            ha = _half_fqsm_from_entries(states_a, psi0a, va)
            hb = _half_fqsm_from_entries(states_b, psi0b, vb)
            validate_fqsm(ha.fqsm)
            validate_fqsm(hb.fqsm)
            return compose_fqsm(ha, hb, init)

        machine = _validated(build, lambda c: None)

    else:  # pragma: no cover - _scan restricts kinds
        raise BellsimError(f"unhandled kind {raw.kind!r}")

    return MdfDocument(kind=raw.kind, name=raw.name, machine=machine, exprs=exprs)


def parse(text: str) -> MdfDocument:
    """Parse and validate one document; the machine is in ``.machine``."""
    return _assemble(_scan(text))


# --------------------------------------------------------------------------
# serialization


def _render_value(v) -> str:
    return render_expr(number_to_ast(v))


def _entry_line(name: str, left: tuple[str, ...], right: tuple[str, ...], expr: str) -> str:
    return f"{name}[{', '.join(left)} | {', '.join(right)}] = {expr}"


class _Emitter:
    """Collects canonical lines; entry values come from stored expressions
    when present, shortest round-trip decimals otherwise."""

    def __init__(self, exprs: dict | None):
        self.exprs = exprs or {}
        self.lines: list[str] = []

    def header(self, kind: str, name: str) -> None:
        self.lines.append(f"machine {kind} {name}")

    def listsec(self, key: str, alphabet: Alphabet) -> None:
        self.lines.append(f"{key} {' '.join(alphabet)}")

    def _expr_for(self, section: str, idx: tuple, value) -> str:
        ast = self.exprs.get(section, {}).get(idx)
        return render_expr(ast) if ast is not None else _render_value(value)

    def init(self, section: str, labels, values) -> None:
        for j, label in enumerate(labels):
            v = values[j]
            if v == 0:
                continue
            self.lines.append(f"{section} {label} = {self._expr_for(section, (j,), v)}")

    def init_pairs(self, section: str, states_a: Alphabet, states_b: Alphabet, vec) -> None:
        for sa in range(len(states_a)):
            for sb in range(len(states_b)):
                v = vec[sa * len(states_b) + sb]
                if v == 0:
                    continue
                label = tuple_label((states_a[sa], states_b[sb]))
                expr = self._expr_for(section, (sa, sb), v)
                self.lines.append(f"{section} {label} = {expr}")

    def entries_plain(self, section: str, m) -> None:
        no, ns, ni = len(m.outputs), len(m.states), len(m.inputs)
        table = m.table if isinstance(m, Fpsm) else m.phi
        for o in range(no):
            for t in range(ns):
                for i in range(ni):
                    for s in range(ns):
                        v = table[i, s, o, t]
                        if v == 0:
                            continue
                        expr = self._expr_for(section, (o, t, i, s), complex(v))
                        self.lines.append(_entry_line(
                            section,
                            (m.outputs[o], m.states[t]),
                            (m.inputs[i], m.states[s]),
                            expr,
                        ))

    def entries_half_fpsm(self, section: str, h: HalfFpsm) -> None:
        lam, states = h.lambda_alphabet, h.fpsm.states
        ns, nl = len(states), len(lam)
        for o in range(2):
            for t in range(ns):
                for a in range(2):
                    for b in range(2):
                        for l in range(nl):
                            for s in range(ns):
                                v = h.fpsm.table[bell_input_index(a, b, l, nl), s, o, t]
                                if v == 0:
                                    continue
                                expr = self._expr_for(section, (o, t, a, b, l, s), float(v))
                                self.lines.append(_entry_line(
                                    section,
                                    (HALF_OUTPUTS[o], states[t]),
                                    (SELECTIONS[a], SELECTIONS[b], lam[l], states[s]),
                                    expr,
                                ))

    def entries_half_fqsm(self, section: str, h: HalfFqsm) -> None:
        states = h.fqsm.states
        ns = len(states)
        for o in range(2):
            for t in range(ns):
                for x in range(2):
                    for s in range(ns):
                        v = h.fqsm.phi[x, s, o, t]
                        if v == 0:
                            continue
                        expr = self._expr_for(section, (o, t, x, s), complex(v))
                        self.lines.append(_entry_line(
                            section,
                            (HALF_OUTPUTS[o], states[t]),
                            (SELECTIONS[x], states[s]),
                            expr,
                        ))

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def _serialize_into(obj, name: str, em: _Emitter) -> None:
    if isinstance(obj, Fpsm):
        em.header("fpsm", name)
        em.listsec("inputs", obj.inputs)
        em.listsec("outputs", obj.outputs)
        em.listsec("states", obj.states)
        em.init("init", obj.states, obj.p0.weights)
        em.entries_plain("p", obj)
    elif isinstance(obj, Fqsm):
        em.header("fqsm", name)
        em.listsec("inputs", obj.inputs)
        em.listsec("outputs", obj.outputs)
        em.listsec("states", obj.states)
        em.init("init", obj.states, obj.psi0)
        em.entries_plain("phi", obj)
    elif isinstance(obj, HalfFpsm):
        em.header("fpsm", name)
        em.lines.append(f"role {obj.own_role}")
        em.listsec("lambda", obj.lambda_alphabet)
        em.listsec("states", obj.fpsm.states)
        em.init("init", obj.fpsm.states, obj.fpsm.p0.weights)
        em.entries_half_fpsm("p", obj)
    elif isinstance(obj, CompoundFpsm):
        kind = "pair_fpsm" if isinstance(obj.init, ProductInit) else "compound"
        em.header(kind, name)
        em.listsec("lambda", obj.lambda_alphabet)
        em.listsec("states_a", obj.left.fpsm.states)
        em.listsec("states_b", obj.right.fpsm.states)
        if isinstance(obj.init, ProductInit):
            em.init("init_a", obj.left.fpsm.states, obj.init.left.weights)
            em.init("init_b", obj.right.fpsm.states, obj.init.right.weights)
        else:
            em.init_pairs(
                "init_joint", obj.left.fpsm.states, obj.right.fpsm.states,
                obj.init.dist.weights,
            )
        em.entries_half_fpsm("pa", obj.left)
        em.entries_half_fpsm("pb", obj.right)
    elif isinstance(obj, CompoundFqsm):
        em.header("pair_fqsm", name)
        em.listsec("states_a", obj.left.fqsm.states)
        em.listsec("states_b", obj.right.fqsm.states)
        if isinstance(obj.init, ProductAmplitude):
            em.init("init_a", obj.left.fqsm.states, np.asarray(obj.init.left))
            em.init("init_b", obj.right.fqsm.states, np.asarray(obj.init.right))
        else:
            em.init_pairs(
                "init_entangled", obj.left.fqsm.states, obj.right.fqsm.states,
                obj.init.psi,
            )
        em.entries_half_fqsm("phia", obj.left)
        em.entries_half_fqsm("phib", obj.right)
    else:
        raise BellsimError(f"cannot serialize {type(obj).__name__}")


def serialize(obj, name: str | None = None) -> str:
    """Canonical text for a document or a machine object."""
    if isinstance(obj, MdfDocument):
        em = _Emitter(obj.exprs)
        _serialize_into(obj.machine, name or obj.name, em)
        return em.text()
    em = _Emitter(None)
    _serialize_into(obj, name or "m", em)
    return em.text()


# --------------------------------------------------------------------------
# init fragments (for composing at the command line)


def parse_init_fragment(text: str, states_a: Alphabet, states_b: Alphabet):
    """Parse a file holding only init lines into an init object.

    Accepted shapes: init_a + init_b lines (product of distributions),
    init_joint lines (one joint distribution), or init_entangled lines
    (one joint amplitude vector).
    """
    raw = _scan(text, fragment=True)
    if raw.lists or raw.entries or raw.role is not None or "init" in raw.inits:
        raise MdfSyntaxError("an init fragment may contain only init_* lines", 1, 0)
    exprs: dict = {}
    joint = "init_joint" in raw.inits
    entangled = "init_entangled" in raw.inits
    per_side = "init_a" in raw.inits or "init_b" in raw.inits
    if sum((joint, entangled, per_side)) != 1:
        raise MdfSyntaxError(
            "give exactly one of: init_a/init_b, init_joint, init_entangled", 1, 0
        )
    if joint:
        vec = _joint_init_lines(
            raw.inits["init_joint"], states_a, states_b, exprs, "init_joint", False
        )
        return JointInit(Distribution(vec.real), len(states_a), len(states_b))
    if entangled:
        vec = _joint_init_lines(
            raw.inits["init_entangled"], states_a, states_b, exprs, "init_entangled", True
        )
        return EntangledAmplitude(vec, len(states_a), len(states_b))
    if "init_a" not in raw.inits or "init_b" not in raw.inits:
        raise MdfSyntaxError("init_a and init_b are both required", 1, 0)
    return ProductInit(
        _init_distribution(raw.inits["init_a"], states_a, exprs, "init_a"),
        _init_distribution(raw.inits["init_b"], states_b, exprs, "init_b"),
    )
