"""Parser for data-type declarations (.ndt) and value literals (.ndv).

The surface syntax is a small Agda-like language:

    data Bush (a : Set) : Set where
      leaf : Bush a
      cons : a -> Bush (Bush a) -> Bush a

Declarations may reference each other in any order; names and arities are
resolved in a second pass over the whole file.  Value literals are either
explicit constructor applications (``cons 4 leaf``), naturals, quoted atoms
(``'x``), or bracket lists ``[ 4, [ 8 ] ]`` which desugar to the target
declaration's nil/cons-style constructors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import ParseError

NAT_MAX = 2**64 - 1

KEYWORDS = frozenset({"data", "where"})


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class TVar:
    """A type-parameter occurrence."""

    name: str
    pos: tuple[int, int] | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class TApp:
    """A declared type constructor applied to zero or more arguments."""

    head: str
    args: tuple["TypeExpr", ...] = ()
    pos: tuple[int, int] | None = field(default=None, compare=False, repr=False)


TypeExpr = TVar | TApp


@dataclass(frozen=True)
class Constructor:
    name: str
    args: tuple[TypeExpr, ...]
    result: TypeExpr
    pos: tuple[int, int] | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class TypeDecl:
    name: str
    params: tuple[str, ...]
    ctors: tuple[Constructor, ...]
    pos: tuple[int, int] | None = field(default=None, compare=False, repr=False)

    def ctor(self, name: str) -> Constructor | None:
        for c in self.ctors:
            if c.name == name:
                return c
        return None


@dataclass(frozen=True)
class Program:
    decls: tuple[TypeDecl, ...]
    source: str = "<input>"

    def decl(self, name: str) -> TypeDecl | None:
        for d in self.decls:
            if d.name == name:
                return d
        return None


@dataclass(frozen=True)
class Atom:
    """A named base payload, written 'name in value literals."""

    name: str

    def __str__(self) -> str:
        return f"'{self.name}"


Payload = int | Atom


@dataclass(frozen=True)
class VBase:
    payload: Payload
    pos: tuple[int, int] | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class VCon:
    ctor: str
    args: tuple["Value", ...] = ()
    pos: tuple[int, int] | None = field(default=None, compare=False, repr=False)


Value = VBase | VCon


@dataclass(frozen=True)
class CtxBase:
    """A base universe in a type context: naturals or named atoms."""

    kind: str  # "nat" | "atom"


@dataclass(frozen=True)
class CtxApp:
    """A declared type applied to contexts, e.g. Bush (Bush Nat)."""

    head: str
    args: tuple["TypeCtx", ...] = ()


TypeCtx = CtxBase | CtxApp


# ---------------------------------------------------------------------------
# Lexer


@dataclass(frozen=True)
class Token:
    kind: str  # one of: ident, uident, nat, atom, punct, newline, eof
    text: str
    line: int
    col: int


_PUNCT = {"(": "(", ")": ")", "[": "[", "]": "]", ",": ",", ":": ":"}


def _lex(text: str, file: str, keep_newlines: bool) -> list[Token]:
    toks: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(text)

    def err(msg: str, l: int, c: int) -> ParseError:
        return ParseError(msg, l, c, file)

    while i < n:
        ch = text[i]
        if ch == "\n":
            if keep_newlines and toks and toks[-1].kind != "newline":
                toks.append(Token("newline", "\n", line, col))
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "-":
            if text.startswith("--", i):
                while i < n and text[i] != "\n":
                    i += 1
                continue
            if text.startswith("->", i):
                toks.append(Token("punct", "->", line, col))
                i += 2
                col += 2
                continue
            raise err("stray '-' (expected '->' or a '--' comment)", line, col)
        if ch in _PUNCT:
            toks.append(Token("punct", ch, line, col))
            i += 1
            col += 1
            continue
        if ch == "'":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] in "_'"):
                j += 1
            if j == i + 1:
                raise err("expected a name after the atom quote '", line, col)
            toks.append(Token("atom", text[i + 1 : j], line, col))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            lit = text[i:j]
            if int(lit) > NAT_MAX:
                raise err(f"natural literal {lit} exceeds the 64-bit range", line, col)
            toks.append(Token("nat", lit, line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_'"):
                j += 1
            word = text[i:j]
            kind = "uident" if word[0].isupper() else "ident"
            toks.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        raise err(f"unexpected character {ch!r}", line, col)

    if keep_newlines and toks and toks[-1].kind != "newline":
        toks.append(Token("newline", "\n", line, col))
    toks.append(Token("eof", "", line, col))
    return toks


class _Cursor:
    """A token stream with one-token lookahead."""

    def __init__(self, toks: list[Token], file: str):
        self.toks = toks
        self.i = 0
        self.file = file

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def expect(self, kind: str, text: str | None = None, what: str = "") -> Token:
        if not self.at(kind, text):
            want = what or (text if text is not None else kind)
            raise self.error(f"expected {want}, found {self._describe(self.tok)}")
        return self.advance()

    def error(self, msg: str, tok: Token | None = None) -> ParseError:
        t = tok or self.tok
        return ParseError(msg, t.line, t.col, self.file)

    @staticmethod
    def _describe(t: Token) -> str:
        if t.kind == "eof":
            return "end of input"
        if t.kind == "newline":
            return "end of line"
        return repr(t.text)

    def skip_newlines(self) -> None:
        while self.at("newline"):
            self.advance()


# ---------------------------------------------------------------------------
# Declaration parsing


def parse_program(text: str, source: str = "<input>") -> Program:
    """Parse a full .ndt file and resolve all type references."""
    cur = _Cursor(_lex(text, source, keep_newlines=True), source)
    decls: list[TypeDecl] = []
    cur.skip_newlines()
    while not cur.at("eof"):
        decls.append(_parse_decl(cur))
        cur.skip_newlines()
    if not decls:
        raise cur.error("expected at least one data declaration")
    program = Program(tuple(decls), source)
    _resolve(program)
    return program


def _parse_decl(cur: _Cursor) -> TypeDecl:
    start = cur.expect("ident", "data", what="'data'")
    name_tok = cur.expect("uident", what="a capitalized type name")
    params: list[str] = []
    while True:
        if cur.at("ident"):
            if cur.tok.text in KEYWORDS:
                break
            params.append(cur.advance().text)
        elif cur.at("punct", "("):
            # A parenthesized parameter group with a kind annotation: (a b : Set)
            cur.advance()
            group = []
            while cur.at("ident") and cur.tok.text not in KEYWORDS:
                group.append(cur.advance().text)
            if not group:
                raise cur.error("expected parameter names inside parentheses")
            cur.expect("punct", ":")
            cur.expect("uident", "Set", what="'Set'")
            cur.expect("punct", ")")
            params.extend(group)
        else:
            break
    if cur.at("punct", ":"):
        cur.advance()
        cur.expect("uident", "Set", what="'Set'")
    cur.expect("ident", "where", what="'where'")
    cur.expect("newline", what="a line break after 'where'")
    cur.skip_newlines()

    seen = set()
    for p in params:
        if p in seen:
            raise ParseError(
                f"duplicate type parameter {p!r}", name_tok.line, name_tok.col, cur.file
            )
        seen.add(p)

    ctors: list[Constructor] = []
    # constructor lines run until the next 'data' keyword or end of file
    while (cur.at("ident") or cur.at("uident")) and cur.tok.text != "data":
        ctors.append(_parse_ctor(cur))
        cur.skip_newlines()
    if not ctors:
        raise cur.error(f"declaration {name_tok.text} has no constructors")
    return TypeDecl(
        name_tok.text, tuple(params), tuple(ctors), (start.line, start.col)
    )


def _parse_ctor(cur: _Cursor) -> Constructor:
    if not (cur.at("ident") or cur.at("uident")):
        raise cur.error(f"expected a constructor name, found {cur._describe(cur.tok)}")
    name_tok = cur.advance()
    if name_tok.text in KEYWORDS:
        raise cur.error(f"{name_tok.text!r} cannot name a constructor", name_tok)
    cur.expect("punct", ":")
    segments = [_parse_atom_seq(cur)]
    while cur.at("punct", "->"):
        cur.advance()
        segments.append(_parse_atom_seq(cur))
    cur.expect("newline", what="a line break after the constructor type")
    return Constructor(
        name_tok.text,
        tuple(segments[:-1]),
        segments[-1],
        (name_tok.line, name_tok.col),
    )


def _parse_atom_seq(cur: _Cursor) -> TypeExpr:
    head = _parse_type_atom(cur)
    args: list[TypeExpr] = []
    while (
        cur.at("uident")
        or (cur.at("ident") and cur.tok.text not in KEYWORDS)
        or cur.at("punct", "(")
    ):
        args.append(_parse_type_atom(cur))
    if not args:
        return head
    match head:
        case TApp(h, existing, _):
            return TApp(h, existing + tuple(args), head.pos)
        case TVar():
            raise ParseError(
                "a type parameter cannot be applied to arguments",
                head.pos[0],
                head.pos[1],
                cur.file,
            )
    raise AssertionError


def _parse_type_atom(cur: _Cursor) -> TypeExpr:
    t = cur.tok
    if t.kind == "uident":
        cur.advance()
        return TApp(t.text, (), (t.line, t.col))
    if t.kind == "ident" and t.text not in KEYWORDS:
        cur.advance()
        return TVar(t.text, (t.line, t.col))
    if cur.at("punct", "("):
        open_tok = cur.advance()
        inner = _parse_atom_seq(cur)
        if cur.at("punct", "->"):
            raise ParseError(
                "function types are not permitted in constructor arguments",
                open_tok.line,
                open_tok.col,
                cur.file,
            )
        cur.expect("punct", ")")
        return inner
    raise cur.error(f"expected a type, found {_Cursor._describe(t)}")


def _resolve(program: Program) -> None:
    """Second pass: check declaration names, references and arities."""
    arity: dict[str, int] = {}
    for d in program.decls:
        if d.name in arity:
            raise ParseError(
                f"duplicate declaration name {d.name!r}", d.pos[0], d.pos[1], program.source
            )
        arity[d.name] = len(d.params)
    ctor_owner: dict[str, str] = {}
    for d in program.decls:
        names = set()
        for c in d.ctors:
            if c.name in names:
                raise ParseError(
                    f"duplicate constructor {c.name!r} in {d.name}",
                    c.pos[0],
                    c.pos[1],
                    program.source,
                )
            names.add(c.name)
            if c.name in ctor_owner:
                raise ParseError(
                    f"constructor {c.name!r} already declared by {ctor_owner[c.name]}",
                    c.pos[0],
                    c.pos[1],
                    program.source,
                )
            ctor_owner[c.name] = d.name
            for t in c.args + (c.result,):
                _resolve_type(t, d, arity, program.source)


def _resolve_type(
    t: TypeExpr, decl: TypeDecl, arity: dict[str, int], source: str
) -> None:
    match t:
        case TVar(name, _):
            if name not in decl.params:
                raise ParseError(
                    f"unknown type parameter {name!r}", t.pos[0], t.pos[1], source
                )
        case TApp(head, args, _):
            if head not in arity:
                raise ParseError(
                    f"unknown type constructor {head}", t.pos[0], t.pos[1], source
                )
            if len(args) != arity[head]:
                raise ParseError(
                    f"{head} expects {arity[head]} argument(s), got {len(args)}",
                    t.pos[0],
                    t.pos[1],
                    source,
                )
            for a in args:
                _resolve_type(a, decl, arity, source)


# ---------------------------------------------------------------------------
# Value literals


def parse_value_literal(text: str, program: Program, target: str) -> Value:
    """Parse one value literal; `target` is a type context such as "Bush Nat".

    Only the context's head declaration matters here: it supplies the
    constructors that bracket sugar expands to.  Typing the result against
    the full context is the runtime's job.
    """
    ctx = parse_type_context(target, program)
    if not isinstance(ctx, CtxApp):
        raise ParseError("target type context must name a declaration", 1, 1, "<target>")
    decl = program.decl(ctx.head)
    assert decl is not None
    arities = {c.name: len(c.args) for d in program.decls for c in d.ctors}
    cur = _Cursor(_lex(text, "<value>", keep_newlines=False), "<value>")
    v = _parse_value(cur, arities, decl, allow_args=True)
    cur.expect("eof", what="end of input")
    return v


def _sugar_ctors(decl: TypeDecl, where: Token, file: str | None) -> tuple[str, str]:
    """The (nil-like, cons-like) constructor pair bracket sugar expands to."""
    nils = [c for c in decl.ctors if len(c.args) == 0]
    conses = [c for c in decl.ctors if len(c.args) == 2]
    if len(decl.ctors) != 2 or len(nils) != 1 or len(conses) != 1:
        raise ParseError(
            f"bracket sugar needs {decl.name} to have exactly one nullary and "
            "one binary constructor",
            where.line,
            where.col,
            file,
        )
    return nils[0].name, conses[0].name


def _parse_value(
    cur: _Cursor, arities: dict[str, int], decl: TypeDecl, allow_args: bool
) -> Value:
    t = cur.tok
    if t.kind == "nat":
        cur.advance()
        return VBase(int(t.text), (t.line, t.col))
    if t.kind == "atom":
        cur.advance()
        return VBase(Atom(t.text), (t.line, t.col))
    if cur.at("punct", "["):
        open_tok = cur.advance()
        nil_name, cons_name = _sugar_ctors(decl, open_tok, cur.file)
        elems: list[Value] = []
        if not cur.at("punct", "]"):
            elems.append(_parse_value(cur, arities, decl, allow_args=True))
            while cur.at("punct", ","):
                cur.advance()
                elems.append(_parse_value(cur, arities, decl, allow_args=True))
        cur.expect("punct", "]")
        spine: Value = VCon(nil_name, (), (open_tok.line, open_tok.col))
        for e in reversed(elems):
            spine = VCon(cons_name, (e, spine), (open_tok.line, open_tok.col))
        return spine
    if cur.at("punct", "("):
        cur.advance()
        v = _parse_value(cur, arities, decl, allow_args=True)
        cur.expect("punct", ")")
        return v
    if t.kind == "ident" and t.text not in KEYWORDS:
        cur.advance()
        if t.text not in arities:
            raise cur.error(f"unknown constructor {t.text!r}", t)
        args: list[Value] = []
        if allow_args:
            while cur.tok.kind in ("nat", "atom", "ident") or cur.at("punct", "(") or cur.at("punct", "["):
                if cur.tok.kind == "ident" and cur.tok.text in KEYWORDS:
                    break
                args.append(_parse_value(cur, arities, decl, allow_args=False))
        if len(args) != arities[t.text]:
            raise ParseError(
                f"{t.text} takes {arities[t.text]} argument(s), got {len(args)}",
                t.line,
                t.col,
                cur.file,
            )
        return VCon(t.text, tuple(args), (t.line, t.col))
    raise cur.error(f"expected a value, found {_Cursor._describe(t)}")


# ---------------------------------------------------------------------------
# Type contexts ("Bush Nat", "Dylan (Bob Nat) Atom", ...)


def parse_type_context(text: str, program: Program) -> TypeCtx:
    """Parse a type context: a declared type applied to base universes."""
    cur = _Cursor(_lex(text, "<target>", keep_newlines=False), "<target>")
    ctx = _parse_ctx_app(cur, program)
    cur.expect("eof", what="end of target type")
    return ctx


def _parse_ctx_atom(cur: _Cursor, program: Program) -> TypeCtx:
    t = cur.tok
    if t.kind == "uident":
        if t.text in ("Nat", "Atom"):
            cur.advance()
            return CtxBase("nat" if t.text == "Nat" else "atom")
        decl = program.decl(t.text)
        if decl is None:
            raise cur.error(f"unknown type {t.text} in target context")
        cur.advance()
        if decl.params:
            raise cur.error(f"{t.text} expects {len(decl.params)} argument(s)", t)
        return CtxApp(t.text, ())
    if cur.at("punct", "("):
        cur.advance()
        inner = _parse_ctx_app(cur, program)
        cur.expect("punct", ")")
        return inner
    raise cur.error(f"expected a type context, found {_Cursor._describe(t)}")


def _parse_ctx_app(cur: _Cursor, program: Program) -> TypeCtx:
    t = cur.tok
    if t.kind == "uident" and t.text not in ("Nat", "Atom"):
        decl = program.decl(t.text)
        if decl is None:
            raise cur.error(f"unknown type {t.text} in target context")
        cur.advance()
        args = [_parse_ctx_atom(cur, program) for _ in decl.params]
        return CtxApp(t.text, tuple(args))
    return _parse_ctx_atom(cur, program)


# ---------------------------------------------------------------------------
# Pretty-printers (inverse of the parsers, used for round-trips and reports)


def render_type_expr(t: TypeExpr, atom: bool = False) -> str:
    match t:
        case TVar(name, _):
            return name
        case TApp(head, (), _):
            return head
        case TApp(head, args, _):
            s = " ".join([head] + [render_type_expr(a, atom=True) for a in args])
            return f"({s})" if atom else s
    raise AssertionError


def render_program(program: Program) -> str:
    chunks = []
    for d in program.decls:
        header = " ".join(["data", d.name, *d.params]) + " where"
        lines = [header]
        for c in d.ctors:
            parts = [render_type_expr(t) for t in c.args + (c.result,)]
            lines.append(f"  {c.name} : " + " -> ".join(parts))
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + "\n"


def render_value(v: Value, atom: bool = False) -> str:
    match v:
        case VBase(payload, _):
            return str(payload)
        case VCon(ctor, (), _):
            return ctor
        case VCon(ctor, args, _):
            s = " ".join([ctor] + [render_value(a, atom=True) for a in args])
            return f"({s})" if atom else s
    raise AssertionError


def value_size(v: Value) -> int:
    """Number of constructor nodes; base payloads weigh nothing."""
    match v:
        case VBase():
            return 0
        case VCon(_, args, _):
            return 1 + sum(value_size(a) for a in args)
    raise AssertionError
