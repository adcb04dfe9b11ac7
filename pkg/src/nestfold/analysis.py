"""Program validation, nesting classification, and the index universe.

Each strongly connected component of the type-reference graph becomes a
group.  A group gets one index type: a free term algebra with a nullary
variable constructor per base slot (varA, varB, ...) and one application
constructor per declaration (BushC, BobC, ...).  Every constructor-argument
type then translates to an index expression over that algebra, which is the
data the derived folds dispatch on.
"""

from __future__ import annotations

import itertools
import string
from dataclasses import dataclass, field

from .diagnostics import AnalysisError, Diagnostic
from .parser import Constructor, CtxApp, CtxBase, Program, TApp, TVar, TypeCtx, TypeDecl, TypeExpr


@dataclass(frozen=True)
class IVar:
    """The k-th index variable (a base slot)."""

    k: int


@dataclass(frozen=True)
class IApp:
    """An index application constructor, e.g. BushC i or DylanC i j."""

    ctor: str
    args: tuple["IndexExpr", ...] = ()


IndexExpr = IVar | IApp


@dataclass(frozen=True)
class IndexTypeSpec:
    name: str
    var_ctors: tuple[str, ...]
    app_ctors: tuple[tuple[str, int], ...]  # (constructor name, arity) per decl

    @property
    def base_var_count(self) -> int:
        return len(self.var_ctors)


@dataclass(frozen=True)
class MutualGroup:
    decls: tuple[str, ...]
    base_var_count: int
    classification: str  # "ordinary" | "nested"

    @property
    def nested(self) -> bool:
        return self.classification == "nested"


@dataclass(frozen=True)
class GroupContext:
    """Everything downstream passes need about one group, precomputed."""

    program: Program
    group: MutualGroup
    spec: IndexTypeSpec
    decls: dict[str, TypeDecl] = field(compare=False)
    app_ctor: dict[str, str] = field(compare=False)  # decl name -> index ctor
    decl_of_app: dict[str, str] = field(compare=False)  # index ctor -> decl name
    owner: dict[str, str] = field(compare=False)  # value ctor -> decl name
    arg_templates: dict[str, tuple[IndexExpr, ...]] = field(compare=False)

    @property
    def name(self) -> str:
        return "".join(self.group.decls)

    def ctors(self) -> list[tuple[TypeDecl, Constructor]]:
        """All (decl, constructor) pairs, declaration order then source order."""
        return [(d, c) for n in self.group.decls for d in [self.decls[n]] for c in d.ctors]


# ---------------------------------------------------------------------------
# Validation


def well_formed(program: Program) -> list[Diagnostic]:
    """Re-check name resolution and the result-shape rule, collecting all errors.

    parse_program already enforces most of this; programs built directly as
    ASTs come through unchecked, so everything is verified again here.
    """
    out: list[Diagnostic] = []

    def report(msg: str, pos: tuple[int, int] | None) -> None:
        line, col = pos if pos else (None, None)
        out.append(Diagnostic(msg, "error", line, col, program.source))

    arity: dict[str, int] = {}
    for d in program.decls:
        if d.name in arity:
            report(f"duplicate declaration name {d.name!r}", d.pos)
        arity[d.name] = len(d.params)

    def check_type(t: TypeExpr, decl: TypeDecl) -> None:
        match t:
            case TVar(name):
                if name not in decl.params:
                    report(f"unknown type parameter {name!r}", t.pos)
            case TApp(head, args):
                if head not in arity:
                    report(f"unknown type constructor {head}", t.pos)
                elif len(args) != arity[head]:
                    report(
                        f"{head} expects {arity[head]} argument(s), got {len(args)}",
                        t.pos,
                    )
                for a in args:
                    check_type(a, decl)

    ctor_owner: dict[str, str] = {}
    for d in program.decls:
        if len(set(d.params)) != len(d.params):
            report(f"duplicate type parameter in {d.name}", d.pos)
        if not d.ctors:
            report(f"declaration {d.name} has no constructors", d.pos)
        expected = TApp(d.name, tuple(TVar(p) for p in d.params))
        for c in d.ctors:
            if c.name in ctor_owner:
                report(
                    f"constructor {c.name!r} already declared by {ctor_owner[c.name]}",
                    c.pos,
                )
            else:
                ctor_owner[c.name] = d.name
            for t in c.args:
                check_type(t, d)
            check_type(c.result, d)
            if c.result != expected:
                report(
                    "constructor result must be the declared head applied to "
                    f"its parameters ({c.name} : ... -> "
                    f"{_render_expected(d)})",
                    c.pos,
                )
    return out


def _render_expected(d: TypeDecl) -> str:
    return " ".join([d.name, *d.params])


# ---------------------------------------------------------------------------
# Classification


def classify(program: Program) -> list[MutualGroup]:
    """SCCs of the reference graph, dependencies first, source order otherwise."""
    order = [d.name for d in program.decls]
    edges: dict[str, list[str]] = {n: [] for n in order}
    for d in program.decls:
        seen: set[str] = set()
        for c in d.ctors:
            for t in c.args:
                for head in _heads(t):
                    if head in edges and head not in seen:
                        seen.add(head)
                        edges[d.name].append(head)

    groups = []
    for comp in _sccs(order, edges):
        members = tuple(sorted(comp, key=order.index))
        decls = [program.decl(n) for n in members]
        base_vars = max((len(d.params) for d in decls), default=0)
        cls = "nested" if _is_nested(decls, set(members)) else "ordinary"
        groups.append(MutualGroup(members, base_vars, cls))
    return groups


def _heads(t: TypeExpr) -> list[str]:
    match t:
        case TVar():
            return []
        case TApp(head, args):
            return [head] + [h for a in args for h in _heads(a)]
    raise AssertionError


def _is_nested(decls: list[TypeDecl], members: set[str]) -> bool:
    """A group is nested iff some constructor argument applies a member to
    anything but exactly that member's own parameter list."""
    by_name = {d.name: d for d in decls}

    def irregular(t: TypeExpr) -> bool:
        match t:
            case TVar():
                return False
            case TApp(head, args):
                if head in members:
                    own = tuple(TVar(p) for p in by_name[head].params)
                    if args != own:
                        return True
                return any(irregular(a) for a in args)
        raise AssertionError

    return any(irregular(t) for d in decls for c in d.ctors for t in c.args)


def _sccs(names: list[str], edges: dict[str, list[str]]) -> list[list[str]]:
    """Tarjan's algorithm; components come out dependencies-first."""
    counter = itertools.count()
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    stack: list[str] = []
    on_stack: set[str] = set()
    out: list[list[str]] = []

    def visit(v: str) -> None:
        index[v] = low[v] = next(counter)
        stack.append(v)
        on_stack.add(v)
        for w in edges[v]:
            if w not in index:
                visit(w)
                low[v] = min(low[v], low[w])
            elif w in on_stack:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = []
            while True:
                w = stack.pop()
                on_stack.discard(w)
                comp.append(w)
                if w == v:
                    break
            out.append(comp)

    for v in names:
        if v not in index:
            visit(v)
    return out


# ---------------------------------------------------------------------------
# The index universe


def index_universe(program: Program, group: MutualGroup) -> IndexTypeSpec:
    if group.base_var_count > 26:
        raise AnalysisError(
            f"group {'/'.join(group.decls)} needs {group.base_var_count} index "
            "variables; only varA..varZ are available"
        )
    var_ctors = tuple(
        "var" + string.ascii_uppercase[i] for i in range(group.base_var_count)
    )
    app_ctors = []
    for name in group.decls:
        decl = program.decl(name)
        assert decl is not None
        app_ctors.append((name + "C", len(decl.params)))
    return IndexTypeSpec("".join(group.decls) + "Index", var_ctors, tuple(app_ctors))


def type_to_index(
    t: TypeExpr, params: tuple[str, ...], members: dict[str, str]
) -> IndexExpr:
    """Translate a constructor-argument type to an index expression.

    `params` is the owning declaration's parameter list (positional), and
    `members` maps each group member to its index application constructor.
    """
    match t:
        case TVar(name):
            return IVar(params.index(name))
        case TApp(head, args):
            if head not in members:
                raise AnalysisError("cross-group nesting not supported in v1")
            return IApp(head + "C", tuple(type_to_index(a, params, members) for a in args))
    raise AssertionError


def group_context(program: Program, group: MutualGroup) -> GroupContext:
    spec = index_universe(program, group)
    decls = {}
    for n in group.decls:
        d = program.decl(n)
        assert d is not None
        decls[n] = d
    app_ctor = {n: n + "C" for n in group.decls}
    decl_of_app = {v: k for k, v in app_ctor.items()}
    owner: dict[str, str] = {}
    templates: dict[str, tuple[IndexExpr, ...]] = {}
    for n in group.decls:
        d = decls[n]
        for c in d.ctors:
            owner[c.name] = n
            templates[c.name] = tuple(
                type_to_index(t, d.params, app_ctor) for t in c.args
            )
    return GroupContext(program, group, spec, decls, app_ctor, decl_of_app, owner, templates)


def analyze(program: Program) -> list[GroupContext]:
    """Validate and split a program into per-group contexts."""
    diags = well_formed(program)
    if diags:
        raise AnalysisError("; ".join(d.render() for d in diags))
    return [group_context(program, g) for g in classify(program)]


# ---------------------------------------------------------------------------
# Working with index expressions


def subst_index(e: IndexExpr, iargs: tuple[IndexExpr, ...]) -> IndexExpr:
    match e:
        case IVar(k):
            return iargs[k]
        case IApp(ctor, args):
            return IApp(ctor, tuple(subst_index(a, iargs) for a in args))
    raise AssertionError


def index_depth(e: IndexExpr) -> int:
    match e:
        case IVar():
            return 0
        case IApp(_, args):
            return 1 + max((index_depth(a) for a in args), default=0)
    raise AssertionError


def render_index(e: IndexExpr, spec: IndexTypeSpec, atom: bool = False) -> str:
    match e:
        case IVar(k):
            return spec.var_ctors[k]
        case IApp(ctor, ()):
            return ctor
        case IApp(ctor, args):
            s = " ".join([ctor] + [render_index(a, spec, atom=True) for a in args])
            return f"({s})" if atom else s
    raise AssertionError


def enumerate_indices(spec: IndexTypeSpec, max_depth: int) -> list[IndexExpr]:
    """All index expressions of depth <= max_depth, depth-then-spec order."""
    by_depth: list[list[IndexExpr]] = [[IVar(k) for k in range(spec.base_var_count)]]
    for d in range(1, max_depth + 1):
        shallower = [e for tier in by_depth for e in tier]
        tier = []
        for ctor, arity in spec.app_ctors:
            for combo in itertools.product(shallower, repeat=arity):
                e = IApp(ctor, combo)
                if index_depth(e) == d:
                    tier.append(e)
        by_depth.append(tier)
    return [e for tier in by_depth for e in tier]


def bush_shape(ctx: GroupContext) -> tuple[str, str] | None:
    """(nullary ctor, cons ctor) when the group is a single self-nesting
    list-of-bushes declaration; None otherwise."""
    if len(ctx.group.decls) != 1:
        return None
    decl = ctx.decls[ctx.group.decls[0]]
    if len(decl.params) != 1 or len(decl.ctors) != 2:
        return None
    nils = [c for c in decl.ctors if ctx.arg_templates[c.name] == ()]
    dc = ctx.app_ctor[decl.name]
    deep = (IVar(0), IApp(dc, (IApp(dc, (IVar(0),)),)))
    conses = [c for c in decl.ctors if ctx.arg_templates[c.name] == deep]
    if len(nils) == 1 and len(conses) == 1:
        return nils[0].name, conses[0].name
    return None


def context_to_index(
    ctx: TypeCtx, group_ctx: GroupContext
) -> tuple[IndexExpr, dict[int, str]]:
    """Translate a type context to (index, base-universe assignment).

    Distinct base universes are assigned to index variables in order of
    first appearance; unused variables default to naturals.
    """
    spec = group_ctx.spec
    assignment: dict[str, int] = {}

    def go(c: TypeCtx) -> IndexExpr:
        match c:
            case CtxBase(kind):
                if kind not in assignment:
                    if len(assignment) >= spec.base_var_count:
                        raise AnalysisError(
                            f"target type uses more than {spec.base_var_count} "
                            "distinct base universes"
                        )
                    assignment[kind] = len(assignment)
                return IVar(assignment[kind])
            case CtxApp(head, args):
                if head not in group_ctx.app_ctor:
                    raise AnalysisError(
                        f"type {head} does not belong to group {group_ctx.name}"
                    )
                return IApp(group_ctx.app_ctor[head], tuple(go(a) for a in args))
        raise AssertionError

    idx = go(ctx)
    universes = {v: k for k, v in assignment.items()}
    for k in range(spec.base_var_count):
        universes.setdefault(k, "nat")
    return idx, universes
