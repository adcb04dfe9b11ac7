"""Execute derived folds on concrete values.

Carriers are represented by RuntimeResult: naturals, value trees, or opaque
functions.  Functions are only ever observed by application — equality
checks must drive them to a first-order result first.

The two *direct* evaluators (eval_hfold_direct, eval_hmap_direct) transcribe
the non-structural recursions verbatim and exist purely as oracles for the
derived routes; they work on hybrid trees whose payload slots may already
hold carrier results, and they carry a depth guard so that an implementation
bug shows up as GuardExceeded instead of a hang.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

from .analysis import (
    GroupContext,
    IApp,
    IndexExpr,
    IVar,
    bush_shape,
    index_depth,
    subst_index,
)
from .diagnostics import Diagnostic, EvalError, GuardExceeded
from .parser import NAT_MAX, Atom, Value, VBase, VCon, render_value, value_size


# ---------------------------------------------------------------------------
# Results and naturals


@dataclass(frozen=True)
class RNat:
    n: int


@dataclass(frozen=True)
class RTree:
    value: Value


@dataclass(frozen=True, eq=False)
class RFun:
    fn: Callable

    def __eq__(self, other):
        raise EvalError("function results are only compared after application")

    __hash__ = None


RuntimeResult = RNat | RTree | RFun


def nat_add(m: int, n: int) -> int:
    s = m + n
    if s > NAT_MAX:
        raise EvalError(f"natural overflow: {m} + {n} exceeds 64 bits")
    return s


def nat_succ(n: int) -> int:
    return nat_add(n, 1)


def wrap(x: Value | RuntimeResult) -> RuntimeResult:
    if isinstance(x, (RNat, RTree, RFun)):
        return x
    if isinstance(x, VBase) and isinstance(x.payload, int):
        return RNat(x.payload)
    return RTree(x)


def as_value(r: Value | RuntimeResult) -> Value:
    match r:
        case RNat(n):
            return VBase(n)
        case RTree(v):
            return v
        case RFun():
            raise EvalError("a function result has no value form; apply it first")
        case VBase() | VCon():
            return r
    raise AssertionError


def apply_result(f: RuntimeResult, x: RuntimeResult) -> RuntimeResult:
    if not isinstance(f, RFun):
        raise EvalError("applied a non-function result")
    return f.fn(x)


def nat_of(r: RuntimeResult) -> int:
    if not isinstance(r, RNat):
        raise EvalError("expected a natural-valued result")
    return r.n


# ---------------------------------------------------------------------------
# Algebras


@dataclass(frozen=True)
class Algebra:
    """Methods receive (index arguments, folded argument results)."""

    name: str
    result_type: str  # "nat" | "tree" | "fun"
    bases: dict[int, Callable[[Value], RuntimeResult]] = field(compare=False)
    methods: dict[
        str, Callable[[tuple[IndexExpr, ...], tuple[RuntimeResult, ...]], RuntimeResult]
    ] = field(compare=False)


@dataclass(frozen=True)
class DepAlgebra:
    """Induction methods additionally receive the examined sub-values."""

    bases: dict[int, Callable[[Value], RuntimeResult]] = field(compare=False)
    methods: dict[
        str,
        Callable[
            [tuple[IndexExpr, ...], tuple[Value, ...], tuple[RuntimeResult, ...]],
            RuntimeResult,
        ],
    ] = field(compare=False)


@dataclass(frozen=True)
class HAlgebra:
    """A higher-order fold algebra plus the driver that makes its results
    first-order for comparisons (identity except for function carriers)."""

    name: str
    methods: dict[str, Callable] = field(compare=False)
    finish: Callable[[RuntimeResult], RuntimeResult] = field(compare=False)


@dataclass
class CallCounter:
    """Counts recursive fold calls that descend into a constructor node."""

    calls: int = 0


def check_algebra(ctx: GroupContext, alg: Algebra | DepAlgebra) -> None:
    missing = [k for k in range(ctx.spec.base_var_count) if k not in alg.bases]
    if missing:
        raise EvalError(f"algebra is missing base functions for slots {missing}")
    for _, c in ctx.ctors():
        if c.name not in alg.methods:
            raise EvalError(f"algebra is missing a method for constructor {c.name}")


# ---------------------------------------------------------------------------
# Value typing


def typecheck_value(
    ctx: GroupContext, idx: IndexExpr, universes: dict[int, str], v: Value
) -> list[Diagnostic]:
    """Check that v inhabits the interpretation of idx."""
    out: list[Diagnostic] = []

    def report(msg: str, at: Value) -> None:
        line, col = at.pos if at.pos else (None, None)
        out.append(Diagnostic(msg, "error", line, col))

    def go(i: IndexExpr, w: Value) -> None:
        match i:
            case IVar(k):
                kind = universes.get(k, "nat")
                match w:
                    case VBase(payload):
                        is_nat = isinstance(payload, int)
                        if kind == "nat" and not is_nat:
                            report(f"expected a natural, found {payload}", w)
                        elif kind == "atom" and is_nat:
                            report(f"expected an atom, found {payload}", w)
                    case VCon(c, _):
                        report(
                            f"expected a base value at {ctx.spec.var_ctors[k]}, "
                            f"found constructor {c!r}",
                            w,
                        )
            case IApp(ic, iargs):
                decl = ctx.decl_of_app[ic]
                match w:
                    case VBase(payload):
                        report(f"expected a {decl} constructor, found base value {payload}", w)
                    case VCon(c, args):
                        if ctx.owner.get(c) != decl:
                            report(f"expected a {decl} constructor, found {c!r}", w)
                            return
                        for tmpl, sub in zip(ctx.arg_templates[c], args):
                            go(subst_index(tmpl, iargs), sub)

    go(idx, v)
    return out


# ---------------------------------------------------------------------------
# The dependently typed fold and its relatives


def eval_nfold(
    ctx: GroupContext,
    alg: Algebra,
    idx: IndexExpr,
    v: Value,
    counter: CallCounter | None = None,
) -> RuntimeResult:
    check_algebra(ctx, alg)
    return _nfold(ctx, alg, idx, v, counter)


def _nfold(ctx, alg, idx, v, counter):
    match idx:
        case IVar(k):
            return alg.bases[k](v)
        case IApp(ic, iargs):
            decl = ctx.decl_of_app[ic]
            if not isinstance(v, VCon) or ctx.owner.get(v.ctor) != decl:
                raise EvalError(
                    f"value {render_value(v)} does not inhabit a {decl} index"
                )
            rs = []
            for tmpl, sub in zip(ctx.arg_templates[v.ctor], v.args):
                if counter is not None and isinstance(sub, VCon):
                    counter.calls += 1
                rs.append(_nfold(ctx, alg, subst_index(tmpl, iargs), sub, counter))
            return alg.methods[v.ctor](iargs, tuple(rs))
    raise AssertionError


def eval_map(
    ctx: GroupContext,
    fs: dict[int, Callable[[Value], Value]],
    idx: IndexExpr,
    v: Value,
    counter: CallCounter | None = None,
) -> Value:
    """The derived map: the fold whose methods rebuild their constructor."""
    alg = Algebra(
        "map",
        "tree",
        bases={k: (lambda g: lambda w: RTree(g(w)))(g) for k, g in fs.items()},
        methods={
            c.name: (lambda name: lambda iargs, rs: RTree(
                VCon(name, tuple(as_value(r) for r in rs))
            ))(c.name)
            for _, c in ctx.ctors()
        },
    )
    return as_value(eval_nfold(ctx, alg, idx, v, counter))


def eval_ind(
    ctx: GroupContext,
    dep: DepAlgebra,
    idx: IndexExpr,
    v: Value,
    counter: CallCounter | None = None,
) -> RuntimeResult:
    check_algebra(ctx, dep)

    def go(i: IndexExpr, w: Value) -> RuntimeResult:
        match i:
            case IVar(k):
                return dep.bases[k](w)
            case IApp(ic, iargs):
                decl = ctx.decl_of_app[ic]
                if not isinstance(w, VCon) or ctx.owner.get(w.ctor) != decl:
                    raise EvalError(
                        f"value {render_value(w)} does not inhabit a {decl} index"
                    )
                rs = []
                for tmpl, sub in zip(ctx.arg_templates[w.ctor], w.args):
                    if counter is not None and isinstance(sub, VCon):
                        counter.calls += 1
                    rs.append(go(subst_index(tmpl, iargs), sub))
                return dep.methods[w.ctor](iargs, w.args, tuple(rs))
        raise AssertionError

    return go(idx, v)


# ---------------------------------------------------------------------------
# Higher-order folds: the derived route and the direct oracles


_bush_shape = bush_shape


def _spine_shape(ctx: GroupContext) -> tuple[str, str] | None:
    """(nullary ctor, binary ctor) for list- or bush-shaped single decls."""
    if len(ctx.group.decls) != 1:
        return None
    decl = ctx.decls[ctx.group.decls[0]]
    if len(decl.ctors) != 2:
        return None
    nils = [c for c in decl.ctors if len(c.args) == 0]
    twos = [c for c in decl.ctors if len(c.args) == 2]
    if len(nils) == 1 and len(twos) == 1:
        return nils[0].name, twos[0].name
    return None


def default_guard(v: Value, idx_depth: int = 0) -> int:
    return 10 * (value_size(v) + idx_depth) + 100


@dataclass(frozen=True)
class _HWrap:
    """A carrier result sitting in a payload slot of a hybrid tree."""

    result: RuntimeResult


def _slot_result(x) -> RuntimeResult:
    return x.result if isinstance(x, _HWrap) else wrap(x)


def eval_hfold_via_nfold(
    ctx: GroupContext, halg: HAlgebra, decl_name: str, v: Value
) -> RuntimeResult:
    """hfold as nfold at the declaration's own index with identity bases."""
    decl = ctx.decls[decl_name]
    alg = Algebra(
        f"hfold-{halg.name}",
        "fun",
        bases={k: wrap for k in range(ctx.spec.base_var_count)},
        methods={
            c.name: (lambda m: lambda iargs, rs: m(*rs))(halg.methods[c.name])
            for _, c in ctx.ctors()
        },
    )
    idx = IApp(ctx.app_ctor[decl_name], tuple(IVar(k) for k in range(len(decl.params))))
    return eval_nfold(ctx, alg, idx, v)


def eval_hfold_direct(
    ctx: GroupContext, halg: HAlgebra, v: Value, guard: int | None = None
) -> RuntimeResult:
    """The introduction's non-structural recursion, transcribed literally."""
    shape = _bush_shape(ctx)
    if shape is None:
        raise EvalError("the direct higher-order fold needs a bush-shaped declaration")
    nil, cons = shape
    limit = default_guard(v) if guard is None else guard
    lm, cm = halg.methods[nil], halg.methods[cons]

    def go(t, depth: int) -> RuntimeResult:
        _tick(depth, limit)
        match t:
            case VCon(c, ()) if c == nil:
                return lm()
            case VCon(c, (x, xs)) if c == cons:
                mapped = _hybrid_map(
                    lambda s: _HWrap(go(s, depth + 1)), xs, nil, cons, depth + 1, limit
                )
                return cm(_slot_result(x), go(mapped, depth + 1))
        raise EvalError(f"direct fold met a foreign node {t!r}")

    return go(v, 0)


def _hybrid_map(f, t, nil, cons, depth, limit):
    _tick(depth, limit)
    match t:
        case VCon(c, ()) if c == nil:
            return t
        case VCon(c, (x, xs)) if c == cons:
            inner = lambda s: _hybrid_map(f, s, nil, cons, depth + 1, limit)
            return VCon(cons, (f(x), _hybrid_map(inner, xs, nil, cons, depth + 1, limit)))
    raise EvalError(f"direct map met a foreign node {t!r}")


def _tick(depth: int, limit: int) -> None:
    if depth > limit:
        raise GuardExceeded(
            f"direct-recursion depth exceeded {limit}; this is a bug in the "
            "evaluator, not in the input"
        )


def eval_hmap_direct(
    ctx: GroupContext, f: Callable[[Value], Value], v: Value, guard: int | None = None
) -> Value:
    """First-order direct map: hmap f (cons x xs) = cons (f x) (hmap (hmap f) xs)."""
    shape = _bush_shape(ctx)
    if shape is None:
        raise EvalError("the direct map needs a bush-shaped declaration")
    nil, cons = shape
    limit = default_guard(v) if guard is None else guard

    def go(g: Callable[[Value], Value], t: Value, depth: int) -> Value:
        _tick(depth, limit)
        match t:
            case VCon(c, ()) if c == nil:
                return t
            case VCon(c, (x, xs)) if c == cons:
                return VCon(cons, (g(x), go(lambda s: go(g, s, depth + 1), xs, depth + 1)))
        raise EvalError(f"direct map met a foreign node {t!r}")

    return go(f, v, 0)


# ---------------------------------------------------------------------------
# nfold' — the round trip through the function-space carrier


def eval_nfold_prime(
    ctx: GroupContext, alg: Algebra, idx: IndexExpr, v: Value
) -> RuntimeResult:
    """Evaluate by lifting into the function-space carrier and projecting out.

    The carrier for one level is a function taking a level number and a
    continuation for the level below; lifting folds every level of the value
    into such functions, and the projection peels them off level by level.
    """
    check_algebra(ctx, alg)
    shape = _bush_shape(ctx)
    if shape is None:
        raise EvalError("the function-space route needs a bush-shaped declaration")
    nil, cons = shape
    dc = ctx.app_ctor[ctx.group.decls[0]]
    depth = index_depth(idx)
    if idx != _nat_to_index(dc, depth):
        raise EvalError("index must be an iterated application over the base slot")
    limit = default_guard(v, depth)

    def method(name, iargs, rs):
        return alg.methods[name](iargs, rs)

    def fold_ps(t, d: int) -> RuntimeResult:
        _tick(d, limit)
        match t:
            case VCon(c, ()) if c == nil:
                return RFun(
                    lambda n: RFun(
                        lambda tr: method(nil, (_nat_to_index(dc, nat_of(n)),), ())
                    )
                )
            case VCon(c, (x, xs)) if c == cons:
                mapped = _hybrid_map(
                    lambda s: _HWrap(fold_ps(s, d + 1)), xs, nil, cons, d + 1, limit
                )
                xs_r = fold_ps(mapped, d + 1)
                x_slot = x

                def at_level(n):
                    def with_continuation(tr):
                        r1 = apply_result(tr, _slot_result(x_slot))
                        deeper = apply_result(
                            apply_result(xs_r, RNat(nat_succ(nat_of(n)))),
                            RFun(lambda f: apply_result(apply_result(f, n), tr)),
                        )
                        return method(cons, (_nat_to_index(dc, nat_of(n)),), (r1, deeper))

                    return RFun(with_continuation)

                return RFun(at_level)
        raise EvalError(f"function-space fold met a foreign node {t!r}")

    def lift(d: int, t):
        if d == 0:
            return t
        mapped = _hybrid_map(
            lambda s: _as_slot(lift(d - 1, s)), t, nil, cons, 1, limit
        )
        return fold_ps(mapped, 0)

    def ps_to_p(m: int, x) -> RuntimeResult:
        if m == 0:
            return alg.bases[0](as_value(_slot_result(x)))
        hyp = _slot_result(x)
        return apply_result(
            apply_result(hyp, RNat(m - 1)), RFun(lambda r: ps_to_p(m - 1, r))
        )

    return ps_to_p(depth, lift(depth, v))


def _as_slot(x):
    return _HWrap(x) if isinstance(x, (RNat, RTree, RFun)) else x


def _nat_to_index(dc: str, n: int) -> IndexExpr:
    idx: IndexExpr = IVar(0)
    for _ in range(n):
        idx = IApp(dc, (idx,))
    return idx


# ---------------------------------------------------------------------------
# Exhaustive enumeration


def enumerate_values(
    ctx: GroupContext,
    idx: IndexExpr,
    pool: dict[int, tuple[Value, ...]],
    max_size: int,
) -> list[Value]:
    """Every value of idx with at most max_size constructor nodes,
    sizes ascending, then constructor order, then argument order."""
    memo: dict[tuple[IndexExpr, int], tuple[Value, ...]] = {}

    def exact(i: IndexExpr, size: int) -> tuple[Value, ...]:
        key = (i, size)
        if key in memo:
            return memo[key]
        out: list[Value] = []
        match i:
            case IVar(k):
                if size == 0:
                    out.extend(pool[k])
            case IApp(ic, iargs):
                if size > 0:
                    decl = ctx.decl_of_app[ic]
                    for c in ctx.decls[decl].ctors:
                        templates = [
                            subst_index(t, iargs) for t in ctx.arg_templates[c.name]
                        ]
                        for split in _splits(size - 1, len(templates)):
                            pools = [exact(t, s) for t, s in zip(templates, split)]
                            for combo in itertools.product(*pools):
                                out.append(VCon(c.name, combo))
        memo[key] = tuple(out)
        return memo[key]

    return [v for s in range(max_size + 1) for v in exact(idx, s)]


def _splits(total: int, parts: int):
    """Compositions of `total` into `parts` ordered slots, lexicographic."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _splits(total - first, parts - 1):
            yield (first, *rest)


# ---------------------------------------------------------------------------
# The algebra catalogue


def _encode_index(e: IndexExpr, ctx: GroupContext) -> Value:
    match e:
        case IVar(k):
            return VBase(Atom(ctx.spec.var_ctors[k]))
        case IApp(c, args):
            return VCon("@" + c, tuple(_encode_index(a, ctx) for a in args))
    raise AssertionError


def catalogue(ctx: GroupContext) -> dict[str, Algebra]:
    """The fixed algebras the property suite runs every theorem against."""
    algs: dict[str, Algebra] = {}
    every_var = range(ctx.spec.base_var_count)

    def nat_base(v: Value) -> RuntimeResult:
        if not (isinstance(v, VBase) and isinstance(v.payload, int)):
            raise EvalError(f"sum needs a natural at a base slot, found {render_value(v)}")
        return RNat(v.payload)

    algs["sum"] = Algebra(
        "sum",
        "nat",
        bases={k: nat_base for k in every_var},
        methods={
            c.name: lambda iargs, rs: RNat(
                _fold_nat_add(nat_of(r) for r in rs)
            )
            for _, c in ctx.ctors()
        },
    )

    algs["depth"] = Algebra(
        "depth",
        "nat",
        bases={k: (lambda v: RNat(0)) for k in every_var},
        methods={
            c.name: lambda iargs, rs: RNat(
                nat_succ(max((nat_of(r) for r in rs), default=0)) if rs else 0
            )
            for _, c in ctx.ctors()
        },
    )

    algs["trace"] = Algebra(
        "trace",
        "tree",
        bases={
            k: (lambda k: lambda v: RTree(VCon("@" + ctx.spec.var_ctors[k], (v,))))(k)
            for k in every_var
        },
        methods={
            c.name: (lambda name: lambda iargs, rs: RTree(
                VCon(
                    "@" + name,
                    tuple(_encode_index(i, ctx) for i in iargs)
                    + tuple(as_value(r) for r in rs),
                )
            ))(c.name)
            for _, c in ctx.ctors()
        },
    )

    spine = _spine_shape(ctx)
    if spine is not None:
        nil, two = spine
        algs["length"] = Algebra(
            "length",
            "nat",
            bases={k: (lambda v: RNat(0)) for k in every_var},
            methods={
                nil: lambda iargs, rs: RNat(0),
                two: lambda iargs, rs: RNat(nat_succ(nat_of(rs[1]))),
            },
        )
    return algs


def _fold_nat_add(ns) -> int:
    total = 0
    for n in ns:
        total = nat_add(total, n)
    return total


def halg_catalogue(ctx: GroupContext) -> dict[str, HAlgebra]:
    """Higher-order algebras for the conformance checks (bush shape only)."""
    shape = _bush_shape(ctx)
    if shape is None:
        return {}
    nil, cons = shape
    out: dict[str, HAlgebra] = {}

    out["sum-naive"] = HAlgebra(
        "sum-naive",
        methods={
            nil: lambda: RNat(0),
            cons: lambda x, r: RNat(nat_add(nat_of(x), nat_of(r))),
        },
        finish=lambda r: r,
    )

    out["rebuild"] = HAlgebra(
        "rebuild",
        methods={
            nil: lambda: RTree(VCon(nil)),
            cons: lambda x, r: RTree(VCon(cons, (as_value(x), as_value(r)))),
        },
        finish=lambda r: r,
    )

    def cps_cons(x, xs):
        return RFun(
            lambda k: RNat(
                nat_add(
                    nat_of(apply_result(k, x)),
                    nat_of(
                        apply_result(xs, RFun(lambda r: apply_result(r, k)))
                    ),
                )
            )
        )

    out["cps-sum"] = HAlgebra(
        "cps-sum",
        methods={nil: lambda: RFun(lambda k: RNat(0)), cons: cps_cons},
        finish=lambda r: apply_result(r, RFun(lambda x: x)),
    )
    return out
