"""Derive folds, induction principles, maps, and the PS bridge as ASTs.

Every derived artifact is a small language-neutral term language (Term,
Pattern, Clause) so the emitter can render it without re-deciding a single
naming or shape question here.  Builders run in one of two modes:

* general mode indexes a group by its own free term algebra (varA, BushC...),
* nat mode specializes one-declaration one-parameter groups to a plain
  natural-number depth index (zero, succ).

Names are part of the derived contract: the same group always yields the
same trees, and the erasure check below compares signatures syntactically.
"""

from __future__ import annotations

from dataclasses import dataclass

from .analysis import GroupContext, IApp, IndexExpr, IVar, bush_shape
from .diagnostics import DerivationError, PsBridgeError
from .parser import Constructor, TApp, TVar, TypeDecl, TypeExpr

# ---------------------------------------------------------------------------
# Term and pattern language


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class App:
    """Application with a flattened argument spine."""

    fn: "Term"
    args: tuple["Term", ...]


@dataclass(frozen=True)
class Lam:
    params: tuple[str, ...]
    body: "Term"


@dataclass(frozen=True)
class Binder:
    """A named function-space segment; type None renders as a bare forall."""

    names: tuple[str, ...]
    type: "Term | None"
    implicit: bool = False


@dataclass(frozen=True)
class Pi:
    """A function type: binders and anonymous domains, last segment codomain."""

    segments: tuple["Binder | Term", ...]


Term = Var | App | Lam | Pi


@dataclass(frozen=True)
class PVar:
    name: str
    implicit: bool = False


@dataclass(frozen=True)
class PCon:
    head: str
    args: tuple["Pattern", ...] = ()


Pattern = PVar | PCon


@dataclass(frozen=True)
class Clause:
    patterns: tuple[Pattern, ...]
    body: Term
    wheres: tuple["DerivedDef", ...] = ()


@dataclass(frozen=True)
class DataDecl:
    params: tuple[str, ...]
    ctors: tuple[tuple[str, Term], ...]
    forward: bool = False


@dataclass(frozen=True)
class DerivedDef:
    """One emitted definition: a data declaration or a signature plus clauses."""

    name: str
    role: str
    signature: Term | None = None
    clauses: tuple[Clause, ...] = ()
    data: DataDecl | None = None


@dataclass(frozen=True)
class DerivedGroup:
    name: str
    defs: tuple[DerivedDef, ...]
    notes: tuple[str, ...] = ()


SET = Var("Set")


def _ap(fn: Term, *args: Term) -> Term:
    if not args:
        return fn
    if isinstance(fn, App):
        return App(fn.fn, fn.args + tuple(args))
    return App(fn, tuple(args))


def _v(name: str, *args: Term) -> Term:
    return _ap(Var(name), *args)


def _arrow(tys: list[Term]) -> Term:
    return tys[0] if len(tys) == 1 else Pi(tuple(tys))


# ---------------------------------------------------------------------------
# Naming and index-translation tables, per (group, mode)


def nat_index_eligible(ctx: GroupContext) -> bool:
    """Nat mode collapses the index algebra to depths; that needs one
    declaration with one base slot."""
    return len(ctx.group.decls) == 1 and ctx.group.base_var_count == 1


# short names the nat mode hands out elsewhere, so single-letter method
# names must steer clear of them
_NAT_TAKEN = frozenset("pabzfmnij") | {"x", "xs"}


class _Names:
    """Every name and index-rendering choice for one derivation run."""

    def __init__(self, ctx: GroupContext, nat: bool):
        self.ctx = ctx
        self.nat = nat
        self.index_name = "Nat" if nat else ctx.spec.name
        self.var_ctors = ("zero",) if nat else ctx.spec.var_ctors
        self.base_types = tuple(vc[3:].lower() for vc in ctx.spec.var_ctors) if not nat else ("a",)
        self.base_fns = ("z",) if nat else tuple("base" + vc[3:] for vc in ctx.spec.var_ctors)
        self.method: dict[str, str] = {}
        used = set(_NAT_TAKEN)
        for _, c in ctx.ctors():
            if nat:
                cand = c.name[0]
                if cand in used:
                    cand = c.name + "'"
            else:
                cand = c.name + "'"
            used.add(cand)
            self.method[c.name] = cand

    def ivars(self, arity: int) -> tuple[str, ...]:
        if self.nat:
            return ("n",)
        if arity == 1:
            return ("i",)
        if arity == 2:
            return ("i", "j")
        return tuple(f"i{k + 1}" for k in range(arity))

    @property
    def ivar(self) -> str:
        return self.ivars(1)[0]

    def value_vars(self, m: int) -> tuple[str, ...]:
        if m == 1:
            return ("x",)
        if self.nat and m == 2:
            return ("x", "xs")
        return tuple(f"x{k + 1}" for k in range(m))

    def index_term(self, e: IndexExpr, env: dict[int, Term]) -> Term:
        match e:
            case IVar(k):
                return env[k]
            case IApp(ctor, args):
                head = "succ" if self.nat else ctor
                return _v(head, *(self.index_term(a, env) for a in args))
        raise AssertionError

    def index_pattern(self, decl: str, ivs: tuple[str, ...]) -> PCon:
        head = "succ" if self.nat else self.ctx.app_ctor[decl]
        return PCon(head, tuple(PVar(v) for v in ivs))

    def var_pattern(self, k: int) -> PCon:
        return PCon(self.var_ctors[k])

    def interp(self, carriers: list[Term], bases: list[Term], ix: Term) -> Term:
        if self.nat:
            return _v("NTimes", ix, carriers[0], bases[0])
        return _v("I", *carriers, *bases, ix)

    def result_index(self, decl: TypeDecl, env: dict[int, Term]) -> Term:
        tmpl = IApp(self.ctx.app_ctor[decl.name], tuple(IVar(k) for k in range(len(decl.params))))
        return self.index_term(tmpl, env)


def _names(ctx: GroupContext, nat: bool) -> _Names:
    if nat and not nat_index_eligible(ctx):
        raise DerivationError(
            "nat-index mode needs exactly one declaration with one parameter, "
            f"but the {ctx.name} group has {len(ctx.group.decls)} declaration(s) "
            f"with {ctx.group.base_var_count} base slot(s)"
        )
    return _Names(ctx, nat)


# ---------------------------------------------------------------------------
# Index universe and source data declarations


def derive_index_decl(ctx: GroupContext, nat_index: bool = False) -> DerivedDef:
    nm = _names(ctx, nat_index)
    idx = Var(nm.index_name)
    ctors: list[tuple[str, Term]] = [(vc, idx) for vc in nm.var_ctors]
    if nat_index:
        ctors.append(("succ", Pi((idx, idx))))
        role = f"index universe (nesting depth of {ctx.group.decls[0]} applications)"
    else:
        for cname, arity in ctx.spec.app_ctors:
            ctors.append((cname, Pi((idx,) * (arity + 1))))
        role = f"index universe (type expressions over {'/'.join(ctx.group.decls)})"
    return DerivedDef(name=nm.index_name, role=role, data=DataDecl((), tuple(ctors)))


def _type_term(t: TypeExpr) -> Term:
    match t:
        case TVar(name):
            return Var(name)
        case TApp(head, args):
            return _v(head, *(_type_term(a) for a in args))
    raise AssertionError


def _ctor_type(c: Constructor) -> Term:
    return _arrow([_type_term(a) for a in c.args] + [_type_term(c.result)])


def derive_data_decls(ctx: GroupContext) -> list[DerivedDef]:
    """The source declarations, re-stated; mutual groups need forward sigs."""
    forward = len(ctx.group.decls) >= 2
    out = []
    for dn in ctx.group.decls:
        d = ctx.decls[dn]
        data = DataDecl(d.params, tuple((c.name, _ctor_type(c)) for c in d.ctors), forward)
        out.append(DerivedDef(name=d.name, role="source data type", data=data))
    return out


# ---------------------------------------------------------------------------
# Interpretation of indices as types


def derive_interp(ctx: GroupContext, nat_index: bool = False) -> DerivedDef:
    nm = _names(ctx, nat_index)
    if nat_index:
        sig = Pi(
            (
                Binder(("n",), Var("Nat")),
                Binder(("b",), Pi((SET, SET))),
                SET,
                SET,
            )
        )
        clauses = (
            Clause((PCon("zero"), PVar("b"), PVar("a")), Var("a")),
            Clause(
                (PCon("succ", (PVar("n"),)), PVar("b"), PVar("a")),
                _v("b", _v("NTimes", Var("n"), Var("b"), Var("a"))),
            ),
        )
        role = "applies a type operator n times to a base type"
        return DerivedDef("NTimes", role, sig, clauses)

    carriers = [dn.lower() for dn in ctx.group.decls]
    segs: list[Binder | Term] = []
    for dn in ctx.group.decls:
        segs.append(_arrow([SET] * (len(ctx.decls[dn].params) + 1)))
    segs.extend([SET] * len(nm.base_types))
    segs.extend([Var(nm.index_name), SET])
    lead = tuple(PVar(c) for c in carriers) + tuple(PVar(b) for b in nm.base_types)
    cvars = [Var(c) for c in carriers]
    bvars = [Var(b) for b in nm.base_types]
    clauses = []
    for k, vc in enumerate(nm.var_ctors):
        clauses.append(Clause(lead + (PCon(vc),), bvars[k]))
    for dn in ctx.group.decls:
        arity = len(ctx.decls[dn].params)
        evs = ("expr",) if arity == 1 else tuple(f"expr{k + 1}" for k in range(arity))
        pat = PCon(ctx.app_ctor[dn], tuple(PVar(e) for e in evs))
        body = _v(carriers[ctx.group.decls.index(dn)], *(_v("I", *cvars, *bvars, Var(e)) for e in evs))
        clauses.append(Clause(lead + (pat,), body))
    return DerivedDef("I", "interprets an index expression as a type", Pi(tuple(segs)), tuple(clauses))


# ---------------------------------------------------------------------------
# nfold


def _method_type(ctx: GroupContext, nm: _Names, d: TypeDecl, c: Constructor) -> Term:
    ivs = nm.ivars(len(d.params))
    env = {k: Var(v) for k, v in enumerate(ivs)}
    segs: list[Binder | Term] = [Binder(ivs, Var(nm.index_name))]
    for tmpl in ctx.arg_templates[c.name]:
        segs.append(_v("p", nm.index_term(tmpl, env)))
    segs.append(_v("p", nm.result_index(d, env)))
    return Pi(tuple(segs))


def _nfold_signature(ctx: GroupContext, nm: _Names) -> Pi:
    segs: list[Binder | Term] = [Binder(("p",), Pi((Var(nm.index_name), SET)))]
    for d, c in ctx.ctors():
        segs.append(Binder((nm.method[c.name],), _method_type(ctx, nm, d, c)))
    segs.append(Binder(nm.base_types, SET))
    for k, bf in enumerate(nm.base_fns):
        segs.append(Binder((bf,), Pi((Var(nm.base_types[k]), _v("p", Var(nm.var_ctors[k]))))))
    segs.append(Binder((nm.ivar,), Var(nm.index_name)))
    decl_carriers = [Var(dn) for dn in ctx.group.decls]
    base_vars = [Var(b) for b in nm.base_types]
    segs.append(nm.interp(decl_carriers, base_vars, Var(nm.ivar)))
    segs.append(_v("p", Var(nm.ivar)))
    return Pi(tuple(segs))


def derive_nfold(ctx: GroupContext, nat_index: bool = False) -> DerivedDef:
    nm = _names(ctx, nat_index)
    sig = _nfold_signature(ctx, nm)
    lead_names = (
        ["p"]
        + [nm.method[c.name] for _, c in ctx.ctors()]
        + list(nm.base_types)
        + list(nm.base_fns)
    )
    lead = tuple(PVar(v) for v in lead_names)
    args = tuple(Var(v) for v in lead_names)
    clauses = []
    for k, vc in enumerate(nm.var_ctors):
        clauses.append(Clause(lead + (nm.var_pattern(k), PVar("x")), _v(nm.base_fns[k], Var("x"))))
    for d, c in ctx.ctors():
        ivs = nm.ivars(len(d.params))
        env = {k: Var(v) for k, v in enumerate(ivs)}
        vvs = nm.value_vars(len(c.args))
        pats = lead + (
            nm.index_pattern(d.name, ivs),
            PCon(c.name, tuple(PVar(v) for v in vvs)),
        )
        recs = [
            _v("nfold", *args, nm.index_term(t, env), Var(v))
            for t, v in zip(ctx.arg_templates[c.name], vvs)
        ]
        body = _v(nm.method[c.name], *(Var(v) for v in ivs), *recs)
        clauses.append(Clause(pats, body))
    role = "dependently typed fold over every indexed instance"
    return DerivedDef("nfold", role, sig, tuple(clauses))


# ---------------------------------------------------------------------------
# Induction principle


def derive_ind(ctx: GroupContext, nat_index: bool = False) -> DerivedDef:
    nm = _names(ctx, nat_index)
    idx = Var(nm.index_name)
    decl_carriers = [Var(dn) for dn in ctx.group.decls]
    base_vars = [Var(b) for b in nm.base_types]

    def interp(ix: Term) -> Term:
        return nm.interp(decl_carriers, base_vars, ix)

    base_fns = ("base",) if nat_index else nm.base_fns

    def base_type(k: int) -> Term:
        return Pi(
            (
                Binder(("x",), Var(nm.base_types[k])),
                _v("p", Var(nm.var_ctors[k]), Var("x")),
            )
        )

    def method_type(d: TypeDecl, c: Constructor) -> Term:
        ivs = nm.ivars(len(d.params))
        env = {k: Var(v) for k, v in enumerate(ivs)}
        vvs = nm.value_vars(len(c.args))
        segs: list[Binder | Term] = [Binder(ivs, idx)]
        arg_ixs = [nm.index_term(t, env) for t in ctx.arg_templates[c.name]]
        for ix, v in zip(arg_ixs, vvs):
            segs.append(Binder((v,), interp(ix)))
        for ix, v in zip(arg_ixs, vvs):
            segs.append(_v("p", ix, Var(v)))
        segs.append(_v("p", nm.result_index(d, env), _v(c.name, *(Var(v) for v in vvs))))
        return Pi(tuple(segs))

    p_type = Pi((Binder((nm.ivar,), idx), interp(Var(nm.ivar)), SET))
    val = "xs" if nat_index else "x"
    segs: list[Binder | Term] = [
        Binder(nm.base_types, SET, implicit=True),
        Binder(("p",), p_type, implicit=True),
    ]
    if nat_index:
        segs.append(Binder(("base",), base_type(0)))
    for d, c in ctx.ctors():
        segs.append(Binder((nm.method[c.name],), method_type(d, c)))
    if not nat_index:
        for k, bf in enumerate(base_fns):
            segs.append(Binder((bf,), base_type(k)))
    segs.append(Binder((nm.ivar,), idx))
    segs.append(Binder((val,), interp(Var(nm.ivar))))
    segs.append(_v("p", Var(nm.ivar), Var(val)))
    sig = Pi(tuple(segs))

    if nat_index:
        lead_names = ["base"] + [nm.method[c.name] for _, c in ctx.ctors()]
    else:
        lead_names = [nm.method[c.name] for _, c in ctx.ctors()] + list(base_fns)
    lead = tuple(PVar(v) for v in lead_names)
    args = tuple(Var(v) for v in lead_names)
    clauses = []
    for k in range(len(nm.var_ctors)):
        clauses.append(Clause(lead + (nm.var_pattern(k), PVar(val)), _v(base_fns[k], Var(val))))
    for d, c in ctx.ctors():
        ivs = nm.ivars(len(d.params))
        env = {k: Var(v) for k, v in enumerate(ivs)}
        vvs = nm.value_vars(len(c.args))
        pats = lead + (
            nm.index_pattern(d.name, ivs),
            PCon(c.name, tuple(PVar(v) for v in vvs)),
        )
        recs = [
            _v("ind", *args, nm.index_term(t, env), Var(v))
            for t, v in zip(ctx.arg_templates[c.name], vvs)
        ]
        body = _v(nm.method[c.name], *(Var(v) for v in ivs), *(Var(v) for v in vvs), *recs)
        clauses.append(Clause(pats, body))
    role = "induction principle generalizing nfold"
    return DerivedDef("ind", role, sig, tuple(clauses))


# ---------------------------------------------------------------------------
# Maps


def derive_map(ctx: GroupContext, nat_index: bool = False) -> DerivedDef:
    nm = _names(ctx, nat_index)
    src = nm.base_types
    if len(src) == 1:
        tgt = ("b",)
        fns = ("f",)
    else:
        tgt = tuple(s + "'" for s in src)
        fns = tuple("fgh"[k] if k < 3 else f"f{k + 1}" for k in range(len(src)))
    decl_carriers = [Var(dn) for dn in ctx.group.decls]
    iv = nm.ivar
    sig = Pi(
        (
            Binder(src + tgt, SET, implicit=True),
            Binder((iv,), Var(nm.index_name)),
            *[Pi((Var(s), Var(t))) for s, t in zip(src, tgt)],
            nm.interp(decl_carriers, [Var(s) for s in src], Var(iv)),
            nm.interp(decl_carriers, [Var(t) for t in tgt], Var(iv)),
        )
    )
    val = "l" if nat_index else "x"
    pats = (
        tuple(PVar(s, implicit=True) for s in src + tgt)
        + (PVar(iv),)
        + tuple(PVar(f) for f in fns)
        + (PVar(val),)
    )
    plam = Lam((iv,), nm.interp(decl_carriers, [Var(t) for t in tgt], Var(iv)))
    mlams = [
        Lam(nm.ivars(len(d.params)), Var(c.name)) for d, c in ctx.ctors()
    ]
    body = _v(
        "nfold",
        plam,
        *mlams,
        *(Var(s) for s in src),
        *(Var(f) for f in fns),
        Var(iv),
        Var(val),
    )
    role = "map over every indexed instance, defined from nfold"
    return DerivedDef("nmap", role, sig, (Clause(pats, body),))


def _derive_hmap(ctx: GroupContext, nat_index: bool) -> DerivedDef:
    nm = _names(ctx, nat_index)
    dn = ctx.group.decls[0]
    one = nm.index_term(IApp(ctx.app_ctor[dn], (IVar(0),)), {0: Var(nm.var_ctors[0])})
    sig = Pi(
        (
            Binder(("a", "b"), SET, implicit=True),
            Pi((Var("a"), Var("b"))),
            _v(dn, Var("a")),
            _v(dn, Var("b")),
        )
    )
    clause = Clause((PVar("f"), PVar("x")), _v("nmap", one, Var("f"), Var("x")))
    return DerivedDef("hmap", "one-layer map, nmap at depth one", sig, (clause,))


# ---------------------------------------------------------------------------
# Higher-order folds


def _carrier_type(t: TypeExpr, carrier: dict[str, str]) -> Term:
    match t:
        case TVar(name):
            return Var(name)
        case TApp(head, args):
            return _v(carrier.get(head, head), *(_carrier_type(a, carrier) for a in args))
    raise AssertionError


def derive_hfold(ctx: GroupContext, nat_index: bool = False) -> list[DerivedDef]:
    nm = _names(ctx, nat_index)
    if nat_index:
        carrier = {ctx.group.decls[0]: "b"}
    else:
        carrier = {}
        for dn in ctx.group.decls:
            cand = dn.lower()
            if any(cand in ctx.decls[d2].params for d2 in ctx.group.decls):
                cand += "'"
            carrier[dn] = cand

    def hmethod_type(d: TypeDecl, c: Constructor) -> Term:
        segs: list[Binder | Term] = []
        if d.params:
            segs.append(Binder(d.params, SET if nat_index else None))
        segs.extend(_carrier_type(a, carrier) for a in c.args)
        segs.append(_carrier_type(c.result, carrier))
        return _arrow(segs) if len(segs) == 1 else Pi(tuple(segs))

    carrier_binders: list[Binder] = []
    for dn in ctx.group.decls:
        arity = len(ctx.decls[dn].params)
        carrier_binders.append(Binder((carrier[dn],), _arrow([SET] * (arity + 1))))
    method_binders = [
        Binder((nm.method[c.name],), hmethod_type(d, c)) for d, c in ctx.ctors()
    ]
    cvars = [Var(carrier[dn]) for dn in ctx.group.decls]

    out = []
    for dn in ctx.group.decls:
        own = ctx.decls[dn]
        insts = [
            Var(own.params[k]) if k < len(own.params)
            else (Var(own.params[-1]) if own.params else Var(carrier[dn]))
            for k in range(len(nm.base_types))
        ]
        segs: list[Binder | Term] = list(carrier_binders) + list(method_binders)
        if own.params:
            segs.append(Binder(own.params, SET if nat_index else None))
        segs.append(_v(dn, *(Var(p) for p in own.params)))
        segs.append(_v(carrier[dn], *(Var(p) for p in own.params)))
        plam = Lam((nm.ivar,), nm.interp(cvars, insts, Var(nm.ivar)))
        mlams = []
        for d2, c2 in ctx.ctors():
            ivs = nm.ivars(len(d2.params))
            mlams.append(
                Lam(ivs, _v(nm.method[c2.name], *(nm.interp(cvars, insts, Var(v)) for v in ivs)))
            )
        env = {k: Var(nm.var_ctors[k]) for k in range(len(own.params))}
        body = _v(
            "nfold",
            plam,
            *mlams,
            *insts,
            *[Lam(("x",), Var("x")) for _ in nm.base_types],
            nm.result_index(own, env),
            Var("x"),
        )
        pats = (
            tuple(PVar(carrier[d2]) for d2 in ctx.group.decls)
            + tuple(PVar(nm.method[c2.name]) for _, c2 in ctx.ctors())
            + tuple(PVar(p) for p in own.params)
            + (PVar("x"),)
        )
        if nat_index:
            name, role = "hfold", "higher-order fold, defined from nfold"
        else:
            name = "hfold-" + dn.lower()
            role = f"higher-order fold for {dn}, defined from nfold"
        out.append(DerivedDef(name, role, Pi(tuple(segs)), (Clause(pats, body),)))
    return out


# ---------------------------------------------------------------------------
# PS bridge: rebuild nfold from hfold through a continuation carrier


def derive_ps_bridge(ctx: GroupContext, nat_index: bool = False) -> list[DerivedDef]:
    nm = _names(ctx, nat_index)
    shape = bush_shape(ctx)
    if shape is None:
        raise PsBridgeError("PS bridge not derivable for this shape")
    leaf_ctor, cons_ctor = shape
    dn = ctx.group.decls[0]
    own = ctx.decls[dn]
    idx = Var(nm.index_name)
    iv = nm.ivar
    leaf_m, cons_m = nm.method[leaf_ctor], nm.method[cons_ctor]
    bf = nm.base_fns[0]
    zero_t = Var(nm.var_ctors[0])

    def succ_t(e: Term) -> Term:
        return _v("succ" if nat_index else ctx.app_ctor[dn], e)

    def interp(carrier: Term, ix: Term) -> Term:
        return nm.interp([carrier], [Var("a")], ix)

    hfold_name = "hfold" if nat_index else "hfold-" + dn.lower()

    ps_sig = Pi((Binder(("p",), Pi((idx, SET))), SET, SET))
    ps_body = Pi(
        (
            Binder((iv,), idx),
            Pi((Var("A"), _v("p", Var(iv)))),
            _v("p", succ_t(Var(iv))),
        )
    )
    ps = DerivedDef(
        "PS",
        "carrier transformer used to rebuild nfold from hfold",
        ps_sig,
        (Clause((PVar("p"), PVar("A")), ps_body),),
    )

    pstop_sig = Pi(
        (
            Binder(("p",), Pi((idx, SET))),
            Binder(("a",), SET),
            Binder((bf,), Pi((Var("a"), _v("p", zero_t)))),
            Binder((iv,), idx),
            interp(_v("PS", Var("p")), Var(iv)),
            _v("p", Var(iv)),
        )
    )
    ih = DerivedDef(
        "ih",
        "local helper",
        Pi((interp(_v("PS", Var("p")), Var(iv)), _v("p", Var(iv)))),
        (Clause((), _v("PS-to-P", Var("p"), Var("a"), Var(bf), Var(iv))),),
    )
    pstop = DerivedDef(
        "PS-to-P",
        "collapses an iterated PS carrier into the result family",
        pstop_sig,
        (
            Clause(
                (PVar("p"), PVar("a"), PVar(bf), nm.var_pattern(0), PVar("x")),
                _v(bf, Var("x")),
            ),
            Clause(
                (PVar("p"), PVar("a"), PVar(bf), nm.index_pattern(dn, (iv,)), PVar("hyp")),
                _v("hyp", Var(iv), Var("ih")),
                wheres=(ih,),
            ),
        ),
    )

    leaf_decl = next(c for _, c in ctx.ctors() if c.name == leaf_ctor)
    cons_decl = next(c for _, c in ctx.ctors() if c.name == cons_ctor)
    x1, x2 = nm.value_vars(2)
    foldps_sig = Pi(
        (
            Binder(("p",), Pi((idx, SET))),
            Binder((leaf_m,), _method_type(ctx, nm, own, leaf_decl)),
            Binder((cons_m,), _method_type(ctx, nm, own, cons_decl)),
            Binder(("a",), SET),
            _v(dn, Var("a")),
            _v("PS", Var("p"), Var("a")),
        )
    )
    foldps_body = _v(
        hfold_name,
        _v("PS", Var("p")),
        Lam(("a", iv, "tr"), _v(leaf_m, Var(iv))),
        Lam(
            ("a", x1, x2, iv, "tr"),
            _v(
                cons_m,
                Var(iv),
                _v("tr", Var(x1)),
                _v(x2, succ_t(Var(iv)), Lam(("f",), _v("f", Var(iv), Var("tr")))),
            ),
        ),
    )
    foldps = DerivedDef(
        "fold-PS",
        "hfold instantiated at the PS carrier",
        foldps_sig,
        (Clause((PVar("p"), PVar(leaf_m), PVar(cons_m)), foldps_body),),
    )

    m_type = Pi(
        (
            Binder(("x", "y"), None),
            Pi((Var("x"), Var("y"))),
            Pi((_v("b", Var("x")), _v("b", Var("y")))),
        )
    )
    f_type = Pi((Binder(("a",), None), _v("b", Var("a")), _v("c", Var("a"))))
    lift_sig = Pi(
        (
            Binder(("b", "c"), Pi((SET, SET))),
            m_type,
            Binder((iv,), idx),
            f_type,
            Binder(("a",), SET),
            interp(Var("b"), Var(iv)),
            interp(Var("c"), Var(iv)),
        )
    )
    lift_lead = (PVar("b"), PVar("c"), PVar("m"))
    lift_step_body = _v(
        "f",
        interp(Var("c"), Var(iv)),
        _v(
            "m",
            interp(Var("b"), Var(iv)),
            interp(Var("c"), Var(iv)),
            _v("liftNTimes", Var("b"), Var("c"), Var("m"), Var(iv), Var("f"), Var("a")),
            Var("x"),
        ),
    )
    lift = DerivedDef(
        "liftNTimes",
        "lifts a pointwise function through an iterated operator",
        lift_sig,
        (
            Clause(lift_lead + (nm.var_pattern(0), PVar("f"), PVar("a"), PVar("x")), Var("x")),
            Clause(
                lift_lead + (nm.index_pattern(dn, (iv,)), PVar("f"), PVar("a"), PVar("x")),
                lift_step_body,
            ),
        ),
    )

    nfold_sig = _nfold_signature(ctx, nm)
    lift_where = DerivedDef(
        "lift",
        "local helper",
        Pi(
            (
                Binder((iv,), idx),
                interp(Var(dn), Var(iv)),
                interp(_v("PS", Var("p")), Var(iv)),
            )
        ),
        (
            Clause(
                (PVar(iv), PVar("x")),
                _v(
                    "liftNTimes",
                    Var(dn),
                    _v("PS", Var("p")),
                    Lam(("a", "b"), Var("hmap")),
                    Var(iv),
                    _v("fold-PS", Var("p"), Var(leaf_m), Var(cons_m)),
                    Var("a"),
                    Var("x"),
                ),
            ),
        ),
    )
    nfoldp = DerivedDef(
        "nfold'",
        "nfold rebuilt from hfold; agrees with nfold everywhere",
        nfold_sig,
        (
            Clause(
                (PVar("p"), PVar(leaf_m), PVar(cons_m), PVar("a"), PVar(bf), PVar(iv), PVar("x")),
                _v("PS-to-P", Var("p"), Var("a"), Var(bf), Var(iv), _v("lift", Var(iv), Var("x"))),
                wheres=(lift_where,),
            ),
        ),
    )
    return [ps, pstop, foldps, lift, nfoldp]


# ---------------------------------------------------------------------------
# Whole-group assembly


def derive_group(ctx: GroupContext, nat_index: bool = False) -> DerivedGroup:
    _names(ctx, nat_index)  # reject ineligible nat-index requests up front
    defs: list[DerivedDef] = [derive_index_decl(ctx, nat_index)]
    defs.extend(derive_data_decls(ctx))
    defs.append(derive_interp(ctx, nat_index))
    defs.append(derive_nfold(ctx, nat_index))
    defs.append(derive_map(ctx, nat_index))
    if nat_index_eligible(ctx):
        defs.append(_derive_hmap(ctx, nat_index))
    defs.append(derive_ind(ctx, nat_index))
    defs.extend(derive_hfold(ctx, nat_index))
    notes: list[str] = []
    try:
        defs.extend(derive_ps_bridge(ctx, nat_index))
    except PsBridgeError as e:
        notes.append(f"PS bridge: skipped ({e})")
    for d in defs:
        if d.data is None:
            recursion_witnesses(d)
    return DerivedGroup(ctx.name, tuple(defs), tuple(notes))


# ---------------------------------------------------------------------------
# Structural-recursion certificate


def _pattern_depths(patterns: tuple[Pattern, ...], into: dict[str, int]) -> None:
    def walk(p: Pattern, depth: int) -> None:
        match p:
            case PVar(name, _):
                into[name] = max(into.get(name, 0), depth)
            case PCon(_, args):
                for a in args:
                    walk(a, depth + 1)

    for p in patterns:
        walk(p, 0)


def recursion_witnesses(d: DerivedDef) -> tuple[str, ...]:
    """Certify structural recursion: every self-call must pass at least one
    variable bound strictly inside a constructor pattern.  Returns the
    witnesses (last such argument per call site, deduplicated) and raises
    DerivationError when a call has none."""
    if d.data is not None:
        return ()
    out: list[str] = []

    def scan(t: Term, depths: dict[str, int]) -> None:
        match t:
            case Var():
                return
            case App(fn, args):
                if isinstance(fn, Var) and fn.name == d.name:
                    witnesses = [
                        a.name
                        for a in args
                        if isinstance(a, Var) and depths.get(a.name, 0) >= 1
                    ]
                    if not witnesses:
                        raise DerivationError(
                            f"cannot certify termination of {d.name!r}: a recursive "
                            "call passes no strict subterm of a constructor pattern"
                        )
                    if witnesses[-1] not in out:
                        out.append(witnesses[-1])
                else:
                    scan(fn, depths)
                for a in args:
                    scan(a, depths)
            case Lam(params, body):
                scan(body, {k: v for k, v in depths.items() if k not in params})
            case Pi(segments):
                for s in segments:
                    if isinstance(s, Binder):
                        if s.type is not None:
                            scan(s.type, depths)
                    else:
                        scan(s, depths)

    for cl in d.clauses:
        depths: dict[str, int] = {}
        _pattern_depths(cl.patterns, depths)
        scan(cl.body, depths)
        for w in cl.wheres:
            for wcl in w.clauses:
                wdepths = dict(depths)
                _pattern_depths(wcl.patterns, wdepths)
                scan(wcl.body, wdepths)
    return tuple(out)


# ---------------------------------------------------------------------------
# Erasure check: ind collapses to nfold once value arguments are removed


def _drop_value_arg(t: Term) -> Term:
    if not isinstance(t, App):
        raise DerivationError("erasure expected an application of the result family")
    return App(t.fn, t.args[:1]) if len(t.args) > 1 else t


def _erase_method(t: Term) -> Term:
    segs = list(t.segments)
    out: list[Binder | Term] = [segs[0]]
    rest = segs[1:]
    k = 0
    while k < len(rest) and isinstance(rest[k], Binder):
        k += 1  # value binders: dropped entirely
    out.extend(_drop_value_arg(s) for s in rest[k:])
    return Pi(tuple(out))


def _erase_base(t: Term) -> Term:
    first, cod = t.segments
    domain = first.type if isinstance(first, Binder) else first
    return Pi((domain, _drop_value_arg(cod)))


def ind_erases_to_nfold(
    ctx: GroupContext,
    ind_def: DerivedDef,
    nfold_def: DerivedDef,
    nat_index: bool = False,
) -> list[str]:
    """Check, component by component, that deleting the value arguments from
    the induction principle's signature yields the fold's signature.  Names
    are part of the derived contract, so the comparison is syntactic.
    Returns a list of mismatch descriptions; empty means the check passed."""
    m = len(ctx.ctors())
    v = 1 if nat_index else ctx.spec.base_var_count
    nsegs = nfold_def.signature.segments
    isegs = ind_def.signature.segments
    n_methods = nsegs[1 : 1 + m]
    n_bases = nsegs[2 + m : 2 + m + v]
    n_trailer = nsegs[-3:]
    if nat_index:
        i_bases = [isegs[2]]
        i_methods = list(isegs[3 : 3 + m])
    else:
        i_methods = list(isegs[2 : 2 + m])
        i_bases = list(isegs[2 + m : 2 + m + v])
    i_trailer = isegs[-3:]

    problems = []
    for nb, ib in zip(n_methods, i_methods):
        if _erase_method(ib.type) != nb.type:
            problems.append(f"method {nb.names[0]}: erased type does not match")
    for nb, ib in zip(n_bases, i_bases):
        if _erase_base(ib.type) != nb.type:
            problems.append(f"base {nb.names[0]}: erased type does not match")
    ivb, vb, cod = i_trailer
    erased_trailer = (ivb, vb.type, _drop_value_arg(cod))
    if erased_trailer != tuple(n_trailer):
        problems.append("trailer: erased type does not match")
    return problems
