"""Runtime tests.

Every derived expectation here is checked two ways: against an independent
oracle written directly over the Value tree (flatten-and-add, spine count,
foldList, naive depth), and against the frozen number the oracle produced
when this suite was written.  The frozen copies keep silent oracle drift
from going unnoticed.
"""

import pytest
from hypothesis import given, strategies as st

from nestfold.analysis import IApp, IVar, analyze
from nestfold.diagnostics import EvalError, GuardExceeded
from nestfold.parser import (
    Atom,
    VBase,
    VCon,
    parse_program,
    parse_value_literal,
    value_size,
)
from nestfold.runtime import (
    NAT_MAX,
    Algebra,
    CallCounter,
    DepAlgebra,
    RFun,
    RNat,
    RTree,
    apply_result,
    as_value,
    catalogue,
    enumerate_values,
    eval_hfold_direct,
    eval_hfold_via_nfold,
    eval_hmap_direct,
    eval_ind,
    eval_map,
    eval_nfold,
    eval_nfold_prime,
    halg_catalogue,
    nat_add,
    typecheck_value,
    wrap,
)

from test_parser import BOBDYLAN, BUSH, DEEP_BUSH, LIST


@pytest.fixture(scope="module")
def bush():
    (ctx,) = analyze(parse_program(BUSH))
    return ctx


@pytest.fixture(scope="module")
def lists():
    (ctx,) = analyze(parse_program(LIST))
    return ctx


@pytest.fixture(scope="module")
def bobdylan():
    (ctx,) = analyze(parse_program(BOBDYLAN))
    return ctx


@pytest.fixture(scope="module")
def bush1(bush):
    return parse_value_literal(DEEP_BUSH, bush.program, "Bush Nat")


def bushc(k):
    idx = IVar(0)
    for _ in range(k):
        idx = IApp("BushC", (idx,))
    return idx


NAT_KINDS = {0: "nat"}
POOL3 = {0: (VBase(0), VBase(1), VBase(2))}


# ---------------------------------------------------------------------------
# Independent oracles


def flatten_add(v):
    """Sum of every natural anywhere in the tree."""
    match v:
        case VBase(int() as n):
            return n
        case VBase(_):
            raise AssertionError("non-natural payload in a sum oracle")
        case VCon(_, args):
            return sum(flatten_add(a) for a in args)


def top_spine_length(v):
    """Number of cons cells along the top-level spine."""
    match v:
        case VCon("cons", (_, tail)):
            return 1 + top_spine_length(tail)
        case _:
            return 0


def naive_depth(v):
    match v:
        case VBase(_):
            return 0
        case VCon(_, ()):
            return 0
        case VCon(_, args):
            return 1 + max(naive_depth(a) for a in args)


def fold_list(base, step, v):
    match v:
        case VCon("nil", ()):
            return base
        case VCon("cc", (x, xs)):
            return step(x, fold_list(base, step, xs))
    raise AssertionError


def add_one(v):
    assert isinstance(v, VBase) and isinstance(v.payload, int)
    return VBase(v.payload + 1)


def bump_every_natural(v):
    match v:
        case VBase(int() as n):
            return VBase(n + 1)
        case VBase(_):
            return v
        case VCon(c, args):
            return VCon(c, tuple(bump_every_natural(a) for a in args))


# ---------------------------------------------------------------------------
# typecheck_value


def test_typecheck_accepts_the_deep_literal(bush, bush1):
    assert typecheck_value(bush, bushc(1), NAT_KINDS, bush1) == []


def test_typecheck_rejects_base_at_constructor_index(bush):
    diags = typecheck_value(bush, bushc(1), NAT_KINDS, VBase(4))
    assert len(diags) == 1 and "expected a Bush constructor" in diags[0].message


def test_typecheck_rejects_constructor_at_base_index(bush):
    diags = typecheck_value(bush, IVar(0), NAT_KINDS, VCon("leaf"))
    assert len(diags) == 1 and "expected a base value" in diags[0].message


def test_typecheck_universe_kinds(bush):
    assert typecheck_value(bush, IVar(0), {0: "atom"}, VBase(Atom("x"))) == []
    diags = typecheck_value(bush, IVar(0), {0: "atom"}, VBase(3))
    assert diags and "atom" in diags[0].message


def test_typecheck_walks_every_slot(bush):
    v = VCon("cons", (VCon("leaf"), VCon("cons", (VBase(1), VCon("leaf")))))
    # payload slot is wrong (leaf at varA) and the tail's payload slot is
    # wrong too (a bare natural where a Bush Nat belongs)
    diags = typecheck_value(bush, bushc(1), NAT_KINDS, v)
    assert len(diags) == 2


def test_typecheck_mutual(bobdylan):
    v = parse_value_literal(
        "duluth (robert 1) (robert 'x)", bobdylan.program, "Dylan Nat Atom"
    )
    idx = IApp("DylanC", (IVar(0), IVar(1)))
    assert typecheck_value(bobdylan, idx, {0: "nat", 1: "atom"}, v) == []
    flipped = IApp("DylanC", (IVar(1), IVar(0)))
    assert typecheck_value(bobdylan, flipped, {0: "nat", 1: "atom"}, v) != []


# ---------------------------------------------------------------------------
# eval_nfold and the catalogue


def test_sum_of_the_deep_literal_is_34(bush, bush1):
    alg = catalogue(bush)["sum"]
    assert flatten_add(bush1) == 34
    assert eval_nfold(bush, alg, bushc(1), bush1) == RNat(34)


def test_length_of_the_deep_literal_is_4(bush, bush1):
    alg = catalogue(bush)["length"]
    assert top_spine_length(bush1) == 4
    assert eval_nfold(bush, alg, bushc(1), bush1) == RNat(4)


def test_sum_of_the_empty_bush_is_0(bush):
    v = parse_value_literal("[ ]", bush.program, "Bush Nat")
    assert eval_nfold(bush, catalogue(bush)["sum"], bushc(1), v) == RNat(0)


def test_base_index_dispatches_to_the_base_function(bush):
    alg = catalogue(bush)["sum"]
    assert eval_nfold(bush, alg, IVar(0), VBase(5)) == RNat(5)


def test_depth_of_the_deep_literal_is_9(bush, bush1):
    alg = catalogue(bush)["depth"]
    assert naive_depth(bush1) == 9
    assert eval_nfold(bush, alg, bushc(1), bush1) == RNat(9)


def test_trace_discriminates_values(bush):
    alg = catalogue(bush)["trace"]
    pool = enumerate_values(bush, bushc(1), POOL3, 4)
    traces = [eval_nfold(bush, alg, bushc(1), v) for v in pool]
    assert len(set(traces)) == len(pool)


def test_sum_on_a_mutual_value(bobdylan):
    # zimmerman : Dylan (Bob (Dylan a (Bob a))) (Bob a) -> Bob (Dylan a a)
    #             -> Bob a, so well-typed occupants need several layers of
    #             robert/duluth wrapping before a payload is legal
    v = parse_value_literal(
        "zimmerman"
        " (duluth (robert (robert (duluth (robert 1) (robert (robert 2)))))"
        "         (robert (robert 3)))"
        " (robert (duluth (robert 4) (robert 5)))",
        bobdylan.program,
        "Bob Nat",
    )
    idx = IApp("BobC", (IVar(0),))
    assert typecheck_value(bobdylan, idx, {0: "nat", 1: "nat"}, v) == []
    alg = catalogue(bobdylan)["sum"]
    assert flatten_add(v) == 15
    assert eval_nfold(bobdylan, alg, idx, v) == RNat(15)


def test_catalogue_contents(bush, lists, bobdylan):
    assert sorted(catalogue(bush)) == ["depth", "length", "sum", "trace"]
    assert sorted(catalogue(lists)) == ["depth", "length", "sum", "trace"]
    assert sorted(catalogue(bobdylan)) == ["depth", "sum", "trace"]


def test_derived_fold_on_lists_agrees_with_foldlist(lists):
    idx = IApp("ListC", (IVar(0),))
    alg = catalogue(lists)["sum"]
    for v in enumerate_values(lists, idx, POOL3, 6):
        expected = fold_list(0, lambda x, r: x.payload + r, v)
        assert eval_nfold(lists, alg, idx, v) == RNat(expected)


def test_overflow_is_an_error_not_a_wrap(bush):
    big = VCon(
        "cons",
        (
            VBase(NAT_MAX - 1),
            VCon("cons", (VCon("cons", (VBase(2), VCon("leaf"))), VCon("leaf"))),
        ),
    )
    with pytest.raises(EvalError, match="overflow"):
        eval_nfold(bush, catalogue(bush)["sum"], bushc(1), big)
    with pytest.raises(EvalError, match="overflow"):
        nat_add(NAT_MAX, 1)


def test_call_counter_is_bounded_by_size(bush, bush1):
    alg = catalogue(bush)["sum"]
    for v in (bush1, VCon("leaf"), VCon("cons", (VBase(1), VCon("leaf")))):
        counter = CallCounter()
        eval_nfold(bush, alg, bushc(1), v, counter=counter)
        assert counter.calls == value_size(v) - 1
        assert counter.calls <= value_size(v)


# ---------------------------------------------------------------------------
# eval_map


def test_map_increments_every_numeral(bush, bush1):
    got = eval_map(bush, {0: add_one}, bushc(1), bush1)
    assert got == bump_every_natural(bush1)


def test_map_identity_on_everything_small(bush):
    for d in range(3):
        idx = bushc(d)
        for v in enumerate_values(bush, idx, POOL3, 4):
            assert eval_map(bush, {0: lambda x: x}, idx, v) == v


def test_map_at_base_index_is_plain_application(bush):
    assert eval_map(bush, {0: add_one}, IVar(0), VBase(7)) == VBase(8)


def test_map_composition_pointwise(bush):
    two = bushc(2)
    for v in enumerate_values(bush, two, POOL3, 4):
        once = eval_map(bush, {0: add_one}, two, v)
        # nmap (add 1 1) f == nmap 1 (nmap 1 f): the outer pass hands whole
        # level-1 subtrees to its base function
        composed = eval_map(
            bush, {0: lambda w: eval_map(bush, {0: add_one}, bushc(1), w)}, bushc(1), v
        )
        assert once == composed


# ---------------------------------------------------------------------------
# eval_ind


def _const_dep(alg):
    return DepAlgebra(
        bases=dict(alg.bases),
        methods={
            k: (lambda f: lambda iargs, subs, rs: f(iargs, rs))(m)
            for k, m in alg.methods.items()
        },
    )


def test_ind_with_value_blind_methods_equals_nfold(bush, bush1):
    alg = catalogue(bush)["sum"]
    dep = _const_dep(alg)
    assert eval_ind(bush, dep, bushc(1), bush1) == RNat(34)
    for v in enumerate_values(bush, bushc(2), POOL3, 4):
        assert eval_ind(bush, dep, bushc(2), v) == eval_nfold(
            bush, alg, bushc(2), v
        )


def test_ind_sees_the_examined_subvalues(bush, bush1):
    rebuild = DepAlgebra(
        bases={0: lambda v: RTree(v)},
        methods={
            "leaf": lambda iargs, subs, rs: RTree(VCon("leaf")),
            "cons": lambda iargs, subs, rs: RTree(VCon("cons", subs)),
        },
    )
    assert eval_ind(bush, rebuild, bushc(1), bush1) == RTree(bush1)


def test_ind_base_case_applies_base_directly(bush):
    dep = _const_dep(catalogue(bush)["sum"])
    assert eval_ind(bush, dep, IVar(0), VBase(6)) == RNat(6)


# ---------------------------------------------------------------------------
# Higher-order folds


def test_cps_sum_of_the_deep_literal_is_34(bush, bush1):
    halg = halg_catalogue(bush)["cps-sum"]
    r = eval_hfold_direct(bush, halg, bush1)
    assert halg.finish(r) == RNat(34)


def test_hfold_direct_on_leaf_is_the_leaf_method(bush):
    halg = halg_catalogue(bush)["sum-naive"]
    assert eval_hfold_direct(bush, halg, VCon("leaf")) == RNat(0)


def test_hfold_rebuild_is_identity(bush, bush1):
    halg = halg_catalogue(bush)["rebuild"]
    assert eval_hfold_direct(bush, halg, bush1) == RTree(bush1)


def test_hfold_via_nfold_matches_direct(bush, bush1):
    for name, halg in halg_catalogue(bush).items():
        direct = halg.finish(eval_hfold_direct(bush, halg, bush1))
        derived = halg.finish(eval_hfold_via_nfold(bush, halg, "Bush", bush1))
        assert direct == derived, name


def test_hmap_direct_satisfies_the_cons_equation(bush):
    v = parse_value_literal("[ 1, [ 2 ], [ [ 3 ] ] ]", bush.program, "Bush Nat")
    x, xs = v.args
    lhs = eval_hmap_direct(bush, add_one, v)
    rhs = VCon(
        "cons",
        (
            add_one(x),
            eval_hmap_direct(bush, lambda w: eval_hmap_direct(bush, add_one, w), xs),
        ),
    )
    assert lhs == rhs


def test_hmap_direct_matches_map(bush, bush1):
    assert eval_hmap_direct(bush, add_one, bush1) == eval_map(
        bush, {0: add_one}, bushc(1), bush1
    )


def test_guard_converts_runaway_recursion_into_an_error(bush, bush1):
    halg = halg_catalogue(bush)["sum-naive"]
    with pytest.raises(GuardExceeded):
        eval_hfold_direct(bush, halg, bush1, guard=1)


# ---------------------------------------------------------------------------
# nfold' (the PS route)


def test_nfold_prime_sum_is_34(bush, bush1):
    alg = catalogue(bush)["sum"]
    assert eval_nfold_prime(bush, alg, bushc(1), bush1) == RNat(34)


def test_nfold_prime_at_base_index_equals_nfold(bush):
    alg = catalogue(bush)["sum"]
    assert eval_nfold_prime(bush, alg, IVar(0), VBase(3)) == RNat(3)


def test_nfold_prime_agrees_with_nfold_on_a_sample(bush):
    for d in range(3):
        idx = bushc(d)
        for alg in catalogue(bush).values():
            for v in enumerate_values(bush, idx, POOL3, 3):
                assert eval_nfold_prime(bush, alg, idx, v) == eval_nfold(
                    bush, alg, idx, v
                )


def test_nfold_prime_rejects_non_bush_shapes(bobdylan):
    alg = catalogue(bobdylan)["sum"]
    v = VCon("robert", (VBase(1),))
    with pytest.raises(EvalError, match="bush-shaped"):
        eval_nfold_prime(bobdylan, alg, IApp("BobC", (IVar(0),)), v)


# ---------------------------------------------------------------------------
# enumerate_values


def test_enumeration_matches_the_hand_example(bush):
    dot = {0: (VBase(Atom("dot")),)}
    got = enumerate_values(bush, bushc(1), dot, 2)
    assert got == [
        VCon("leaf"),
        VCon("cons", (VBase(Atom("dot")), VCon("leaf"))),
    ]


def test_enumeration_at_size_zero_is_empty_for_constructor_indices(bush):
    assert enumerate_values(bush, bushc(1), POOL3, 0) == []


def test_enumeration_at_base_index_is_the_pool(bush):
    assert enumerate_values(bush, IVar(0), POOL3, 5) == list(POOL3[0])


def test_enumeration_is_exhaustive_well_typed_and_deterministic(bush):
    pool = enumerate_values(bush, bushc(2), POOL3, 5)
    assert pool == enumerate_values(bush, bushc(2), POOL3, 5)
    assert len(set(pool)) == len(pool)
    sizes = [value_size(v) for v in pool]
    assert sizes == sorted(sizes)
    assert all(value_size(v) <= 5 for v in pool)
    for v in pool:
        assert typecheck_value(bush, bushc(2), NAT_KINDS, v) == []


def _count(ctx, idx, pool_sizes, size):
    """Independent counting recurrence (never builds the values)."""
    match idx:
        case IVar(k):
            return pool_sizes[k] if size == 0 else 0
        case IApp(ic, iargs):
            if size == 0:
                return 0
            total = 0
            decl = ctx.decl_of_app[ic]
            for c in ctx.decls[decl].ctors:
                templates = ctx.arg_templates[c.name]
                total += _compositions(ctx, templates, iargs, pool_sizes, size - 1)
            return total


def _compositions(ctx, templates, iargs, pool_sizes, budget):
    if not templates:
        return 1 if budget == 0 else 0
    from nestfold.analysis import subst_index

    head, rest = templates[0], templates[1:]
    total = 0
    for s in range(budget + 1):
        here = _count(ctx, subst_index(head, iargs), pool_sizes, s)
        if here:
            total += here * _compositions(ctx, rest, iargs, pool_sizes, budget - s)
    return total


@pytest.mark.parametrize("depth", [0, 1, 2, 3])
@pytest.mark.parametrize("max_size", [3, 5, 7])
def test_enumeration_counts_match_the_recurrence(bush, depth, max_size):
    idx = bushc(depth)
    got = len(enumerate_values(bush, idx, POOL3, max_size))
    expected = sum(_count(bush, idx, {0: 3}, s) for s in range(max_size + 1))
    assert got == expected


def test_enumeration_mutual_group(bobdylan):
    idx = IApp("BobC", (IVar(0),))
    pool = enumerate_values(bobdylan, idx, {0: (VBase(0),), 1: (VBase(1),)}, 4)
    assert pool and all(v.ctor in ("robert", "zimmerman") for v in pool)
    for v in pool:
        assert typecheck_value(bobdylan, idx, {0: "nat", 1: "nat"}, v) == []


# ---------------------------------------------------------------------------
# Result plumbing


def test_wrap_and_as_value_are_inverse():
    assert wrap(VBase(3)) == RNat(3)
    assert as_value(RNat(3)) == VBase(3)
    leafy = VCon("leaf")
    assert wrap(leafy) == RTree(leafy)
    assert as_value(RTree(leafy)) == leafy
    atom = VBase(Atom("q"))
    assert as_value(wrap(atom)) == atom


def test_functions_are_only_observed_by_application():
    f = RFun(lambda r: RNat(r.n + 1))
    assert apply_result(f, RNat(4)) == RNat(5)
    with pytest.raises(EvalError):
        as_value(f)


@given(st.integers(0, 3), st.integers(0, 100))
def test_map_then_sum_shifts_by_payload_count(seed_depth, pick):
    (ctx,) = analyze(parse_program(BUSH))
    idx = bushc(seed_depth)
    pool = enumerate_values(ctx, idx, POOL3, 4)
    if not pool:
        return
    v = pool[pick % len(pool)]
    alg = catalogue(ctx)["sum"]
    plain = eval_nfold(ctx, alg, idx, v)
    bumped = eval_nfold(ctx, alg, idx, eval_map(ctx, {0: add_one}, idx, v))
    assert bumped.n - plain.n == _payload_count(v)


def _payload_count(v):
    match v:
        case VBase(_):
            return 1
        case VCon(_, args):
            return sum(_payload_count(a) for a in args)
