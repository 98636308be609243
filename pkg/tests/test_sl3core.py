"""sl(3): generators, Casimirs, finite modules, Lax factorization, R-operators.

Scalar frozen values (parameter triples, Casimir eigenvalues) were computed by
hand from the closed forms. Frozen operator columns are regression anchors:
each is guarded by an identity checked in the same file (weight-shift
intertwining, defining relations), so a wrong anchor cannot pass the suite.
"""

from fractions import Fraction as F
from functools import lru_cache

import pytest

from rfactor.polyspace import comb_mul, comb_pow
from rfactor.linop import (
    commutator,
    compose,
    identity_op,
    is_zero,
    lax_compose_scalar,
    lax_is_zero,
    lax_mat_mul,
    lax_mul,
    lax_mul_mat,
    lax_sub,
    mat_inv,
    op_add,
    op_equal,
    op_scale,
    op_sub,
    run_pipeline,
    scalar_op,
    site_embed,
    stage_euler,
    stage_laurent,
    subst_op,
)
from rfactor.sl3core import (
    GEN_NAMES,
    Sl3Params,
    sl3_casimirs,
    sl3_findim_dim,
    sl3_findim_module,
    sl3_fundamental,
    sl3_generators,
    sl3_gl_ops,
    sl3_invariance_matrix,
    sl3_lax,
    sl3_lax_casimir_form,
    sl3_lax_factored,
    sl3_pair,
    sl3_r1,
    sl3_r2,
    sl3_r3,
    sl3_r3_single,
    sl3_rhat,
    sl3_rmatrix,
    sl3_shift_flows,
    sl3_site,
    sl3_total_generators,
    sl3_weight_shifts,
    op_scalar_part,
    vec_series_exp,
)

P1 = Sl3Params(F(1, 2), F(1, 3), F(2))
P2 = Sl3Params(F(1, 5), F(2, 7), F(0))


def _idx(basis, **exps):
    return basis.index[tuple(exps.get(v.name, 0) for v in basis.vars)]


def lax_min_cert(*laxes):
    return min(b.certified for L in laxes for row in L.blocks for b in row)


@lru_cache(maxsize=None)
def _pair(cap):
    return sl3_pair(cap)


@lru_cache(maxsize=None)
def _factors(cap):
    pair = _pair(cap)
    u1, u2, u3 = P1.triple
    v1, v2, v3 = P2.triple
    r1 = sl3_r1(pair, u1, v1, v2, v3)
    r2 = sl3_r2(pair, u1, u2, v2, v3)
    r3 = sl3_r3(pair, u1, u2, u3, v3)
    return r1, r2, r3


@lru_cache(maxsize=None)
def _lax_pair_product(cap, t1, t2):
    pair = _pair(cap)
    return lax_mul(
        sl3_lax(pair, t1[0], t1[1], t1[2], "1"),
        sl3_lax(pair, t2[0], t2[1], t2[2], "2"),
    )


def _defining_residual(cap, R, t1, t2, q1, q2):
    """R . L1(t1) L2(t2) - L1(q1) L2(q2) . R, window cap - 2."""
    P = _lax_pair_product(cap, t1, t2)
    Q = _lax_pair_product(cap, q1, q2)
    D = lax_sub(
        lax_compose_scalar(R, P, "left"), lax_compose_scalar(R, Q, "right")
    )
    return lax_is_zero(D, cap - 2)


def test_parameter_triple_frozen():
    p = Sl3Params(F(2, 3), F(1, 5), F(7, 11))
    assert p.triple == (F(-851, 495), F(-257, 495), F(568, 495))
    assert sum(p.triple) == 3 * p.u - 3
    q = Sl3Params(F(1), F(0), F(1))
    assert q.triple == (F(-4, 3), F(-1, 3), F(5, 3))
    # weights recovered from differences
    assert q.u3 - q.u2 - 1 == q.m and q.u2 - q.u1 - 1 == q.n
    assert p.u3 - p.u2 - 1 == p.m and p.u2 - p.u1 - 1 == p.n


def test_generator_actions_frozen():
    b = sl3_site(4)
    m, n = F(1, 2), F(1, 3)
    g = sl3_generators(b, m, n)
    one = _idx(b)
    assert g["T23"].col(one) == {_idx(b, z=1): m}
    assert g["T12"].col(one) == {_idx(b, x=1): n}
    assert g["T13"].col(one) == {_idx(b, y=1): m + n, _idx(b, x=1, z=1): m}
    assert g["H1"].col(one) == {one: -n}
    assert g["H2"].col(one) == {one: -m}
    assert g["T21"].col(_idx(b, x=1)) == {one: F(1)}
    assert g["T31"].col(_idx(b, y=1)) == {one: F(1)}
    assert g["T32"].col(_idx(b, y=1)) == {_idx(b, x=1): F(-1)}
    assert g["T32"].col(_idx(b, z=1)) == {one: F(1)}


def test_gl_commutation_relations():
    b = sl3_site(5)
    for m, n in ((F(1), F(0)), (F(2, 3), F(1, 5)), (F(-3, 4), F(5, 2))):
        T = sl3_gl_ops(b, m, n)
        rng = (1, 2, 3)
        for a in rng:
            for bb in rng:
                for c in rng:
                    for d in rng:
                        lhs = commutator(T[a, bb], T[c, d])
                        rhs = None
                        if bb == c:
                            rhs = T[a, d]
                        if d == a:
                            t = op_scale(T[c, bb], F(-1))
                            rhs = t if rhs is None else op_add(rhs, t)
                        res = lhs if rhs is None else op_sub(lhs, rhs)
                        w = res.certified
                        assert w >= 1
                        ok, wit = is_zero(res, w)
                        assert ok, ((a, bb, c, d), wit)


def test_casimirs_scalar_and_cross_cap_stable():
    m, n = F(2, 3), F(1, 5)
    for cap in (3, 4):
        b = sl3_site(cap)
        C2, C3 = sl3_casimirs(b, m, n)
        s2, s3 = op_scalar_part(C2), op_scalar_part(C3)
        assert s2 == F(1448, 675)
        assert s3 == F(126776, 30375)
        ok, wit = is_zero(op_sub(C2, scalar_op(b, s2)), min(C2.certified, cap - 2))
        assert ok, wit
        ok, wit = is_zero(op_sub(C3, scalar_op(b, s3)), min(C3.certified, cap - 2))
        assert ok, wit


def test_quadratic_casimir_closed_form():
    # C2 . 1 = sum(lam_a^2) + 2 (m + n) with lam the diagonal weights of 1
    b = sl3_site(3)
    for m, n in ((F(1, 2), F(1, 3)), (F(-2, 7), F(3)), (F(0), F(1))):
        lam = (-(m + 2 * n) / 3, (n - m) / 3, (n + 2 * m) / 3)
        C2, _ = sl3_casimirs(b, m, n)
        assert op_scalar_part(C2) == sum(t * t for t in lam) + 2 * (m + n)


def test_fundamental_representation_correspondence():
    # weight (1, 0): the module span {y + x z, z, 1} carries T_ab -> E_ab
    b = sl3_site(4)
    g = sl3_generators(b, F(1), F(0))
    e = [
        {_idx(b, y=1): F(1), _idx(b, x=1, z=1): F(1)},
        {_idx(b, z=1): F(1)},
        {_idx(b): F(1)},
    ]
    mats = sl3_fundamental((1, 0))
    for name in GEN_NAMES:
        M = mats[name]
        for j in range(3):
            got = g[name].apply_vec(e[j])
            want = {}
            for i in range(3):
                if M[i][j]:
                    for k, c in e[i].items():
                        want[k] = want.get(k, F(0)) + M[i][j] * c
            assert got == {k: c for k, c in want.items() if c}, (name, j)
    # weight (0, 1): span {1, -x, -y} carries the dual T_ab -> -E_ba
    g = sl3_generators(b, F(0), F(1))
    e = [{_idx(b): F(1)}, {_idx(b, x=1): F(-1)}, {_idx(b, y=1): F(-1)}]
    mats = sl3_fundamental((0, 1))
    for name in GEN_NAMES:
        M = mats[name]
        for j in range(3):
            got = g[name].apply_vec(e[j])
            want = {}
            for i in range(3):
                if M[i][j]:
                    for k, c in e[i].items():
                        want[k] = want.get(k, F(0)) + M[i][j] * c
            assert got == {k: c for k, c in want.items() if c}, (name, j)


def test_findim_dimensions():
    expected = {
        (1, 0): 3,
        (0, 1): 3,
        (1, 1): 8,
        (2, 0): 6,
        (0, 2): 6,
        (2, 1): 15,
    }
    for (M, N), dim in expected.items():
        basis, vectors = sl3_findim_module(M, N)
        assert sl3_findim_dim(M, N) == dim
        assert len(vectors) == dim, (M, N)
        # closed under every generator
        gens = sl3_generators(basis, F(M), F(N))
        from rfactor.sl3core import _Span

        span = _Span()
        for v in vectors:
            span.insert(dict(v))
        for v in vectors:
            for op in gens.values():
                assert not span.insert(op.apply_vec(v))


def test_findim_variable_support():
    # weight (M, 0): after y -> y - x z every module vector is x-free
    basis, vectors = sl3_findim_module(2, 0)
    names = [v.name for v in basis.vars]
    rules = {
        "y": {
            tuple(1 if nm == "y" else 0 for nm in names): F(1),
            tuple(1 if nm in ("x", "z") else 0 for nm in names): F(-1),
        }
    }
    twist = subst_op(basis, rules)
    xi = names.index("x")
    for v in vectors:
        for k in twist.apply_vec(v):
            assert basis.monomials[k][xi] == 0
    # weight (0, N): module vectors are z-free as they stand
    basis, vectors = sl3_findim_module(0, 2)
    zi = [v.name for v in basis.vars].index("z")
    for v in vectors:
        for k in v:
            assert basis.monomials[k][zi] == 0


def test_raising_flow_generating_function():
    # exp(mu T12) exp(nu T23) exp(lam T13) 1
    #   = (1 + mu x + lam y)^N (1 + nu z + (lam + mu nu)(y + x z))^M
    M, N = 2, 1
    basis = sl3_site(2 * (M + N) + 2)
    g = sl3_generators(basis, F(M), F(N))
    mu, nu, lam = F(1, 2), F(-2, 3), F(3, 5)
    v = vec_series_exp(g["T13"], lam, {_idx(basis): F(1)})
    v = vec_series_exp(g["T23"], nu, v)
    v = vec_series_exp(g["T12"], mu, v)
    names = [vv.name for vv in basis.vars]

    def mono(**e):
        return tuple(e.get(nm, 0) for nm in names)

    b1 = {mono(): F(1), mono(x=1): mu, mono(y=1): lam}
    b2 = {
        mono(): F(1),
        mono(z=1): nu,
        mono(y=1): lam + mu * nu,
        mono(x=1, z=1): lam + mu * nu,
    }
    rhs = {
        basis.index[k]: c for k, c in comb_mul(comb_pow(b1, N), comb_pow(b2, M)).items()
    }
    assert v == rhs


def test_lax_direct_equals_casimir_form_and_factored():
    cap = 4
    b = sl3_site(cap)
    p = Sl3Params(F(2, 3), F(1, 5), F(7, 11))
    Ld = sl3_lax(b, *p.triple)
    Lc = sl3_lax_casimir_form(b, p.m, p.n, p.u)
    D = lax_sub(Ld, Lc)
    assert lax_min_cert(D) >= cap - 2
    ok, wit = lax_is_zero(D, cap - 2)
    assert ok, wit
    Lf = sl3_lax_factored(b, *p.triple)
    D2 = lax_sub(Ld, Lf)
    assert lax_min_cert(D2) >= cap - 2
    ok, wit = lax_is_zero(D2, cap - 2)
    assert ok, wit


def test_lax_band_structure():
    b = sl3_site(4)
    L = sl3_lax(b, F(1, 2), F(1, 3), F(1, 5))
    assert L.blocks[0][1].shift == -1  # d/dx
    assert L.blocks[0][2].shift == -2  # d/dy
    assert L.blocks[1][0].shift == 1
    assert L.blocks[2][0].shift == 2
    for i in range(3):
        assert L.blocks[i][i].shift <= 0


def test_shift_flow_inverse_and_lax_invariance():
    cap = 4
    b = sl3_site(cap)
    a_, b_, c_ = F(1, 2), F(-2, 5), F(3, 4)
    S, Sinv = sl3_shift_flows(b, a_, b_, c_)
    w = min(S.certified, Sinv.certified)
    ok, wit = is_zero(op_sub(compose(S, Sinv), identity_op(b)), w)
    assert ok, wit
    ok, wit = is_zero(op_sub(compose(Sinv, S), identity_op(b)), w)
    assert ok, wit
    p = Sl3Params(F(2, 3), F(1, 5), F(7, 11))
    L = sl3_lax(b, *p.triple)
    M = sl3_invariance_matrix(a_, b_, c_)
    lhs = lax_mat_mul(mat_inv(M), lax_mul_mat(L, M))
    rhs = lax_compose_scalar(
        Sinv, lax_compose_scalar(S, L, "right"), "left"
    )
    D = lax_sub(lhs, rhs)
    ok, wit = lax_is_zero(D, cap - 2)
    assert ok, wit


def test_r_factors_fix_vacuum_and_frozen_columns():
    pair = _pair(3)
    r1, r2, r3 = _factors(3)
    vac = _idx(pair)
    for r in (r1, r2, r3):
        assert r.col(vac) == {vac: F(1)}
        assert r.shift == 0
    assert r1.col(_idx(pair, x2=1)) == {
        _idx(pair, x2=1): F(-997, 180),
        _idx(pair, x1=1): F(1177, 180),
    }
    assert r1.col(_idx(pair, y2=1)) == {
        _idx(pair, x2=1, z2=1): F(8239, 9360),
        _idx(pair, y2=1): F(-969, 208),
        _idx(pair, x1=1, z2=1): F(-8239, 9360),
        _idx(pair, y1=1): F(1177, 208),
    }
    assert r2.col(_idx(pair, y1=1)) == {
        _idx(pair, z1=1, x2=1): F(-1207, 210),
        _idx(pair, x1=1, z1=1): F(1207, 210),
        _idx(pair, y1=1): F(1),
    }
    assert r3.col(_idx(pair, y1=1)) == {
        _idx(pair, x2=1, z2=1): F(1396, 1155),
        _idx(pair, y2=1): F(1396, 1155),
        _idx(pair, x1=1, z2=1): F(-1396, 1155),
        _idx(pair, y1=1): F(-241, 1155),
    }


def test_defining_relation_each_factor():
    cap = 3
    u1, u2, u3 = P1.triple
    v1, v2, v3 = P2.triple
    r1, r2, r3 = _factors(cap)
    t, q = (u1, u2, u3), (v1, v2, v3)
    ok, wit = _defining_residual(cap, r1, t, q, (v1, u2, u3), (u1, v2, v3))
    assert ok, wit
    ok, wit = _defining_residual(cap, r2, t, q, (u1, v2, u3), (v1, u2, v3))
    assert ok, wit
    ok, wit = _defining_residual(cap, r3, t, q, (u1, u2, v3), (v1, v2, u3))
    assert ok, wit


def test_factor_side_relations():
    from rfactor.linop import diffop_to_op, term

    pair = _pair(3)
    r1, r2, r3 = _factors(3)

    def mult(terms):
        return diffop_to_op(pair, [term(pair, c, mu, None) for c, mu in terms])

    def dop(terms):
        return diffop_to_op(pair, [term(pair, c, mu, de) for c, mu, de in terms])

    def commutes(R, op):
        res = commutator(R, op)
        w = min(res.certified, 3 - max(0, op.shift))
        return is_zero(res, w)

    # first factor: site-1 multiplications and one mixed derivative
    for terms in ([(1, {"x1": 1})], [(1, {"y1": 1})], [(1, {"z1": 1})]):
        ok, wit = commutes(r1, mult(terms))
        assert ok, wit
    side = dop(
        [(1, None, {"z2": 1}), (-1, {"x2": 1}, {"y2": 1}), (1, {"x1": 1}, {"y2": 1})]
    )
    ok, wit = commutes(r1, side)
    assert ok, wit
    # second factor
    for terms in (
        [(1, {"y1": 1}), (1, {"x1": 1, "z1": 1})],
        [(1, {"z1": 1})],
        [(1, {"x2": 1})],
        [(1, {"y2": 1})],
    ):
        ok, wit = commutes(r2, mult(terms))
        assert ok, wit
    # third factor
    for terms in ([(1, {"x2": 1})], [(1, {"y2": 1})], [(1, {"z2": 1})]):
        ok, wit = commutes(r3, mult(terms))
        assert ok, wit
    side = dop([(1, None, {"x1": 1}), (-1, {"z2": 1}, {"y1": 1})])
    ok, wit = commutes(r3, side)
    assert ok, wit


def test_factorization_order_independence():
    pair = _pair(3)
    A1 = sl3_rhat(pair, P1, P2, order=1)
    A2 = sl3_rhat(pair, P1, P2, order=2)
    w = min(A1.certified, A2.certified)
    assert w == 3
    ok, wit = is_zero(op_sub(A1, A2), w)
    assert ok, wit


def test_full_defining_relation_and_permuted_form():
    cap = 3
    pair = _pair(cap)
    t, q = P1.triple, P2.triple
    A = sl3_rhat(pair, P1, P2)
    ok, wit = _defining_residual(cap, A, t, q, q, t)
    assert ok, wit
    # R = P . Rhat intertwines with the site-swapped product
    R = sl3_rmatrix(pair, P1, P2)
    Pd = _lax_pair_product(cap, t, q)
    Qd = lax_mul(
        sl3_lax(pair, q[0], q[1], q[2], "2"),
        sl3_lax(pair, t[0], t[1], t[2], "1"),
    )
    D = lax_sub(
        lax_compose_scalar(R, Pd, "left"), lax_compose_scalar(R, Qd, "right")
    )
    ok, wit = lax_is_zero(D, cap - 2)
    assert ok, wit


def test_weight_shift_intertwining():
    pair = _pair(3)
    r1, r2, r3 = _factors(3)
    before1, before2 = (P1.m, P1.n), (P2.m, P2.n)
    told = sl3_total_generators(pair, before1, before2)
    for which, R in (("r1", r1), ("r2", r2), ("r3", r3)):
        w1, w2 = sl3_weight_shifts(which, P1, P2)
        tnew = sl3_total_generators(pair, w1, w2)
        for k in GEN_NAMES:
            res = op_sub(compose(R, told[k]), compose(tnew[k], R))
            w = min(res.certified, 3 - max(0, told[k].shift))
            ok, wit = is_zero(res, w)
            assert ok, (which, k, wit)
    # the full swap exchanges the two site weights
    A = sl3_rhat(pair, P1, P2)
    tnew = sl3_total_generators(pair, before2, before1)
    for k in GEN_NAMES:
        res = op_sub(compose(A, told[k]), compose(tnew[k], A))
        w = min(res.certified, 3 - max(0, told[k].shift))
        ok, wit = is_zero(res, w)
        assert ok, (k, wit)


def test_inverse_is_identity():
    pair = _pair(3)
    A = sl3_rhat(pair, P1, P2)
    B = sl3_rhat(pair, P2, P1)
    ok, wit = is_zero(
        op_sub(compose(B, A), identity_op(pair)), min(A.certified, B.certified)
    )
    assert ok, wit


def test_single_site_third_factor_reduction():
    from rfactor.sl3core import _vi

    pair = _pair(3)
    u1, u2, u3 = P1.triple
    v3 = P2.u3
    single = sl3_r3_single(pair.factors[0], u1, u2, u3, v3, suffix="1")
    emb = site_embed(single, 1, pair)
    z1, y1, x1 = _vi(pair, "z1"), _vi(pair, "y1"), _vi(pair, "x1")
    core = run_pipeline(
        pair,
        [
            stage_euler(pair, z1, 1, u2 - u3 + 1),
            stage_laurent(pair, -1, num=y1, den=z1, target=x1),
            stage_euler(pair, y1, u1 - v3 + 1, u1 - u3 + 1),
            stage_laurent(pair, 1, num=y1, den=z1, target=x1),
            stage_euler(pair, z1, u2 - v3 + 1, 1),
        ],
    )
    w = min(emb.certified, core.certified)
    ok, wit = is_zero(op_sub(emb, core), w)
    assert ok, wit


def test_mutation_breaks_defining_relation():
    cap = 3
    pair = _pair(cap)
    u1, u2, u3 = P1.triple
    v1, v2, v3 = P2.triple
    bad = sl3_r3(pair, u1, u2, u3, v3, mutate=("b", 1))
    ok, wit = _defining_residual(
        cap, bad, (u1, u2, u3), (v1, v2, v3), (u1, u2, v3), (v1, v2, u3)
    )
    assert not ok
    assert wit is not None and isinstance(wit[1], str)
    # mutating one factor inside the full swap also breaks order agreement
    A1 = sl3_rhat(pair, P1, P2, order=1, mutate=("r2", ("a", 1)))
    A2 = sl3_rhat(pair, P1, P2, order=2)
    ok, wit = is_zero(op_sub(A1, A2), min(A1.certified, A2.certified))
    assert not ok and wit is not None
