"""Constructions on p-normed spaces: sums, quotients, push-outs, amalgams.

Every construction returns the new space together with its structure maps and
a certificate whose rows are numeric leaves of the proof chain: exact operator
norms, certified co-norm lower bounds of the inputs, and the closed-form
bounds those leaves imply for the output maps.  The derived bounds can be fed
to `certify_isometry` as `known_conorm_lo`, giving certified verdicts even
where branch-and-bound alone would be inconclusive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .certs import Certificate, eq_row, ineq_row, make_certificate
from .core import GeneratedSpace, p_root
from .errors import (
    CertificationError,
    DimensionMismatchError,
    ExponentMismatchError,
)
from .maps import LinearMap, RatioBounds, conorm, map_distance, op_norm

QUOTIENT_DROP_TOL = 1e-12
COMMUTE_TOL = 1e-9


def _require_same_exponent(spaces):
    p = spaces[0].p
    for s in spaces[1:]:
        if s.p != p:
            raise ExponentMismatchError(
                "all spaces in a construction must share one exponent"
            )
    return p


# ---------------------------------------------------------------------------
# direct sums
# ---------------------------------------------------------------------------

@dataclass
class SumResult:
    space: GeneratedSpace
    inclusions: list[LinearMap]
    projections: list[LinearMap]
    offsets: list[int]


def lp_sum(spaces: list[GeneratedSpace]) -> SumResult:
    """Direct sum with p-power-additive norm.

    Generators are the block embeddings of the summands' generators, which
    generate exactly the norm |(x_1, ..., x_r)|^p = sum_i |x_i|^p.
    """
    if not spaces:
        raise ValueError("lp_sum needs at least one summand")
    p = _require_same_exponent(spaces)
    dims = [s.dim for s in spaces]
    total = sum(dims)
    offsets = [sum(dims[:i]) for i in range(len(spaces))]
    rows = []
    for off, s in zip(offsets, spaces):
        for g in s.generators:
            row = np.zeros(total)
            row[off:off + s.dim] = g
            rows.append(row)
    space = GeneratedSpace(p, total, np.array(rows) if rows
                           else np.zeros((0, total)))
    inclusions, projections = [], []
    for off, s in zip(offsets, spaces):
        inc = np.zeros((total, s.dim))
        inc[off:off + s.dim, :] = np.eye(s.dim)
        proj = np.zeros((s.dim, total))
        proj[:, off:off + s.dim] = np.eye(s.dim)
        inclusions.append(LinearMap(s, space, inc))
        projections.append(LinearMap(space, s, proj))
    return SumResult(space, inclusions, projections, offsets)


# ---------------------------------------------------------------------------
# quotients
# ---------------------------------------------------------------------------

@dataclass
class QuotientResult:
    space: GeneratedSpace
    projection: LinearMap
    kernel_rank: int


def quotient(space: GeneratedSpace, kernel_vectors) -> QuotientResult:
    """Quotient by the span of the given vectors.

    Coordinates on the quotient are an orthonormal basis of the orthogonal
    complement of the kernel; the quotient norm is generated by the images of
    the original generators (the image of a p-convex hull is the p-convex
    hull of the images), with vanishing images dropped.
    """
    K = np.asarray(kernel_vectors, dtype=float)
    if K.size == 0:
        K = np.zeros((0, space.dim))
    if K.ndim != 2 or K.shape[1] != space.dim:
        raise DimensionMismatchError(
            f"kernel vectors must have shape (r, {space.dim})"
        )
    if K.shape[0] == 0 or not np.abs(K).max():
        proj = LinearMap(space, space, np.eye(space.dim))
        return QuotientResult(space, proj, 0)

    _, sv, vt = np.linalg.svd(K)
    rank = int(np.sum(sv > 1e-12 * max(1.0, float(sv[0]))))
    P = vt[rank:]                      # orthonormal rows spanning the complement
    q_dim = space.dim - rank
    if q_dim == 0:
        zero = GeneratedSpace(space.p, 0, [])
        return QuotientResult(zero, LinearMap(space, zero,
                                              np.zeros((0, space.dim))), rank)

    images = space.generators @ P.T    # (k, q_dim)
    scale = max(1.0, float(np.abs(space.generators).max()))
    keep = np.abs(images).max(axis=1) > QUOTIENT_DROP_TOL * scale
    qspace = GeneratedSpace(space.p, q_dim, images[keep])
    return QuotientResult(qspace, LinearMap(space, qspace, P), rank)


# ---------------------------------------------------------------------------
# push-outs
# ---------------------------------------------------------------------------

@dataclass
class PushoutResult:
    """Push-out of u: X -> Y against v: X -> Z.

    The space is (Y (+)_p Z) / span{(u x, -v x)}; the legs satisfy
    leg_y o u = leg_z o v and are always nonexpansive.  When u is an
    isometry and v is nonexpansive, leg_z is an isometry; the derived
    co-norm bounds record the general closed forms.
    """

    space: GeneratedSpace
    leg_y: LinearMap
    leg_z: LinearMap
    u: LinearMap
    v: LinearMap
    sum: SumResult
    projection: LinearMap
    derived_conorm_leg_y: float
    derived_conorm_leg_z: float
    certificate: Certificate


def _leg_conorm_power_bound(c_iso_p: float, o_other_p: float) -> float:
    """Closed-form co-norm power bound for a push-out leg.

    The leg opposite u has |leg z|^p = inf_x |u x|^p + |z - v x|^p
    >= |z|^p * min(1, conorm(u)^p / op(v)^p).
    """
    if o_other_p <= 0.0:
        return 1.0
    return min(1.0, c_iso_p / o_other_p)


def pushout(u: LinearMap, v: LinearMap,
            conorm_tol: float = 1e-6,
            conorm_budget: int = 20_000) -> PushoutResult:
    if u.domain.dim != v.domain.dim:
        raise DimensionMismatchError(
            "push-out maps must share their domain"
        )
    _require_same_exponent([u.domain, u.codomain, v.codomain])
    Y, Z = u.codomain, v.codomain
    total = lp_sum([Y, Z])
    kernel = np.hstack([u.matrix.T, -v.matrix.T])  # rows (u e_i, -v e_i)
    q = quotient(total.space, kernel)
    po = q.space
    P = q.projection.matrix
    leg_y = LinearMap(Y, po, P[:, :Y.dim])
    leg_z = LinearMap(Z, po, P[:, Y.dim:])

    o_u, o_v = op_norm(u), op_norm(v)
    c_u = conorm(u, tol=conorm_tol, budget=conorm_budget)
    c_v = conorm(v, tol=conorm_tol, budget=conorm_budget)
    p = u.p.value
    bound_z = _leg_conorm_power_bound(c_u.lo**p, o_v**p)
    bound_y = _leg_conorm_power_bound(c_v.lo**p, o_u**p)
    commute = map_distance(leg_y @ u, leg_z @ v)
    rows = [
        ineq_row("leg_y_nonexpansive", op_norm(leg_y), 1.0, 1e-9),
        ineq_row("leg_z_nonexpansive", op_norm(leg_z), 1.0, 1e-9),
        ineq_row("square_commutes", commute, 0.0, COMMUTE_TOL),
    ]
    cert = make_certificate(
        "inequality_ledger",
        {"tol": COMMUTE_TOL},
        {
            "rows": rows,
            "op_u": o_u,
            "op_v": o_v,
            "conorm_u_lo": c_u.lo,
            "conorm_v_lo": c_v.lo,
            "derived_conorm_leg_y": p_root(bound_y, p),
            "derived_conorm_leg_z": p_root(bound_z, p),
        },
    )
    return PushoutResult(
        space=po, leg_y=leg_y, leg_z=leg_z, u=u, v=v, sum=total,
        projection=q.projection,
        derived_conorm_leg_y=p_root(bound_y, p),
        derived_conorm_leg_z=p_root(bound_z, p),
        certificate=cert,
    )


def pushout_factorize(po: PushoutResult, r: LinearMap, s: LinearMap,
                      tol: float = COMMUTE_TOL) -> LinearMap:
    """The unique map w with w o leg_y = r and w o leg_z = s.

    Requires r o u = s o v (within tol); w is [r | s] composed with the
    orthonormal section of the quotient projection, which kills the
    relation subspace exactly because of that commutation.
    """
    if r.codomain.dim != s.codomain.dim or r.codomain.p != s.codomain.p:
        raise DimensionMismatchError("r and s must share their codomain")
    defect = map_distance(r @ po.u, s @ po.v)
    if defect > tol:
        raise CertificationError(
            f"factorization requires r o u = s o v; defect {defect:.3e} "
            f"exceeds {tol:.3e}"
        )
    big = np.hstack([r.matrix, s.matrix])
    w = LinearMap(po.space, r.codomain, big @ po.projection.matrix.T)
    back_r = map_distance(w @ po.leg_y, r)
    back_s = map_distance(w @ po.leg_z, s)
    if max(back_r, back_s) > 10 * tol:
        raise CertificationError(
            "factorization failed to reproduce its inputs: "
            f"defects {back_r:.3e}, {back_s:.3e}"
        )
    return w


# ---------------------------------------------------------------------------
# amalgams
# ---------------------------------------------------------------------------

@dataclass
class AmalgamResult:
    """The amalgam of f: X -> Y at scale eps.

    Generators are the X- and Y-blocks plus the tilted family
    (g / eps, -f g / eps), so the generated norm is exactly

        |(x, y)|^p = inf_d |x - d|^p + |y + f d|^p + eps^p |d|^p,

    and |j o f - i| <= eps holds by taking d = -x on (j f - i) x.
    """

    space: GeneratedSpace
    i: LinearMap              # X -> amalgam
    j: LinearMap              # Y -> amalgam
    f: LinearMap
    eps: float
    derived_conorm_i: float
    derived_conorm_j: float
    certificate: Certificate


def amalgam(f: LinearMap, eps: float,
            conorm_tol: float = 1e-6,
            conorm_budget: int = 20_000) -> AmalgamResult:
    eps = float(eps)
    if eps <= 0.0:
        raise ValueError("amalgam scale eps must be positive")
    X, Y = f.domain, f.codomain
    p = f.p.value
    nx, ny = X.dim, Y.dim
    from .core import EVAL_DIM_CAP, EVAL_GEN_CAP
    from .errors import SizeCapError
    if nx + ny > EVAL_DIM_CAP or \
            2 * X.gen_count + Y.gen_count > EVAL_GEN_CAP:
        raise SizeCapError(
            f"amalgam would have dimension {nx + ny} with "
            f"{2 * X.gen_count + Y.gen_count} generators, beyond the "
            f"evaluation caps ({EVAL_DIM_CAP}, {EVAL_GEN_CAP})"
        )
    rows = []
    for g in X.generators:
        rows.append(np.concatenate([g, np.zeros(ny)]))
    for h in Y.generators:
        rows.append(np.concatenate([np.zeros(nx), h]))
    for g in X.generators:
        rows.append(np.concatenate([g / eps, -(f.matrix @ g) / eps]))
    space = GeneratedSpace(f.p, nx + ny, np.array(rows))
    i = LinearMap(X, space, np.vstack([np.eye(nx), np.zeros((ny, nx))]))
    j = LinearMap(Y, space, np.vstack([np.zeros((nx, ny)), np.eye(ny)]))

    o_f = op_norm(f)
    c_f = conorm(f, tol=conorm_tol, budget=conorm_budget)
    # i: cost of erasing x via the tilted family is (c_f^p + eps^p) per unit
    bound_i = min(1.0, c_f.lo**p + eps**p)
    # j: erasing y through f cannot pay unless op(f)^p exceeds 1 + eps^p
    bound_j = max(0.0, 1.0 - max(0.0, o_f**p - 1.0 - eps**p) / (1.0 + eps**p))
    defect = map_distance(j @ f, i)
    rows_cert = [
        ineq_row("i_nonexpansive", op_norm(i), 1.0, 1e-9),
        ineq_row("j_nonexpansive", op_norm(j), 1.0, 1e-9),
        ineq_row("factorization_defect", defect, eps, 1e-9),
    ]
    cert = make_certificate(
        "inequality_ledger",
        {"eps": eps, "tol": 1e-9},
        {
            "rows": rows_cert,
            "op_f": o_f,
            "conorm_f_lo": c_f.lo,
            "defect": defect,
            "derived_conorm_i": p_root(bound_i, p),
            "derived_conorm_j": p_root(bound_j, p),
        },
    )
    return AmalgamResult(
        space=space, i=i, j=j, f=f, eps=eps,
        derived_conorm_i=p_root(bound_i, p),
        derived_conorm_j=p_root(bound_j, p),
        certificate=cert,
    )


def operator_amalgam(am: AmalgamResult, r: LinearMap, s: LinearMap,
                     tol: float = COMMUTE_TOL) -> tuple[LinearMap, Certificate]:
    """Join r: X -> H and s: Y -> H into one map on the amalgam.

    Well-definedness needs |s o f - r| <= eps; the joined map is the block
    matrix [r | s], so its restriction along i reproduces r bit for bit.
    """
    if r.codomain.dim != s.codomain.dim or r.codomain.p != s.codomain.p:
        raise DimensionMismatchError("r and s must share their codomain")
    if r.domain.dim != am.f.domain.dim or s.domain.dim != am.f.codomain.dim:
        raise DimensionMismatchError(
            "r and s must be defined on the amalgam's two factors"
        )
    defect = map_distance(s @ am.f, r)
    if defect > am.eps + tol:
        raise CertificationError(
            f"operator amalgam requires |s o f - r| <= eps = {am.eps}; "
            f"got {defect:.6e}"
        )
    joined = LinearMap(am.space, r.codomain,
                       np.hstack([r.matrix, s.matrix]))
    o = op_norm(joined)
    rows = [
        ineq_row("compatibility_defect", defect, am.eps, tol),
        ineq_row("joined_norm_bound", o,
                 max(op_norm(r), op_norm(s),
                     defect / am.eps if am.eps > 0 else 0.0), 1e-9),
        eq_row("restriction_is_r", 0.0,
               float(np.abs(joined.matrix[:, :am.f.domain.dim]
                            - r.matrix).max(initial=0.0)), 0.0),
    ]
    cert = make_certificate(
        "inequality_ledger",
        {"eps": am.eps, "tol": tol},
        {"rows": rows, "op_joined": o, "defect": defect},
    )
    return joined, cert


# ---------------------------------------------------------------------------
# simultaneous extension
# ---------------------------------------------------------------------------

@dataclass
class MultiExtensionResult:
    """Simultaneous extension of maps along embeddings.

    Given pairs (u_g: X_g -> X'_g, t_g: X_g -> Y) with one shared codomain Y,
    produces a space Z, an embedding iota: Y -> Z, and extensions
    t'_g: X'_g -> Z with t'_g o u_g = iota o t_g.  When every u_g is an
    isometry and every t_g is nonexpansive, iota is an isometry and each
    t'_g is nonexpansive with co-norm at least conorm(stacked t)'s bound.
    """

    space: GeneratedSpace
    iota: LinearMap
    t_primes: list[LinearMap]
    pushout: PushoutResult
    domain_sum: SumResult
    derived_conorm_iota: float
    derived_conorm_t_prime: float
    certificate: Certificate


def multi_extension(pairs: list[tuple[LinearMap, LinearMap]],
                    conorm_tol: float = 1e-6,
                    conorm_budget: int = 20_000) -> MultiExtensionResult:
    if not pairs:
        raise ValueError("multi_extension needs at least one (u, t) pair")
    Y = pairs[0][1].codomain
    for u_g, t_g in pairs:
        if u_g.domain.dim != t_g.domain.dim:
            raise DimensionMismatchError(
                "each pair must share its domain"
            )
        if t_g.codomain is not Y and \
                t_g.codomain.generator_key() != Y.generator_key():
            raise DimensionMismatchError(
                "all t maps must share one codomain"
            )
    doms = lp_sum([u.domain for u, _ in pairs])
    prims = lp_sum([u.codomain for u, _ in pairs])
    # block-diagonal sum of the u's, and the row-concatenated t's
    big_u_mat = np.zeros((prims.space.dim, doms.space.dim))
    big_t_mat = np.zeros((Y.dim, doms.space.dim))
    for (u_g, t_g), d_off, p_off in zip(pairs, doms.offsets, prims.offsets):
        nd = u_g.domain.dim
        big_u_mat[p_off:p_off + u_g.codomain.dim, d_off:d_off + nd] = u_g.matrix
        big_t_mat[:, d_off:d_off + nd] = t_g.matrix
    big_u = LinearMap(doms.space, prims.space, big_u_mat)
    big_t = LinearMap(doms.space, Y, big_t_mat)

    po = pushout(big_u, big_t, conorm_tol=conorm_tol,
                 conorm_budget=conorm_budget)
    iota = po.leg_z
    t_primes = []
    for (u_g, t_g), inc in zip(pairs, prims.inclusions):
        t_prime = po.leg_y @ inc
        # exactness repair: when u_g is literally the coordinate inclusion,
        # overwrite the leading columns so t' o u = iota o t bit for bit
        eye = np.eye(u_g.codomain.dim, u_g.domain.dim)
        if u_g.matrix.shape == eye.shape and np.array_equal(u_g.matrix, eye):
            m = np.array(t_prime.matrix)
            m[:, :u_g.domain.dim] = iota.matrix @ t_g.matrix
            t_prime = LinearMap(t_prime.domain, t_prime.codomain, m)
        t_primes.append(t_prime)

    p = Y.p.value
    rows = [
        ineq_row("iota_nonexpansive", op_norm(iota), 1.0, 1e-9),
    ]
    for idx, ((u_g, t_g), t_prime) in enumerate(zip(pairs, t_primes)):
        defect = map_distance(t_prime @ u_g, iota @ t_g)
        rows.append(ineq_row(f"extension_identity_{idx}", defect, 0.0,
                             COMMUTE_TOL))
        rows.append(ineq_row(f"t_prime_{idx}_nonexpansive",
                             op_norm(t_prime),
                             max(1.0, op_norm(t_g)), 1e-9))
    cert = make_certificate(
        "inequality_ledger",
        {"tol": COMMUTE_TOL},
        {
            "rows": rows,
            "derived_conorm_iota": po.derived_conorm_leg_z,
            "derived_conorm_t_prime": po.derived_conorm_leg_y,
        },
    )
    return MultiExtensionResult(
        space=po.space, iota=iota, t_primes=t_primes, pushout=po,
        domain_sum=doms,
        derived_conorm_iota=po.derived_conorm_leg_z,
        derived_conorm_t_prime=po.derived_conorm_leg_y,
        certificate=cert,
    )
