"""Finite catalogs of rational p-normed spaces and certified operator nets.

The limit construction relies on countable dense families of spaces,
isometries, and operators.  At desk scale those are replaced by finite,
parameterized stand-ins:

* an exhaustive enumeration of spaces whose generators have small rational
  entries,
* a witness search that relates a given isometry to a coordinate inclusion
  between such rational spaces through a commuting square of certified
  almost-isometries, and
* entry-grids of matrices filtered to certified almost-isometries.

Density is best-effort: every failure reports the best defect achieved so
callers can enlarge the parameters, and no claim is made beyond what the
returned certificates establish.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .certs import Certificate
from .core import Exponent, GeneratedSpace, eval_norm
from .errors import (
    CatalogTooCoarseError,
    CertificationError,
    SizeCapError,
    SpanError,
    ConditioningError,
)
from .maps import LinearMap, certify_isometry, map_distance

ENUMERATION_CAP = 100_000
NET_CANDIDATE_CAP = 1_000_000
NET_DIM_PRODUCT_CAP = 6


@dataclass(frozen=True)
class CatalogParams:
    """Size bounds for the rational catalog.

    Generator entries are fractions a/b with |a| <= coefficient_bound and
    b <= denominator_bound; spaces have dimension <= max_dim and at most
    max_generators generators.
    """

    max_dim: int
    max_generators: int
    denominator_bound: int
    coefficient_bound: int

    def __post_init__(self):
        for name in ("max_dim", "max_generators", "denominator_bound",
                     "coefficient_bound"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.max_generators < self.max_dim:
            raise ValueError("max_generators must be >= max_dim")


def _entry_values(params: CatalogParams) -> list[Fraction]:
    values = set()
    for b in range(1, params.denominator_bound + 1):
        for a in range(-params.coefficient_bound, params.coefficient_bound + 1):
            values.add(Fraction(a, b))
    return sorted(values)


def _canonical_vectors(values: list[Fraction], dim: int) -> list[tuple]:
    """Nonzero vectors over the value grid, one per sign class, sorted."""
    seen = set()
    for combo in itertools.product(values, repeat=dim):
        if all(c == 0 for c in combo):
            continue
        lead = next(c for c in combo if c != 0)
        if lead < 0:
            combo = tuple(-c for c in combo)
        seen.add(combo)
    return sorted(seen)


def enumerate_rational_spaces(p, params: CatalogParams) -> list[GeneratedSpace]:
    """Deterministically enumerate spaces with rational generators.

    Order is lexicographic in (dimension, generator count, flattened
    entries); sign duplicates and generator-list permutations are removed.
    The total candidate count is capped; exceeding it raises an error that
    names the first stratum left uncovered.
    """
    exponent = Exponent.of(p)
    values = None
    spaces: list[GeneratedSpace] = []
    total = 0
    for n in range(1, params.max_dim + 1):
        values = _entry_values(params)
        vectors = _canonical_vectors(values, n)
        for k in range(n, params.max_generators + 1):
            stratum = math.comb(len(vectors), k)
            if total + stratum > ENUMERATION_CAP:
                raise SizeCapError(
                    f"catalog enumeration cap {ENUMERATION_CAP} exceeded "
                    f"at stratum dim={n}, generators={k}"
                )
            total += stratum
            for combo in itertools.combinations(vectors, k):
                mat = np.array([[float(c) for c in vec] for vec in combo])
                if np.linalg.matrix_rank(mat) < n:
                    continue
                spaces.append(GeneratedSpace(exponent, n, mat))
    return spaces


# ---------------------------------------------------------------------------
# witness search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DensityWitness:
    """A commuting square relating g to a coordinate inclusion f.

    f: D -> C is the coordinate inclusion between rational spaces; the
    square v o g = f o u holds within 1e-9, and u, v (and f itself) carry
    certificates at the stated eps.
    """

    f: LinearMap
    u: LinearMap
    v: LinearMap
    eps: float
    denominator: int = 1
    certificates: dict = field(default_factory=dict)


def _snap(mat: np.ndarray, b: int, coefficient_bound: int) -> np.ndarray | None:
    numerators = np.round(mat * b)
    if np.abs(numerators).max(initial=0.0) > coefficient_bound:
        return None
    return numerators / b


def _ladder(bound: int) -> list[int]:
    steps = {1, bound}
    b = 2
    while b < bound:
        steps.add(b)
        b *= 2
    return sorted(steps)


def _snap_space(p, gens: np.ndarray, b: int,
                coefficient_bound: int) -> GeneratedSpace | None:
    snapped = _snap(gens, b, coefficient_bound)
    if snapped is None:
        return None
    keep = np.abs(snapped).max(axis=1) > 0.0
    snapped = snapped[keep]
    dim = gens.shape[1]
    if snapped.shape[0] < dim:
        return None
    try:
        return GeneratedSpace(p, dim, snapped)
    except (SpanError, ConditioningError):
        return None


def _completion(M: np.ndarray) -> np.ndarray:
    """An invertible T with T @ M = [I; 0] (coordinate form)."""
    n, m = M.shape
    eye_stack = np.eye(n, m)
    if np.array_equal(M, eye_stack):
        return np.eye(n)
    if n == m:
        return np.linalg.inv(M)
    full_u, _, _ = np.linalg.svd(M, full_matrices=True)
    S = np.hstack([M, full_u[:, m:]])
    return np.linalg.inv(S)


def rational_approximation(g: LinearMap, eps: float,
                           params: CatalogParams,
                           tol: float = 1e-6) -> DensityWitness:
    """Find a rational commuting-square witness for the isometry g.

    Searches deterministic candidates — identity coordinates when g is
    already in block form, then a basis completion that straightens g into
    coordinate form — over a ladder of denominators, snapping both
    generator lists to the rational grid.  Returns the first candidate
    whose three maps all certify at eps; otherwise raises an error
    carrying the best defect achieved.
    """
    eps = float(eps)
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    base = certify_isometry(g, eps, tol=tol)
    if base.verdict == "fail":
        raise CertificationError(
            "rational_approximation requires a map certified within eps"
        )

    A, B = g.domain, g.codomain
    m, n = A.dim, B.dim
    M = g.matrix
    p = A.p

    candidates: list[tuple[np.ndarray, str]] = []
    if m == n or (n > m and np.abs(M[m:, :]).max(initial=0.0) <= 1e-12):
        candidates.append((np.eye(n), "identity-coordinates"))
    T_comp = _completion(M)
    if not any(np.array_equal(T_comp, T) for T, _ in candidates):
        candidates.append((T_comp, "basis-completion"))

    best_defect = math.inf
    for T, label in candidates:
        TM = T @ M
        if n > m and np.abs(TM[m:, :]).max(initial=0.0) > 1e-9:
            continue
        u_mat = TM[:m, :]
        for b in _ladder(params.denominator_bound):
            D = _snap_space(p, A.generators @ u_mat.T, b,
                            params.coefficient_bound)
            C = _snap_space(p, B.generators @ T.T, b,
                            params.coefficient_bound)
            if D is None or C is None:
                continue
            if max(D.dim, C.dim) > params.max_dim or \
                    max(D.gen_count, C.gen_count) > params.max_generators:
                continue
            u = LinearMap(A, D, u_mat)
            v = LinearMap(B, C, T)
            f = LinearMap(D, C, np.eye(n, m))
            commute = map_distance(v @ g, f @ u)
            certs = {
                "u": certify_isometry(u, eps, tol=tol),
                "v": certify_isometry(v, eps, tol=tol),
                "f": certify_isometry(f, eps, tol=tol),
            }
            defect = commute
            for cert in certs.values():
                ev = cert.evidence
                defect = max(defect, ev["op_norm"] - 1.0,
                             1.0 - ev["conorm_lo"])
            if commute <= 1e-9 and all(
                    c.verdict == "pass" for c in certs.values()):
                return DensityWitness(f=f, u=u, v=v, eps=eps,
                                      denominator=b, certificates=certs)
            best_defect = min(best_defect, defect)
    raise CatalogTooCoarseError(
        f"catalog too coarse: best witness defect {best_defect:.6e} "
        f"exceeds eps = {eps}", best_defect=best_defect,
    )


# ---------------------------------------------------------------------------
# operator nets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OperatorNet:
    """A finite grid of certified almost-isometries.

    Behaves as a list of maps; covering_constant C is the operator-norm
    bound of a per-entry perturbation by one grid step, so any
    (eps - C*step)-isometry lies within C*step of some member.
    """

    maps: tuple[LinearMap, ...]
    covering_constant: float
    step: float
    eps: float

    def __iter__(self):
        return iter(self.maps)

    def __len__(self):
        return len(self.maps)

    def __getitem__(self, idx):
        return self.maps[idx]


def _coordinate_bounds(space: GeneratedSpace) -> np.ndarray:
    """max |g_i| over generators: |x_i| <= bound_i * |x| on the space."""
    if space.gen_count == 0:
        return np.zeros(space.dim)
    return np.abs(space.generators).max(axis=0)


def operator_net(domain: GeneratedSpace, target: GeneratedSpace,
                 eps: float, step: float,
                 tol: float = 1e-6) -> OperatorNet:
    """Entry-grid of certified eps-isometries domain -> target.

    Entries range over step * Z within the a-priori bound
    |M_ij| <= (1+eps) * |e_j|_domain * c_i, where c_i is the i-th
    coordinate-functional bound of the target.
    """
    eps = float(eps)
    step = float(step)
    if step <= 0.0:
        raise ValueError("step must be positive")
    if eps < 0.0:
        raise ValueError("eps must be nonnegative")
    if domain.dim * target.dim > NET_DIM_PRODUCT_CAP:
        raise SizeCapError(
            f"operator_net needs domain.dim * target.dim <= "
            f"{NET_DIM_PRODUCT_CAP}"
        )
    if domain.p != target.p:
        raise CertificationError("domain and target must share the exponent")
    p = domain.p.value

    if domain.dim == 0:
        empty = LinearMap(domain, target, np.zeros((target.dim, 0)))
        return OperatorNet(maps=(empty,), covering_constant=0.0,
                           step=step, eps=eps)

    basis_norms = np.array([
        eval_norm(domain, np.eye(domain.dim)[j]).value
        for j in range(domain.dim)
    ])
    c_target = _coordinate_bounds(target)
    dom_coord = _coordinate_bounds(domain)
    target_e_norms = np.array([
        eval_norm(target, np.eye(target.dim)[i]).value
        for i in range(target.dim)
    ]) if target.dim else np.zeros(0)

    # covering constant: a per-entry perturbation Delta with |Delta_ij| <= s
    # satisfies |Delta|^p <= s^p * sum_ij dom_coord_j^p |e_i|_target^p
    weight = float(sum(
        dom_coord[j] ** p * target_e_norms[i] ** p
        for i in range(target.dim) for j in range(domain.dim)
    ))
    covering = weight ** (1.0 / p)

    grids = []
    total = 1
    for i in range(target.dim):
        for j in range(domain.dim):
            bound = (1.0 + eps) * basis_norms[j] * c_target[i]
            k_max = int(math.floor(bound / step + 1e-12))
            grid = [k * step for k in range(-k_max, k_max + 1)]
            total *= len(grid)
            if total > NET_CANDIDATE_CAP:
                raise SizeCapError(
                    f"operator_net grid beyond {NET_CANDIDATE_CAP} candidates"
                )
            grids.append(grid)

    members = []
    lo_need = 1.0 - eps - tol
    hi_need = 1.0 + eps + tol
    for entries in itertools.product(*grids):
        mat = np.array(entries).reshape(target.dim, domain.dim)
        ok = True
        for j in range(domain.dim):
            col = eval_norm(target, mat[:, j]).value
            if col > hi_need * basis_norms[j] or \
                    col < lo_need * basis_norms[j]:
                ok = False
                break
        if not ok:
            continue
        candidate = LinearMap(domain, target, mat)
        cert = certify_isometry(candidate, eps, tol=tol)
        if cert.verdict == "pass":
            members.append(candidate)
    return OperatorNet(maps=tuple(members), covering_constant=covering,
                       step=step, eps=eps)
