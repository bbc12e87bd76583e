"""Finite-dimensional p-normed spaces presented by generating vectors.

A space is the pair (p, G) with 0 < p <= 1 rational and G a finite list of
generators spanning R^n.  The norm of x is

    |x| = inf { (sum_i |c_i|^p)^(1/p) : x = sum_i c_i * g_i }.

Because t -> |t|^p is concave, the infimum is attained at a representation
supported on a linearly independent subset of the generators, so the norm is
computed exactly by enumerating independent subsets and solving each one.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    ConditioningError,
    DimensionMismatchError,
    SizeCapError,
    SpanError,
)

EVAL_DIM_CAP = 8
EVAL_GEN_CAP = 16
CONDITION_CAP = 1e8
FEASIBILITY_TOL = 1e-9
TIE_TOL = 1e-12
SUPPORT_TOL = 1e-13


# ---------------------------------------------------------------------------
# exponent
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Exponent:
    """The exponent p as an exact rational in (0, 1]."""

    num: int
    den: int = 1

    def __post_init__(self):
        num, den = int(self.num), int(self.den)
        if den == 0:
            raise ValueError("exponent denominator is zero")
        if den < 0:
            num, den = -num, -den
        g = math.gcd(abs(num), den)
        if g > 1:
            num, den = num // g, den // g
        if not (0 < num <= den):
            raise ValueError(f"exponent must satisfy 0 < p <= 1, got {num}/{den}")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def of(cls, value) -> "Exponent":
        if isinstance(value, Exponent):
            return value
        if isinstance(value, tuple):
            return cls(*value)
        frac = Fraction(value).limit_denominator(10**9)
        return cls(frac.numerator, frac.denominator)

    @property
    def value(self) -> float:
        return self.num / self.den

    @property
    def inverse(self) -> float:
        return self.den / self.num

    def as_fraction(self) -> Fraction:
        return Fraction(self.num, self.den)

    def __str__(self) -> str:
        return f"{self.num}/{self.den}"


def power_sum(values: np.ndarray, p: float) -> float:
    """sum |v|^p over a flat array."""
    v = np.abs(np.asarray(values, dtype=float))
    return float(np.sum(v**p)) if v.size else 0.0


def p_root(power: float, p: float) -> float:
    """power^(1/p) for power >= 0."""
    if power <= 0.0:
        return 0.0
    return float(power ** (1.0 / p))


# ---------------------------------------------------------------------------
# spaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormValue:
    """An evaluated norm with the representation that attains it."""

    value: float
    power: float
    coefficients: np.ndarray  # length k, aligned with the generator list
    support: tuple[int, ...]  # generator indices actually used


class _SubsetLevel:
    """Pre-solved data for all generator subsets of one size."""

    __slots__ = ("indices", "columns", "solvers", "usable", "square")

    def __init__(self, indices, columns, solvers, usable, square):
        self.indices = indices    # (N, j) int indices into the generator list
        self.columns = columns    # (N, n, j) generator columns per subset
        self.solvers = solvers    # (N, j, n) pseudo-inverses: c = solver @ x
        self.usable = usable      # (N,) condition-number mask
        self.square = square      # True when j == dim (exact representations)


class GeneratedSpace:
    """A p-normed space given by generators spanning R^dim."""

    def __init__(self, p, dim: int, generators):
        self.p = Exponent.of(p)
        self.dim = int(dim)
        if self.dim < 0:
            raise ValueError("dim must be >= 0")
        gens = np.asarray(generators, dtype=float)
        if gens.size == 0:
            gens = np.zeros((0, self.dim))
        if gens.ndim != 2 or gens.shape[1] != self.dim:
            raise DimensionMismatchError(
                f"generators must have shape (k, {self.dim}), got {gens.shape}"
            )
        gens = _dedupe_rows(gens)
        if np.any(~np.isfinite(gens)):
            raise ValueError("generators must be finite")
        if gens.shape[0] and not np.abs(gens).max(axis=1).all():
            raise SpanError("zero vectors cannot be generators")
        if self.dim > 0:
            if gens.shape[0] < self.dim or np.linalg.matrix_rank(gens) < self.dim:
                raise SpanError(
                    f"generators do not span R^{self.dim}"
                )
        gens.setflags(write=False)
        self.generators = gens
        self._levels: list[_SubsetLevel] | None = None
        self._reference_basis: tuple | None = None

    # -- presentation ------------------------------------------------------

    @property
    def gen_count(self) -> int:
        return self.generators.shape[0]

    @classmethod
    def lp(cls, p, dim: int) -> "GeneratedSpace":
        """The sequence space l_p^dim (unit-vector generators)."""
        return cls(p, dim, np.eye(dim))

    def __repr__(self) -> str:
        return (f"GeneratedSpace(p={self.p}, dim={self.dim}, "
                f"gens={self.gen_count})")

    def generator_key(self) -> tuple:
        """A hashable, order-insensitive key for the generator set."""
        return (str(self.p), self.dim,
                tuple(sorted(map(tuple, np.round(self.generators, 12)))))

    # -- subset solver cache ----------------------------------------------

    def _solver_levels(self) -> list[_SubsetLevel]:
        if self._levels is not None:
            return self._levels
        if self.gen_count > EVAL_GEN_CAP or self.dim > EVAL_DIM_CAP:
            raise SizeCapError(
                f"norm evaluation supports up to {EVAL_GEN_CAP} generators in "
                f"dimension up to {EVAL_DIM_CAP}; this space has "
                f"{self.gen_count} generators in dimension {self.dim}"
            )
        G = self.generators
        k, n = G.shape
        levels = []
        for j in range(1, n + 1):
            idx = np.array(list(itertools.combinations(range(k), j)), dtype=int)
            sub = G[idx]                       # (N, j, n) rows are generators
            cols = sub.transpose(0, 2, 1)      # (N, n, j)
            sv = np.linalg.svd(sub, compute_uv=False)
            smin = sv[:, -1]
            smax = sv[:, 0]
            usable = (smin > 0) & (
                smax <= CONDITION_CAP * np.maximum(smin, np.finfo(float).tiny)
            )
            solvers = np.zeros((idx.shape[0], j, n))
            if usable.any():
                solvers[usable] = np.linalg.pinv(cols[usable])
            levels.append(_SubsetLevel(idx, cols, solvers, usable, j == n))
        self._levels = levels
        return levels

    def reference_basis(self) -> np.ndarray:
        """Indices of the first well-conditioned full-size generator subset."""
        if self._reference_basis is None:
            top = self._solver_levels()[-1]
            if not top.square:
                raise SpanError("space has no full-dimensional subset level")
            usable = np.flatnonzero(top.usable)
            if usable.size == 0:
                raise ConditioningError(
                    "every full-size generator subset is ill-conditioned"
                )
            self._reference_basis = tuple(top.indices[usable[0]])
        return np.array(self._reference_basis, dtype=int)

    # -- norm --------------------------------------------------------------

    def norm(self, x) -> NormValue:
        return eval_norm(self, x)

    def norm_value(self, x) -> float:
        return eval_norm(self, x).value


def _dedupe_rows(rows: np.ndarray) -> np.ndarray:
    """Drop exact duplicate rows, keeping first occurrences in order."""
    seen: set[bytes] = set()
    keep = []
    for i in range(rows.shape[0]):
        key = rows[i].tobytes()
        if key not in seen:
            seen.add(key)
            keep.append(i)
    return np.ascontiguousarray(rows[keep]) if len(keep) < rows.shape[0] else \
        np.ascontiguousarray(rows)


def _effective_support(indices: np.ndarray, coeffs: np.ndarray) -> tuple[int, ...]:
    scale = max(1.0, float(np.abs(coeffs).max()) if coeffs.size else 0.0)
    mask = np.abs(coeffs) > SUPPORT_TOL * scale
    return tuple(sorted(int(i) for i in indices[mask]))


def eval_norm(space: GeneratedSpace, x) -> NormValue:
    """Exact norm with an attaining representation.

    Enumerates linearly independent generator subsets (size <= dim), solves
    each for coefficients, and takes the cheapest feasible representation.
    Ties within a relative 1e-12 window resolve to the lexicographically
    smallest effective support.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != space.dim:
        raise DimensionMismatchError(
            f"vector has length {x.shape[0]}, space has dimension {space.dim}"
        )
    k = space.gen_count
    if space.dim == 0 or not np.any(x):
        return NormValue(0.0, 0.0, np.zeros(k), ())

    p = space.p.value
    levels = space._solver_levels()
    if not levels[-1].usable.any():
        raise ConditioningError(
            "every full-size generator subset is ill-conditioned; "
            "cannot certify a norm"
        )
    # Solve at unit Euclidean scale so feasibility is scale-invariant,
    # then rescale the result by homogeneity.
    scale = float(np.linalg.norm(x))
    xu = x / scale

    # pass 1: best cost over all feasible subset solves
    solved = []
    best_power = math.inf
    for level in levels:
        if not level.usable.any():
            solved.append(None)
            continue
        coeffs = level.solvers @ xu                     # (N, j)
        if level.square:
            feasible = level.usable.copy()
        else:
            recon = np.einsum("snj,sj->sn", level.columns, coeffs)
            residual = np.linalg.norm(recon - xu[None, :], axis=1)
            feasible = level.usable & (residual <= FEASIBILITY_TOL)
        if not feasible.any():
            solved.append(None)
            continue
        powers = np.where(feasible,
                          np.sum(np.abs(coeffs) ** p, axis=1),
                          math.inf)
        solved.append((coeffs, powers))
        level_best = float(powers.min())
        if level_best < best_power:
            best_power = level_best

    # pass 2: among ties, pick the lexicographically smallest support
    window = best_power + TIE_TOL * max(1.0, best_power)
    chosen = None  # (support, index count, level, row)
    for level, data in zip(levels, solved):
        if data is None:
            continue
        coeffs, powers = data
        for row in np.flatnonzero(powers <= window):
            support = _effective_support(level.indices[row], coeffs[row])
            key = (support,)
            if chosen is None or key < chosen[0]:
                chosen = (key, level, int(row))
    key, level, row = chosen
    coeffs_full = np.zeros(k)
    coeffs_row = scale * (level.solvers[row] @ xu)
    coeffs_full[level.indices[row]] = coeffs_row
    power = float(np.sum(np.abs(coeffs_row) ** p))
    return NormValue(p_root(power, p), power, coeffs_full, key[0])


# ---------------------------------------------------------------------------
# independent oracle
# ---------------------------------------------------------------------------

def norm_oracle(space: GeneratedSpace, x, resolution: float = 1e-3,
                seed: int = 0) -> float:
    """Independent upper-bound estimate of the norm by direct minimization.

    Fixes a reference basis B, parameterizes every representation by the free
    coefficients c_F (the basis part is then determined linearly), and
    minimizes sum |c|^p by zoomed grid search plus exact one-dimensional
    descent.  Each coordinate section of the objective is concave between its
    kinks, so the section minimum lies at a kink; the descent enumerates them.
    Always returns a value >= the true norm, converging as the grids refine.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != space.dim:
        raise DimensionMismatchError(
            f"vector has length {x.shape[0]}, space has dimension {space.dim}"
        )
    if space.dim == 0 or not np.any(x):
        return 0.0
    p = space.p.value
    basis = space.reference_basis()
    free = np.array([i for i in range(space.gen_count) if i not in set(basis.tolist())],
                    dtype=int)
    GB = space.generators[basis].T              # (n, n)
    solve_B = np.linalg.inv(GB)
    c0 = solve_B @ x                            # basis coefficients at c_F = 0
    if free.size == 0:
        return p_root(power_sum(c0, p), p)
    M = solve_B @ space.generators[free].T      # (n, kf): c_B = c0 - M @ c_F

    def cost(cf: np.ndarray) -> np.ndarray:
        cf2 = np.atleast_2d(cf)
        cb = c0[None, :] - cf2 @ M.T
        return np.sum(np.abs(cf2) ** p, axis=1) + np.sum(np.abs(cb) ** p, axis=1)

    kf_dirs = [np.eye(free.size)[i] for i in range(free.size)]
    for i in range(free.size):
        # diagonal moves cross the valleys that axis steps zigzag along
        for j in range(i + 1, free.size):
            for sign in (1.0, -1.0):
                d = np.zeros(free.size)
                d[i], d[j] = 1.0, sign
                kf_dirs.append(d)
    if free.size >= 2:
        # for p < 1 the optimum is a cusp where coefficients vanish exactly;
        # moving inside an attained zero set {c_B[j] = 0} (null space of the
        # j-th row of M) sweeps that set's kink points without leaving it
        for j in range(M.shape[0]):
            row = M[j]
            norm = np.linalg.norm(row)
            if norm < 1e-12:
                continue
            if free.size == 2:
                kf_dirs.append(np.array([-row[1], row[0]]) / norm)
            else:
                _, _, vt = np.linalg.svd(row[None, :])
                kf_dirs.extend(vt[1:3])
    kf_dirs = np.array(kf_dirs)

    def descend(cf: np.ndarray) -> tuple[float, np.ndarray]:
        # every line section is piecewise concave, so its minimum sits at a
        # kink: a zero of one coefficient along the line.  Enumerating the
        # kinks makes each directional move an exact line minimization.
        cf = cf.astype(float).copy()
        value = float(cost(cf)[0])
        for _ in range(60):
            improved = False
            for d in kf_dirs:
                cb = c0 - M @ cf
                md = M @ d
                steps = [0.0]
                nz = np.abs(md) > 1e-14
                steps.extend((cb[nz] / md[nz]).tolist())
                dz = np.abs(d) > 1e-14
                steps.extend((-cf[dz] / d[dz]).tolist())
                trials = cf[None, :] + np.asarray(steps)[:, None] * d[None, :]
                values = cost(trials)
                j = int(np.argmin(values))
                if values[j] < value - 1e-15:
                    value = float(values[j])
                    cf = trials[j]
                    improved = True
            if not improved:
                break
        return value, cf

    kf = free.size
    best_power = power_sum(c0, p)
    best_point = np.zeros(kf)
    rng = np.random.default_rng(seed)

    def mesh_box(center: np.ndarray, span: float) -> np.ndarray:
        if kf <= 3:
            axes = [np.linspace(center[i] - span, center[i] + span, 13)
                    for i in range(kf)]
            return np.stack([g.ravel() for g in np.meshgrid(*axes)],
                            axis=1)
        return center[None, :] + rng.uniform(-span, span, size=(4096, kf))

    # Phase 1: self-tightening coefficient cap.  Any representation beating
    # the current best has every coefficient magnitude at most
    # best_power^(1/p), so each improvement shrinks the search box around
    # the origin until the mesh resolves the optimal basin.  The objective
    # is piecewise concave with many kink-local minima, so the descent runs
    # from a wide spread of mesh starts, not just the best point.
    n_starts = 40 if kf <= 3 else 16
    cap = best_power ** (1.0 / p)
    for _ in range(6):
        mesh = mesh_box(np.zeros(kf), max(cap, resolution))
        order = np.argsort(cost(mesh))
        for i in order[:n_starts]:
            value, point = descend(mesh[i])
            if value < best_power:
                best_power, best_point = value, point
        new_cap = best_power ** (1.0 / p)
        if new_cap >= 0.5 * cap:
            cap = min(cap, new_cap)
            break
        cap = new_cap

    # Phase 2: zoomed grid refinement around the best point found.
    center = best_point
    span = max(cap, resolution)
    for _ in range(14):
        mesh = mesh_box(center, span)
        values = cost(mesh)
        top = int(np.argmin(values))
        if values[top] < best_power:
            best_power = float(values[top])
            best_point = mesh[top]
        center = mesh[top]
        if span < resolution / 8:
            break
        span /= 4.0
    for start in (center, best_point):
        value, _ = descend(start)
        if value < best_power:
            best_power = value
    return p_root(best_power, p)


# ---------------------------------------------------------------------------
# two-functional norm family
# ---------------------------------------------------------------------------

def _unit_positive(vec, name: str) -> np.ndarray:
    v = np.asarray(vec, dtype=float).reshape(-1)
    if v.shape[0] != 2:
        raise DimensionMismatchError(f"{name} must lie in R^2")
    if abs(float(np.linalg.norm(v)) - 1.0) > 1e-12:
        raise ValueError(f"{name} must be a unit vector")
    if np.any(v < -1e-12):
        raise ValueError(f"{name} must lie on the positive quarter-sphere")
    return v


@dataclass(frozen=True)
class HaydonFamily:
    """The norm on R^2 x R attached to a unit functional phi >= 0."""

    p: Exponent
    phi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", Exponent.of(self.p))
        phi = _unit_positive(self.phi, "phi")
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)


def haydon_norm_power(family: HaydonFamily, x, lam: float) -> float:
    """|(x, lam)|^p = max(|x|_2^p, |lam|^p + |<x, phi>|^p)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != 2:
        raise DimensionMismatchError("x must lie in R^2")
    p = family.p.value
    euclidean = float(np.linalg.norm(x))
    pairing = abs(float(x @ family.phi))
    return max(euclidean**p, abs(float(lam)) ** p + pairing**p)


def haydon_separation_threshold(family: HaydonFamily, psi) -> float:
    """Smallest mu at which the two-functional norms separate by a full unit."""
    psi = _unit_positive(psi, "psi")
    p = family.p.value
    inner = abs(float(family.phi @ psi))
    gap = 1.0 - inner**p
    if gap <= 0.0:
        return math.inf
    return (1.0 / gap) ** (1.0 / p)


def haydon_separation_check(family: HaydonFamily, psi, mu: float,
                            tol: float = 1e-9):
    """Certify that the phi- and psi-norms differ by >= 1 at (mu*phi, 1).

    With A = |(mu*phi, 1)|_phi^p and B = |(mu*phi, 1)|_psi^p, the gap A - B
    equals 1 exactly once mu^p * (1 - |<phi, psi>|^p) >= 1; below that
    threshold the test is inconclusive rather than failed.
    """
    from .certs import eq_row, ineq_row, make_certificate

    psi = _unit_positive(psi, "psi")
    if np.array_equal(psi, family.phi):
        raise ValueError("psi must differ from phi")
    mu = float(mu)
    if mu <= 0.0:
        raise ValueError("mu must be positive")
    p = family.p.value
    inner = abs(float(family.phi @ psi))
    a_power = 1.0 + mu**p
    b_power = max(mu**p, 1.0 + (mu**p) * inner**p)
    sufficiency = (mu**p) * (1.0 - inner**p)

    psi_family = HaydonFamily(family.p, psi)
    rows = [
        ineq_row("gap_at_least_one", 1.0, a_power - b_power, tol, gated=True),
        eq_row("a_power_identity",
               haydon_norm_power(family, mu * family.phi, 1.0), a_power, 1e-12),
        eq_row("b_power_identity",
               haydon_norm_power(psi_family, mu * family.phi, 1.0), b_power, 1e-12),
        eq_row("unit_identity",
               haydon_norm_power(family, np.zeros(2), 1.0), 1.0, 0.0),
    ]
    evidence = {
        "rows": rows,
        "a_power": a_power,
        "b_power": b_power,
        "gap": a_power - b_power,
        "inner_product": inner,
        "sufficiency": sufficiency,
        "inconclusive": bool(sufficiency < 1.0 - 1e-12),
    }
    parameters = {"p": str(family.p), "mu": mu, "tol": tol}
    return make_certificate("inequality_ledger", parameters, evidence)
