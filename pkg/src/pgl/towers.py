"""Finite-stage towers: chains of spaces with isometric links.

A tower is an append-only chain G_0 -> G_1 -> ... of generated spaces whose
links are certified isometric embeddings kept in canonical coordinates: every
link matrix is literally the identity-over-zeros stack, so a vector tagged at
one stage is the same array, zero-padded, at every later stage, and composite
links are exact.

On top of the plain tower sit the extension engines:

* ``tower_extend`` appends stages absorbing a batch of (embedding, map)
  requests through simultaneous push-out extensions;
* ``aud_extend`` realizes the almost-universal-disposition step: an isometry
  g: X -> Y with X located in the tower comes back as a certified
  almost-isometry f: Y -> G_m that undoes g on X;
* ``helpful_extend`` turns a certified almost-isometry X -> Y into a map
  Y -> G_m that almost-inverts it, through an amalgam;
* ``local_extend`` extends a nonexpansive map off a subspace with no norm
  inflation, through a push-out appended as a fresh stage;
* ``back_and_forth`` alternates helpful extensions between two towers and
  logs every step inequality in a replayable ledger;
* operator towers pair each stage with a nonexpansive map into a fixed
  target and extend both at once (``optower_extend``, ``optower_lift``,
  ``kernel_extend``).

Stages stay within the norm-evaluation caps; a request that would overflow
them either splits across stages or raises.  Subspaces grown during matching
are represented by ambient coordinates in their stage plus a fresh generating
set scaled to the ambient norm; the generated norm of that fresh set dominates
the ambient norm but need not equal it, because a subspace of a finitely
generated space need not be finitely generated itself.  Ledger rows are
therefore evaluated in ambient stage norms (one-dimensional representations
are exactly faithful).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .catalog import CatalogParams, DensityWitness, operator_net, \
    rational_approximation
from .certs import Certificate, eq_row, ineq_row, make_certificate
from .constructions import (
    COMMUTE_TOL,
    amalgam,
    multi_extension,
    operator_amalgam,
    pushout,
    pushout_factorize,
)
from .core import EVAL_DIM_CAP, EVAL_GEN_CAP, GeneratedSpace, eval_norm
from .errors import CertificationError, SizeCapError, TowerError
from .maps import (
    LinearMap,
    certify_isometry,
    certify_nonexpansive,
    coordinate_inclusion,
    identity_map,
    invert,
    map_distance,
    op_norm,
    zero_map,
)

TOWER_DIM_CAP = EVAL_DIM_CAP
TOWER_GEN_CAP = EVAL_GEN_CAP
LINK_TOL = 1e-6

# Witness search parameters for extension steps: the spaces involved are
# already capped, so only the snapping ladder needs generous room.
DEFAULT_WITNESS_PARAMS = CatalogParams(
    max_dim=EVAL_DIM_CAP,
    max_generators=EVAL_GEN_CAP,
    denominator_bound=2 ** 20,
    coefficient_bound=10 ** 12,
)


class NetParams(NamedTuple):
    """Parameters for the operator nets used by tower_extend."""

    eps: float
    step: float


@dataclass(frozen=True)
class StageLocation:
    """A space X located inside a tower stage via an embedding X -> G_n."""

    stage: int
    embedding: LinearMap


@dataclass(frozen=True)
class Tower:
    stages: tuple
    links: tuple
    provenance: tuple

    def __post_init__(self):
        if len(self.links) != max(0, len(self.stages) - 1):
            raise TowerError("towers need one link per consecutive pair")
        if len(self.provenance) != len(self.stages):
            raise TowerError("towers need one provenance record per stage")

    @property
    def top_index(self) -> int:
        return len(self.stages) - 1

    @property
    def top(self) -> GeneratedSpace:
        return self.stages[-1]

    def composite(self, n: int, m: int) -> LinearMap:
        """The exact composite link G_n -> G_m (canonical coordinates)."""
        if not 0 <= n <= m <= self.top_index:
            raise TowerError(f"no composite link {n} -> {m}")
        return LinearMap(self.stages[n], self.stages[m],
                         np.eye(self.stages[m].dim, self.stages[n].dim))

    def lift(self, loc: StageLocation, m: int) -> LinearMap:
        """The located embedding pushed forward into stage m."""
        return self.composite(loc.stage, m) @ loc.embedding

    def with_stage(self, space: GeneratedSpace, link: LinearMap,
                   record: dict,
                   derived_conorm_lo: float | None = None) -> "Tower":
        if link.domain.dim != self.top.dim or \
                link.codomain.generator_key() != space.generator_key():
            raise TowerError("link must run from the top stage to the new one")
        if space.dim > TOWER_DIM_CAP or space.gen_count > TOWER_GEN_CAP:
            raise SizeCapError(
                f"stage caps exceeded: dim {space.dim} > {TOWER_DIM_CAP} or "
                f"generators {space.gen_count} > {TOWER_GEN_CAP}"
            )
        cert = certify_isometry(link, 0.0, tol=LINK_TOL,
                                known_conorm_lo=derived_conorm_lo)
        if cert.verdict == "fail":
            raise TowerError(
                f"new link failed isometry certification: {cert.evidence}"
            )
        rec = dict(record)
        rec["link_certificate"] = cert.to_dict()
        return Tower(
            stages=self.stages + (space,),
            links=self.links + (link,),
            provenance=self.provenance + (rec,),
        )


def tower_build(seed: GeneratedSpace, note: str = "seed") -> Tower:
    return Tower(stages=(seed,), links=(),
                 provenance=({"action": note},))


def locate_stage(tower: Tower, index: int) -> StageLocation:
    """Locate a whole stage inside itself (identity embedding)."""
    return StageLocation(index, identity_map(tower.stages[index]))


# ---------------------------------------------------------------------------
# canonical coordinates
# ---------------------------------------------------------------------------

def _straightening(M: np.ndarray) -> np.ndarray:
    """An invertible W with W @ M = [I; 0], for full-column-rank M."""
    n, m = M.shape
    if np.array_equal(M, np.eye(n, m)):
        return np.eye(n)
    if n == m:
        return np.linalg.inv(M)
    full_u, _, _ = np.linalg.svd(M, full_matrices=True)
    return np.linalg.inv(np.hstack([M, full_u[:, m:]]))


def _canonicalize(space: GeneratedSpace, iota: LinearMap,
                  extras: list[LinearMap]):
    """Re-coordinate a new stage so iota becomes the literal eye-stack.

    Returns (new_space, link, transformed extras, transform) where
    transform: space -> new_space is an exact relabeling isometry.
    """
    W = _straightening(iota.matrix)
    try:
        new_space = GeneratedSpace(space.p, space.dim,
                                   space.generators @ W.T)
    except Exception as exc:
        raise TowerError(f"stage re-coordination failed: {exc}") from exc
    residual = np.abs(W @ iota.matrix
                      - np.eye(space.dim, iota.domain.dim)).max(initial=0.0)
    if residual > 1e-8:
        raise TowerError(
            f"stage re-coordination residual {residual:.3e} too large"
        )
    link = LinearMap(iota.domain, new_space,
                     np.eye(space.dim, iota.domain.dim))
    transform = LinearMap(space, new_space, W)
    moved = [LinearMap(e.domain, new_space, W @ e.matrix) for e in extras]
    return new_space, link, moved, transform


# ---------------------------------------------------------------------------
# plain tower extension
# ---------------------------------------------------------------------------

@dataclass
class ExtensionStep:
    tower: Tower
    t_primes: list[LinearMap]
    pushout: object
    transform: LinearMap
    certificate: Certificate
    derived_conorm_iota: float
    derived_conorm_t: float


def extend_with_pairs(tower: Tower, pairs: list, record: dict | None = None,
                      conorm_tol: float = 1e-6,
                      conorm_budget: int = 20_000) -> ExtensionStep:
    """Append one stage that extends every (u, t) request at once.

    Each pair is (u: D -> C certified embedding, t: D -> G_top); the maps t
    are normalized to nonexpansive form before the simultaneous extension so
    the new link is isometric, and the extensions are rescaled afterwards.
    Requests that would overflow the stage caps split across stages.
    """
    if not pairs:
        raise TowerError("extend_with_pairs needs at least one pair")
    top = tower.top
    top_key = top.generator_key()
    added_dim = 0
    added_gens = 0
    for u_g, t_g in pairs:
        if t_g.codomain.generator_key() != top_key:
            raise TowerError("every t must land in the tower's top stage")
        added_dim += u_g.codomain.dim - u_g.domain.dim
        added_gens += u_g.codomain.gen_count
    if top.dim + added_dim > TOWER_DIM_CAP or \
            top.gen_count + added_gens > TOWER_GEN_CAP:
        if len(pairs) == 1:
            raise SizeCapError(
                "a single extension request exceeds the stage caps"
            )
        half = len(pairs) // 2
        first = extend_with_pairs(tower, pairs[:half], record,
                                  conorm_tol, conorm_budget)
        lifted = [(u_g, first.tower.links[-1] @ t_g)
                  for u_g, t_g in pairs[half:]]
        second = extend_with_pairs(first.tower, lifted, record,
                                   conorm_tol, conorm_budget)
        link = second.tower.links[-1]
        carried = [link @ tp for tp in first.t_primes]
        return ExtensionStep(
            tower=second.tower,
            t_primes=carried + second.t_primes,
            pushout=second.pushout,
            transform=second.transform,
            certificate=second.certificate,
            derived_conorm_iota=first.derived_conorm_iota
            * second.derived_conorm_iota,
            derived_conorm_t=min(
                first.derived_conorm_t * second.derived_conorm_iota,
                second.derived_conorm_t,
            ),
        )

    scales = [max(1.0, op_norm(t_g)) for _, t_g in pairs]
    normalized = [
        (u_g, t_g if s == 1.0 else t_g.scale(1.0 / s))
        for (u_g, t_g), s in zip(pairs, scales)
    ]
    me = multi_extension(normalized, conorm_tol=conorm_tol,
                         conorm_budget=conorm_budget)
    new_space, link, moved, transform = _canonicalize(
        me.space, me.iota, me.t_primes)
    t_primes = []
    for (u_g, t_g), raw, s in zip(pairs, moved, scales):
        t_prime = raw if s == 1.0 else raw.scale(s)
        eye = np.eye(u_g.codomain.dim, u_g.domain.dim)
        if u_g.matrix.shape == eye.shape and np.array_equal(u_g.matrix, eye):
            m = np.array(t_prime.matrix)
            m[:, :u_g.domain.dim] = link.matrix @ t_g.matrix
            t_prime = LinearMap(t_prime.domain, new_space, m)
        t_primes.append(t_prime)

    rec = dict(record or {})
    rec.setdefault("action", "extend")
    rec["pairs"] = len(pairs)
    rec["scales"] = [float(s) for s in scales]
    new_tower = tower.with_stage(
        new_space, link, rec, derived_conorm_lo=me.derived_conorm_iota)
    return ExtensionStep(
        tower=new_tower, t_primes=t_primes, pushout=me.pushout,
        transform=transform, certificate=me.certificate,
        derived_conorm_iota=me.derived_conorm_iota,
        derived_conorm_t=me.derived_conorm_t_prime,
    )


def tower_extend(tower: Tower, fam: list, nets: NetParams,
                 record: dict | None = None) -> Tower:
    """Append stages absorbing every (family embedding, net map) pair.

    For each certified embedding u in fam, the maps t range over the
    operator net from u's domain into the current top stage; an empty net
    contributes the zero map so the embedding's codomain still enters the
    tower.
    """
    if not fam:
        raise TowerError("tower_extend needs a nonempty family")
    pairs = []
    top = tower.top
    for u_g in fam:
        net = operator_net(u_g.domain, top, nets.eps, nets.step)
        members = list(net) or [zero_map(u_g.domain, top)]
        for t_g in members:
            pairs.append((u_g, t_g))
    rec = dict(record or {})
    rec.setdefault("action", "tower_extend")
    rec["family"] = len(fam)
    rec["net"] = {"eps": nets.eps, "step": nets.step}
    return extend_with_pairs(tower, pairs, rec).tower


# ---------------------------------------------------------------------------
# almost universal disposition step
# ---------------------------------------------------------------------------

@dataclass
class AudResult:
    tower: Tower
    map: LinearMap
    certificate: Certificate
    isometry_certificate: Certificate
    witness: DensityWitness
    delta: float
    stage: int


def aud_extend(tower: Tower, g: LinearMap, X_loc: StageLocation, eps: float,
               params: CatalogParams | None = None,
               tol: float = 1e-6) -> AudResult:
    """Extend the inverse of an embedding back into the tower.

    Given g: X -> Y certified isometric with X located in a stage, returns
    f: Y -> G_m certified as an eps-isometry with f(g(x)) landing back on x
    within eps |x| on X's generators.  The internal witness quality is
    delta = sqrt(1 + eps) - 1.
    """
    eps = float(eps)
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    delta = math.sqrt(1.0 + eps) - 1.0
    params = params or DEFAULT_WITNESS_PARAMS

    X = g.domain
    if X_loc.embedding.domain.generator_key() != X.generator_key():
        raise TowerError("X_loc must embed the domain of g")

    witness = rational_approximation(g, delta, params)
    w = tower.lift(X_loc, tower.top_index)          # X -> G_top
    t_map = w @ invert(witness.u)                    # D -> G_top

    # The extension pair's embedding must be exactly isometric or the new
    # link breaks the tower.  The witness map f: D -> C is only
    # delta-isometric when the rational snap is inexact; the amalgam
    # D (+)_f^delta C restores exactness: both factors embed isometrically
    # and j o f stays within delta of i, which is precisely the slack the
    # defect budget eps = 2 delta + delta^2 absorbs.
    f_ev = witness.certificates["f"].evidence
    exact_f = (f_ev["op_norm"] <= 1.0 + tol
               and f_ev["conorm_lo"] >= 1.0 - tol)
    if exact_f:
        embed, post = witness.f, witness.v           # post: Y -> C
    else:
        am = amalgam(witness.f, delta)
        embed, post = am.i, am.j @ witness.v         # post: Y -> E
    step = extend_with_pairs(
        tower, [(embed, t_map)],
        {"action": "aud_extend", "eps": eps, "delta": delta},
    )
    t_prime = step.t_primes[0]                       # C (or E) -> G_new
    f = t_prime @ post                               # Y -> G_new
    new_tower = step.tower
    new_index = new_tower.top_index
    emb_new = new_tower.lift(X_loc, new_index)

    # f = t' . v factors through maps with certified lower bounds: the
    # extension supplies a derived co-norm for t' and the witness map v is
    # a (1 - delta)-embedding, so the product bounds co-norm(f) from below
    # independently of any direct search over the new top space.
    derived_lo = step.derived_conorm_t * (1.0 - delta - tol)
    iso = certify_isometry(f, eps, tol=tol, known_conorm_lo=derived_lo)
    if iso.verdict == "fail":
        raise CertificationError(
            f"aud_extend produced a map failing its eps-isometry "
            f"certificate: {iso.evidence}"
        )
    inconclusive = iso.verdict == "inconclusive"
    ev = iso.evidence
    rows = [
        ineq_row("op_bound", ev["op_norm"], 1.0 + eps, tol),
        ineq_row("conorm_bound", 1.0 - eps, ev["conorm_lo"], tol,
                 gated=True),
    ]
    top_space = new_tower.top
    for idx, gen in enumerate(X.generators):
        image = f(g(gen))
        anchor = emb_new(gen)
        lhs = eval_norm(top_space, image - anchor).value
        rhs = eps * eval_norm(top_space, anchor).value
        rows.append(ineq_row(f"defect_generator_{idx}", lhs, rhs, tol))
    cert = make_certificate(
        "inequality_ledger",
        {"eps": eps, "delta": delta, "tol": tol,
         "stage": new_index},
        {"rows": rows, "inconclusive": inconclusive,
         "isometry": iso.to_dict(),
         "witness_denominator": witness.denominator},
    )
    if cert.verdict == "fail":
        raise CertificationError("aud_extend defect rows failed")
    return AudResult(
        tower=new_tower, map=f, certificate=cert,
        isometry_certificate=iso, witness=witness, delta=delta,
        stage=new_index,
    )


# ---------------------------------------------------------------------------
# almost-isometry inversion
# ---------------------------------------------------------------------------

@dataclass
class HelpfulResult:
    tower: Tower
    map: LinearMap
    certificate: Certificate
    eta: float
    delta: float
    aud: AudResult


def admissible_delta(target: float, eta: float, p: float,
                     start: float | None = None) -> float:
    """The largest tried delta with delta^p + (1+delta)^p eta^p < target^p."""
    if not 0.0 <= eta < target:
        raise TowerError(
            f"need realized eta < target, got eta={eta}, target={target}"
        )
    delta = start if start is not None else target / 2.0
    goal = target ** p
    while delta ** p + (1.0 + delta) ** p * eta ** p >= goal * (1 - 1e-12):
        delta /= 2.0
        if delta < 1e-9:
            raise TowerError(
                "no admissible delta: eta is too close to the target"
            )
    return delta


def helpful_extend(tower: Tower, f: LinearMap, target: float,
                   X_loc: StageLocation, delta: float | None = None,
                   params: CatalogParams | None = None,
                   tol: float = 1e-6) -> HelpfulResult:
    """Almost-invert a certified almost-isometry f: X -> Y inside the tower.

    ``target`` is the defect budget: f must certify strictly below it, and
    the result g satisfies |g(f(x)) - x| <= target |x| on generators.
    Builds the amalgam X (+)_f^eta Y at f's realized defect eta, extends
    its X-inclusion through the tower at a working delta with
    delta^p + (1+delta)^p eta^p < target^p, and returns g = h o j.
    """
    target = float(target)
    strict = certify_isometry(f, target, tol=tol, strict=True)
    if strict.verdict != "pass":
        raise CertificationError(
            f"helpful_extend needs a strict almost-isometry within its "
            f"target ({strict.verdict})"
        )
    p = f.p.value
    # floor eta so the amalgam's tilted generators stay well conditioned
    eta = max(strict.evidence["realized_eta"], target * 1e-2)
    delta = admissible_delta(target, eta, p, start=delta)

    am = amalgam(f, eta)
    aud = aud_extend(tower, am.i, X_loc, delta, params=params, tol=tol)
    g_map = aud.map @ am.j
    new_tower = aud.tower
    emb = new_tower.lift(X_loc, new_tower.top_index)
    top_space = new_tower.top

    rows = [
        ineq_row("admissible_delta",
                 delta ** p + (1.0 + delta) ** p * eta ** p,
                 target ** p, 0.0),
        ineq_row("op_bound", op_norm(g_map), 1.0 + delta, tol),
    ]
    X = f.domain
    for idx, gen in enumerate(X.generators):
        image = g_map(f(gen))
        anchor = emb(gen)
        lhs = eval_norm(top_space, image - anchor).value
        rhs = target * eval_norm(top_space, anchor).value
        rows.append(ineq_row(f"inversion_defect_{idx}", lhs, rhs, 0.0))
    cert = make_certificate(
        "inequality_ledger",
        {"target": target, "eta": eta, "delta": delta, "tol": tol},
        {"rows": rows, "inconclusive": False,
         "aud": aud.certificate.to_dict()},
    )
    if cert.verdict == "fail":
        raise CertificationError("helpful_extend defect rows failed")
    return HelpfulResult(tower=new_tower, map=g_map, certificate=cert,
                         eta=eta, delta=delta, aud=aud)


# ---------------------------------------------------------------------------
# local 1+ injectivity
# ---------------------------------------------------------------------------

@dataclass
class LocalResult:
    tower: Tower
    map: LinearMap
    certificate: Certificate
    stage: int


def local_extend(tower: Tower, small: LinearMap, inclusion: LinearMap,
                 eps: float = 0.1, tol: float = 1e-6) -> LocalResult:
    """Extend small: Y -> G_top across inclusion: Y -> X with no inflation.

    Appends the push-out of (inclusion, small / |small|) as a new stage;
    the push-out leg from X, rescaled, restricts along the inclusion to
    small exactly and has norm at most |small| (so in particular at most
    (1+eps)|small|).
    """
    if small.codomain.generator_key() != tower.top.generator_key():
        raise TowerError("small must land in the tower's top stage")
    if inclusion.domain.generator_key() != small.domain.generator_key():
        raise TowerError("inclusion and small must share their domain")
    incl_cert = certify_isometry(inclusion, 0.0, tol=tol)
    if incl_cert.verdict != "pass":
        raise CertificationError(
            f"inclusion must certify isometric ({incl_cert.verdict})"
        )
    norm_small = op_norm(small)
    if norm_small > 1.0 + 1e-9:
        raise CertificationError("local_extend needs |small| <= 1")

    if norm_small == 0.0:
        T = zero_map(inclusion.codomain, tower.top)
        rows = [
            ineq_row("restriction_exact", 0.0, 0.0, 1e-9),
            ineq_row("norm_bound", 0.0, 0.0, tol),
        ]
        cert = make_certificate(
            "inequality_ledger",
            {"eps": eps, "tol": tol, "stage": tower.top_index},
            {"rows": rows, "op_T": 0.0, "op_small": 0.0},
        )
        return LocalResult(tower=tower, map=T, certificate=cert,
                           stage=tower.top_index)

    unit = small if norm_small == 1.0 else small.scale(1.0 / norm_small)
    po = pushout(inclusion, unit)
    new_space, link, moved, transform = _canonicalize(
        po.space, po.leg_z, [po.leg_y])
    leg_x = moved[0]                                  # X -> new stage
    T = leg_x if norm_small == 1.0 else leg_x.scale(norm_small)
    # exactness repair: when the inclusion is the literal coordinate
    # pattern, overwrite so T o inclusion == link o small bit for bit
    eye = np.eye(inclusion.codomain.dim, inclusion.domain.dim)
    anchored = link @ small
    if inclusion.matrix.shape == eye.shape and \
            np.array_equal(inclusion.matrix, eye):
        m = np.array(T.matrix)
        m[:, :inclusion.domain.dim] = anchored.matrix
        T = LinearMap(T.domain, T.codomain, m)

    new_tower = tower.with_stage(
        new_space, link,
        {"action": "local_extend", "eps": eps},
        derived_conorm_lo=po.derived_conorm_leg_z,
    )
    restriction = map_distance(T @ inclusion, anchored)
    o_T = op_norm(T)
    rows = [
        ineq_row("restriction_exact", restriction, 0.0, 1e-9),
        ineq_row("norm_bound", o_T,
                 (1.0 + eps) * norm_small, tol),
    ]
    cert = make_certificate(
        "inequality_ledger",
        {"eps": eps, "tol": tol, "stage": new_tower.top_index},
        {"rows": rows, "op_T": o_T, "op_small": norm_small,
         "restriction_defect": restriction},
    )
    if cert.verdict == "fail":
        raise CertificationError("local_extend contract rows failed")
    return LocalResult(tower=new_tower, map=T, certificate=cert,
                       stage=new_tower.top_index)


# ---------------------------------------------------------------------------
# subspace bookkeeping for the matcher
# ---------------------------------------------------------------------------

@dataclass
class _SubRep:
    """A subspace of a stage: fresh generated space + ambient basis."""

    space: GeneratedSpace
    loc: StageLocation

    @property
    def stage(self) -> int:
        return self.loc.stage

    @property
    def basis(self) -> np.ndarray:
        return self.loc.embedding.matrix


def _span_subrep(tower: Tower, stage: int, vectors: list) -> _SubRep:
    """Build a subspace representation from ambient vectors.

    The basis greedily absorbs independent vectors; the fresh generating
    set is every directionally new vector scaled to ambient norm one, in
    span coordinates.  Generators of the representation then carry exactly
    their ambient norm; other vectors may be over-normed.
    """
    ambient = tower.stages[stage]
    pool = [np.asarray(v, dtype=float) for v in vectors]
    basis_cols = []
    for v in pool:
        if np.abs(v).max(initial=0.0) <= 1e-12:
            continue
        trial = basis_cols + [v]
        if np.linalg.matrix_rank(np.column_stack(trial)) == len(trial):
            basis_cols.append(v)
    if not basis_cols:
        raise TowerError("subspace span is trivial")
    B = np.column_stack(basis_cols)
    gens = []
    kept_dirs = []
    for v in pool:
        norm = eval_norm(ambient, v).value
        if norm <= 1e-12:
            continue
        unit = v / np.linalg.norm(v)
        if any(abs(abs(unit @ d) - 1.0) <= 1e-9 for d in kept_dirs):
            continue
        kept_dirs.append(unit)
        coeff, _, _, _ = np.linalg.lstsq(B, v / norm, rcond=None)
        recon = B @ coeff
        if np.abs(recon - v / norm).max(initial=0.0) > 1e-9:
            raise TowerError("span vector escaped its own basis")
        gens.append(coeff)
    space = GeneratedSpace(ambient.p, B.shape[1], np.array(gens))
    emb = LinearMap(space, ambient, B)
    return _SubRep(space=space, loc=StageLocation(stage, emb))


def _into_subrep(rep: _SubRep, ambient_map: LinearMap) -> LinearMap:
    """Re-express an ambient-valued map as landing in the subspace rep."""
    B = rep.basis
    coeffs, _, _, _ = np.linalg.lstsq(B, ambient_map.matrix, rcond=None)
    recon = B @ coeffs
    if np.abs(recon - ambient_map.matrix).max(initial=0.0) > 1e-9:
        raise TowerError("map image escaped the target subspace")
    return LinearMap(ambient_map.domain, rep.space, coeffs)


def _find_stage(tower: Tower, space: GeneratedSpace) -> int:
    key = space.generator_key()
    for idx in range(tower.top_index, -1, -1):
        if tower.stages[idx].generator_key() == key:
            return idx
    raise TowerError("space is not a stage of this tower")


def _ambient_approx(space: GeneratedSpace, B: np.ndarray,
                    v: np.ndarray) -> tuple[np.ndarray, float]:
    """Coefficients c roughly minimizing the space norm of v - B c.

    Starts from the least-squares solution and refines by cyclic ternary
    search (the objective is convex in each coordinate).  Returns (c, err)
    with err an upper bound on the best approximation error.
    """
    c, _, _, _ = np.linalg.lstsq(B, v, rcond=None)
    c = np.asarray(c, dtype=float)

    def objective(cc):
        return eval_norm(space, v - B @ cc).value

    best = objective(c)
    for _ in range(3):
        for j in range(B.shape[1]):
            radius = max(1.0, abs(c[j]))
            lo, hi = c[j] - radius, c[j] + radius
            for _ in range(40):
                m1 = lo + (hi - lo) / 3.0
                m2 = hi - (hi - lo) / 3.0
                c1, c2 = c.copy(), c.copy()
                c1[j], c2[j] = m1, m2
                if objective(c1) <= objective(c2):
                    hi = m2
                else:
                    lo = m1
            c[j] = (lo + hi) / 2.0
            best = min(best, objective(c))
    return c, best


# ---------------------------------------------------------------------------
# back and forth matching
# ---------------------------------------------------------------------------

@dataclass
class Ledger:
    """Replayable per-step records of the matcher's inequalities."""

    eta: float
    lam: float
    eps: float
    steps: list = field(default_factory=list)

    def add_step(self, n: int, eps_n: float, rows: list,
                 certificates: list):
        self.steps.append({
            "n": n,
            "eps_n": eps_n,
            "rows": rows,
            "certificates": certificates,
        })

    def all_rows(self) -> list:
        rows = []
        for step in self.steps:
            rows.extend(step["rows"])
        return rows

    def violations(self) -> list:
        from .certs import _row_violated
        return [row for row in self.all_rows() if _row_violated(row)]


@dataclass
class MatchResult:
    tower_u: Tower
    tower_v: Tower
    h: LinearMap
    g: LinearMap
    ledger: Ledger
    h_domain: _SubRep
    g_domain: _SubRep
    chain: LinearMap


def star_bound(eta: float, lam: float, p: float) -> float:
    """The geometric-series defect bound eta^p (1+3 lam^p) / (1-lam^p)."""
    return eta ** p * (1.0 + 3.0 * lam ** p) / (1.0 - lam ** p)


def _inversion_target(eps_k: float, eps_k1: float, p: float) -> float:
    """Defect budget for inverting an eps_k-almost-isometry at step k.

    The amalgam route realizes delta^p + (1+delta)^p eps_k^p with working
    delta near eps_{k+1}, so the budget is that sum.
    """
    return (eps_k1 ** p
            + (1.0 + eps_k1) ** p * eps_k ** p) ** (1.0 / p)


def _absorb_stub(tower: Tower, pool: list, stub: np.ndarray,
                 drift: float, name: str, rows: list) -> list:
    """Fold a dense-sequence vector into a span pool, by proxy if possible.

    If the stub is within the accumulated drift budget (in ambient norm,
    relative to its own norm) of the pool's span, it is recorded as
    absorbed through its best in-span approximation; otherwise it joins
    the pool as a genuinely new direction.
    """
    top = tower.top
    stub = np.pad(np.asarray(stub, dtype=float),
                  (0, top.dim - len(stub)))
    s_norm = eval_norm(top, stub).value
    if s_norm <= 1e-12:
        return pool
    basis_cols = []
    for v in pool:
        trial = basis_cols + [v]
        if np.linalg.matrix_rank(np.column_stack(trial)) == len(trial):
            basis_cols.append(v)
    if basis_cols:
        B = np.column_stack(basis_cols)
        _, err = _ambient_approx(top, B, stub)
        if err <= drift * s_norm + 1e-9:
            rows.append(ineq_row(name, err / s_norm, drift, 1e-9))
            return pool
    return pool + [stub]


def back_and_forth(tower_u: Tower, tower_v: Tower, f: LinearMap,
                   eps: float, lam: float, rounds: int,
                   X_loc: StageLocation,
                   dense_u: list | None = None,
                   dense_v: list | None = None,
                   params: CatalogParams | None = None,
                   tol: float = 1e-6) -> MatchResult:
    """Alternately extend f and its near-inverse between two towers.

    f: X -> (stage of tower_v) must certify strictly within eps with X
    located in tower_u.  Runs the given number of rounds with step scales
    eps_n = lam^n eta (eta = f's realized defect), recording every checked
    inequality; the entry condition eta^p (1+3 lam^p)/(1-lam^p) < eps^p
    must hold, and a violated step row then indicates an internal
    inconsistency, so it raises.

    Successive domains are connected by proxy maps phi_n = g_n o f_n
    rather than literal coordinate inclusions: the inverses produced by
    the extension steps land in fresh coordinates that are norm-close,
    not coordinate-close, to the old ones, and phi_n carries generators
    to exact multiples of the next representation's generators, so every
    recorded inequality transfers along the chain.  Dense-sequence
    vectors are absorbed by in-span approximation when they sit within
    the accumulated inversion drift, and open new directions otherwise.
    """
    eps = float(eps)
    lam = float(lam)
    if not 0.0 < lam < 1.0:
        raise ValueError("lam must lie in (0, 1)")
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    strict = certify_isometry(f, eps, tol=tol, strict=True)
    if strict.verdict != "pass":
        raise CertificationError(
            f"back_and_forth needs f certified strictly within eps "
            f"({strict.verdict})"
        )
    eta = max(strict.evidence["realized_eta"], 1e-9)
    p = f.p.value
    if star_bound(eta, lam, p) >= eps ** p:
        raise TowerError(
            f"entry condition violated: eta^p (1+3 lam^p)/(1-lam^p) = "
            f"{star_bound(eta, lam, p):.6e} >= eps^p = {eps ** p:.6e}"
        )
    X = f.domain
    if dense_u is None:
        dense_u = [np.asarray(g, dtype=float)
                   for g in tower_u.stages[0].generators]
    if dense_v is None:
        dense_v = [np.asarray(g, dtype=float)
                   for g in tower_v.stages[0].generators]
    eps_seq = [eta * lam ** k for k in range(rounds + 2)]

    ledger = Ledger(eta=eta, lam=lam, eps=eps)

    # round state: subspace reps, ambient-valued maps, proxy chain
    x_rep = _SubRep(space=X, loc=X_loc)
    y_vectors = [f(gen) for gen in X.generators]
    y_rep = _span_subrep(tower_v, _find_stage(tower_v, f.codomain),
                         y_vectors)
    f_n = _into_subrep(y_rep, f)            # X_0 -> Y_0 (space level)
    f_amb = y_rep.loc.embedding @ f_n       # X_0 -> V stage (ambient)
    f0_amb = f_amb
    chain = identity_map(X)                 # X -> X_n (proxy composite)
    fwd_drift = 0.0
    bwd_drift = 0.0

    g_last = None
    g_dom_rep = None
    for n in range(rounds):
        eps_n, eps_n1, eps_n2 = eps_seq[n], eps_seq[n + 1], eps_seq[n + 2]
        t_fwd = _inversion_target(eps_n, eps_n1, p)
        t_bwd = _inversion_target(eps_n1, eps_n2, p)
        step_rows = []
        step_certs = []

        # forward half: invert f_n over tower_u
        helpful_u = helpful_extend(
            tower_u, f_n, t_fwd, x_rep.loc,
            delta=eps_n1, params=params, tol=tol)
        tower_u = helpful_u.tower
        g_n = helpful_u.map                 # Y_n space -> U stage (ambient)
        cond2 = certify_isometry(g_n, eps_n1, tol=1e-5)
        step_certs.append(cond2.to_dict())
        if cond2.verdict == "fail":
            raise CertificationError(
                f"round {n}: near-inverse failed its certificate"
            )
        step_rows.extend(_prefixed(helpful_u.certificate.evidence["rows"],
                                   f"cond3_n{n}_"))
        fwd_drift += t_fwd

        # grow X_{n+1} inside tower_u's top stage
        m_u = tower_u.top_index
        pool = [g_n(gen) for gen in y_rep.space.generators]
        if n < len(dense_u):
            pool = _absorb_stub(tower_u, pool, dense_u[n], fwd_drift,
                                f"stub_absorbed_u_n{n}", step_rows)
        x_next = _span_subrep(tower_u, m_u, pool)
        g_sub = _into_subrep(x_next, g_n)   # Y_n space -> X_{n+1} space
        phi = g_sub @ f_n                   # X_n space -> X_{n+1} space

        # backward half: invert g_sub over tower_v
        helpful_v = helpful_extend(
            tower_v, g_sub, t_bwd,
            y_rep.loc, delta=eps_n2, params=params, tol=tol)
        tower_v = helpful_v.tower
        f_next_amb = helpful_v.map          # X_{n+1} space -> V stage
        cond1 = certify_isometry(f_next_amb, eps_n1, tol=1e-5)
        step_certs.append(cond1.to_dict())
        if cond1.verdict == "fail":
            raise CertificationError(
                f"round {n}: extension failed its certificate"
            )
        step_rows.extend(_prefixed(helpful_v.certificate.evidence["rows"],
                                   f"cond4_n{n}_"))
        bwd_drift += t_bwd

        # the geometric-decay comparison on X_n generators
        k_old = _find_stage(tower_v, f_amb.codomain)
        lift_old = tower_v.composite(k_old, tower_v.top_index)
        bound = (eta ** p) * (lam ** (n * p)) * (1.0 + 3.0 * lam ** p)
        for idx, gen in enumerate(x_rep.space.generators):
            old_img = lift_old(f_amb(gen))
            new_img = f_next_amb(phi(gen))
            x_amb = tower_u.lift(x_rep.loc, tower_u.top_index)(gen)
            scale = eval_norm(tower_u.top, x_amb).value
            diff = eval_norm(tower_v.top, old_img - new_img).value
            step_rows.append(ineq_row(
                f"twostar_n{n}_gen{idx}",
                (diff / scale) ** p if scale > 0 else 0.0,
                bound, tol,
            ))

        ledger.add_step(n, eps_n, step_rows, step_certs)
        if ledger.violations():
            raise TowerError(
                f"step inequality violated at round {n}: this indicates an "
                f"internal inconsistency, not bad data"
            )

        # grow Y_{n+1} inside tower_v's top stage
        m_v = tower_v.top_index
        img_pool = [f_next_amb(g) for g in x_next.space.generators]
        if n < len(dense_v):
            img_pool = _absorb_stub(tower_v, img_pool, dense_v[n],
                                    bwd_drift + tol,
                                    f"stub_absorbed_v_n{n}",
                                    ledger.steps[-1]["rows"])
        g_last = g_n
        g_dom_rep = y_rep
        y_rep = _span_subrep(tower_v, m_v, img_pool)
        x_rep = x_next
        chain = phi @ chain
        f_n = _into_subrep(y_rep, f_next_amb)
        f_amb = f_next_amb

    # final telescoping bound on the original generators
    k0 = _find_stage(tower_v, f0_amb.codomain)
    lift0 = tower_v.composite(k0, tower_v.top_index)
    final_rows = []
    total = star_bound(eta, lam, p)
    for idx, gen in enumerate(X.generators):
        h_img = f_amb(chain(gen))
        f_img = lift0(f0_amb(gen))
        x_amb = tower_u.lift(X_loc, tower_u.top_index)(gen)
        scale = eval_norm(tower_u.top, x_amb).value
        diff = eval_norm(tower_v.top, h_img - f_img).value
        final_rows.append(ineq_row(
            f"final_defect_gen{idx}",
            (diff / scale) ** p if scale > 0 else 0.0,
            total, 1e-4,
        ))
    ledger.add_step(rounds, eps_seq[rounds], final_rows, [])
    if ledger.violations():
        raise TowerError("final telescoping bound violated")
    return MatchResult(
        tower_u=tower_u, tower_v=tower_v, h=f_amb, g=g_last,
        ledger=ledger, h_domain=x_rep, g_domain=g_dom_rep, chain=chain,
    )


def _prefixed(rows: list, prefix: str) -> list:
    out = []
    for row in rows:
        r = dict(row)
        r["name"] = prefix + r["name"]
        out.append(r)
    return out


# ---------------------------------------------------------------------------
# operator towers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OperatorTower:
    """A tower whose stages carry nonexpansive maps into a fixed target."""

    base: Tower
    target: GeneratedSpace
    stage_ops: tuple

    def __post_init__(self):
        if len(self.stage_ops) != len(self.base.stages):
            raise TowerError("one stage operator per stage required")

    @property
    def top_op(self) -> LinearMap:
        return self.stage_ops[-1]

    def check_invariants(self) -> bool:
        """Consecutive stage operators agree on the earlier stage, bitwise."""
        for n in range(len(self.stage_ops) - 1):
            prev = self.stage_ops[n].matrix
            nxt = self.stage_ops[n + 1].matrix[:, :prev.shape[1]]
            if not np.array_equal(prev, nxt):
                return False
        return True


def optower_build(target: GeneratedSpace,
                  seed: GeneratedSpace | None = None,
                  seed_op: LinearMap | None = None) -> OperatorTower:
    """Start an operator tower; by default from the zero space."""
    if seed is None:
        seed = GeneratedSpace(target.p, 0, np.zeros((0, 0)))
    base = tower_build(seed, note="optower seed")
    if seed_op is None:
        seed_op = zero_map(seed, target)
    if op_norm(seed_op) > 1.0 + 1e-9:
        raise TowerError("seed operator must be nonexpansive")
    return OperatorTower(base=base, target=target, stage_ops=(seed_op,))


@dataclass(frozen=True)
class ScheduleEntry:
    """One request: an arrow out of stage `stage` plus its target map."""

    arrow: LinearMap
    cod_op: LinearMap
    stage: int


def optower_extend(ot: OperatorTower, schedule: list,
                   tol: float = COMMUTE_TOL) -> OperatorTower:
    """Append one stage per schedule entry via operator push-outs.

    Inapplicable entries (stage index beyond the top, or an arrow whose
    domain is not that stage) copy the previous stage, mirroring the
    bookkeeping of an enumerated schedule.  With a zero-dimensional target
    this reproduces the plain tower extension stage for stage.
    """
    base = ot.base
    ops = list(ot.stage_ops)
    H = ot.target
    for entry in schedule:
        top_idx = base.top_index
        applicable = (
            entry.stage <= top_idx and
            entry.arrow.domain.generator_key()
            == base.stages[entry.stage].generator_key()
        )
        if not applicable:
            prev = base.top
            base = base.with_stage(
                prev, identity_map(prev),
                {"action": "optower_copy", "stage": entry.stage},
                derived_conorm_lo=1.0,
            )
            ops.append(LinearMap(base.top, H, ops[-1].matrix))
            continue
        arrow_cert = certify_isometry(entry.arrow, 0.0, tol=LINK_TOL)
        if arrow_cert.verdict == "fail":
            raise TowerError("schedule arrow failed isometry certification")
        if op_norm(entry.cod_op) > 1.0 + 1e-9:
            raise TowerError("schedule target map must be nonexpansive")
        u_k = ops[entry.stage]
        defect = map_distance(entry.cod_op @ entry.arrow, u_k)
        if defect > tol:
            raise TowerError(
                f"schedule entry does not commute over the target "
                f"({defect:.3e})"
            )
        j = base.composite(entry.stage, top_idx)
        step = extend_with_pairs(
            base, [(entry.arrow, j)],
            {"action": "optower_extend", "stage": entry.stage},
        )
        base = step.tower
        fact = pushout_factorize(step.pushout, entry.cod_op, ops[-1])
        inv_tr = np.linalg.inv(step.transform.matrix)
        new_mat = fact.matrix @ inv_tr
        new_mat[:, :ops[-1].matrix.shape[1]] = ops[-1].matrix
        new_op = LinearMap(base.top, H, new_mat)
        nonexp = certify_nonexpansive(new_op, tol=1e-6)
        if nonexp.verdict == "fail":
            raise TowerError("extended stage operator is expansive")
        ops.append(new_op)
    return OperatorTower(base=base, target=H, stage_ops=tuple(ops))


@dataclass
class LiftResult:
    optower: OperatorTower
    embeddings: list
    ledger: Ledger


def optower_lift(ot: OperatorTower, s: LinearMap, chain: list,
                 rounds: int, tol: float = 1e-6) -> LiftResult:
    """Lift a nonexpansive map through the operator tower along a chain.

    chain[0] must be zero-dimensional and chain[n] includes into
    chain[n+1] by coordinates.  Produces embeddings e_n: chain[n] -> stage
    with step scales eps_n = 2^(-n/p), recording per step that the lifted
    operator matches s on chain[n+1] within eps_{n+1} and that consecutive
    embeddings agree within (eps_n^p + eps_{n+1}^p)^(1/p).
    """
    H = ot.target
    if s.codomain.generator_key() != H.generator_key():
        raise TowerError("s must land in the operator tower's target")
    if op_norm(s) > 1.0 + 1e-9:
        raise CertificationError("optower_lift needs |s| <= 1")
    if len(chain) < rounds + 1:
        raise TowerError("chain too short for the requested rounds")
    if chain[0].dim != 0:
        raise TowerError("chain must start at the zero space")
    p = H.p.value
    X = s.domain

    ledger = Ledger(eta=1.0, lam=2.0 ** (-1.0 / p), eps=1.0)
    e_n = zero_map(chain[0], ot.base.top)
    embeddings = [e_n]
    for n in range(rounds):
        eps_n = 2.0 ** (-n / p)
        eps_n1 = 2.0 ** (-(n + 1) / p)
        X_n, X_n1 = chain[n], chain[n + 1]
        s_n = s @ coordinate_inclusion(X_n, X)
        s_n1 = s @ coordinate_inclusion(X_n1, X)
        step = _operator_square(
            ot, e_n, s_n, s_n1,
            coordinate_inclusion(X_n, X_n1), eps_n,
            {"action": "optower_lift", "round": n},
        )
        ot = step["optower"]
        e_next = step["extension"]
        u_new = ot.top_op
        rows = [
            ineq_row(f"target_match_n{n + 1}",
                     map_distance(u_new @ e_next, s_n1), eps_n1, tol),
            ineq_row(f"coherence_n{n}",
                     map_distance(
                         e_next @ coordinate_inclusion(X_n, X_n1),
                         ot.base.links[-1] @ e_n),
                     (eps_n ** p + eps_n1 ** p) ** (1.0 / p), tol),
            ineq_row(f"nonexpansive_n{n + 1}",
                     op_norm(e_next), 1.0, tol),
        ]
        iso = certify_isometry(e_next, eps_n1, tol=tol)
        if iso.verdict == "fail":
            raise CertificationError(
                f"lift round {n} failed its almost-isometry certificate"
            )
        ledger.add_step(n, eps_n, rows, [iso.to_dict()])
        if ledger.violations():
            raise TowerError(f"lift step inequality violated at round {n}")
        e_n = e_next
        embeddings.append(e_n)
    return LiftResult(optower=ot, embeddings=embeddings, ledger=ledger)


def _operator_square(ot: OperatorTower, e_n: LinearMap, s_n: LinearMap,
                     s_big: LinearMap, a: LinearMap, eps_n: float,
                     record: dict) -> dict:
    """One amalgamation square: join (e_n, s_n) and extend along a.

    Builds the amalgam of e_n at scale eps_n, joins the target maps over
    it, pushes out against the inclusion a, factors the joined operator
    through, and appends the result as a new stage.  Returns the grown
    operator tower and the extension of a's codomain into the new stage.
    """
    base = ot.base
    H = ot.target
    u_top = ot.top_op
    am = amalgam(e_n, max(eps_n, 1e-9))
    joined, oa_cert = operator_amalgam(am, s_n, u_top)
    po = pushout(am.i, a)
    w = pushout_factorize(po, joined, s_big)
    link0 = po.leg_y @ am.j                     # G_top -> PO
    new_space, link, moved, transform = _canonicalize(
        po.space, link0, [po.leg_z])
    e_next = moved[0]                            # cod(a) -> new stage
    inv_tr = np.linalg.inv(transform.matrix)
    new_mat = w.matrix @ inv_tr
    new_mat[:, :u_top.matrix.shape[1]] = u_top.matrix
    rec = dict(record)
    rec["amalgam_certificate"] = oa_cert.to_dict()
    # link conorm: leg_y opposite the inclusion a, composed with am.j
    link_lo = po.derived_conorm_leg_y * am.derived_conorm_j
    base = base.with_stage(new_space, link, rec,
                           derived_conorm_lo=link_lo)
    new_op = LinearMap(base.top, H, new_mat)
    nonexp = certify_nonexpansive(new_op, tol=1e-6)
    if nonexp.verdict == "fail":
        raise TowerError("lifted stage operator is expansive")
    return {
        "optower": OperatorTower(base=base, target=H,
                                 stage_ops=ot.stage_ops + (new_op,)),
        "extension": e_next,
    }


@dataclass
class KernelResult:
    optower: OperatorTower
    map: LinearMap
    certificate: Certificate


def kernel_extend(ot: OperatorTower, inclusion: LinearMap, e: LinearMap,
                  delta: float, right_inverse: LinearMap | None = None,
                  tol: float = 1e-6) -> KernelResult:
    """Extend a near-kernel-valued embedding across a subspace inclusion.

    Given E included in F and e: E -> G_top with |u_top o e| <= delta,
    produces f: F -> G_new with f restricted to E within delta of e and
    u_new o f exactly zero after the right-inverse correction
    f := (id - r o u) o f'.  The right inverse is taken from the argument,
    from stage composites, or from an operator-net search, in that order;
    the exact-kernel row needs u_new o r = id to hold bitwise.
    """
    delta = float(delta)
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    H = ot.target
    E = inclusion.domain
    if e.domain.generator_key() != E.generator_key():
        raise TowerError("e must be defined on the included subspace")
    if e.codomain.generator_key() != ot.base.top.generator_key():
        raise TowerError("e must land in the operator tower's top stage")
    incl_cert = certify_isometry(inclusion, 0.0, tol=tol)
    if incl_cert.verdict != "pass":
        raise CertificationError("inclusion must certify isometric")
    e_cert = certify_isometry(e, delta, tol=tol)
    if e_cert.verdict == "fail":
        raise CertificationError("e must certify within delta")
    slack = map_distance(ot.top_op @ e, zero_map(E, H))
    if slack > delta + tol:
        raise CertificationError(
            f"|u o e| = {slack:.3e} exceeds delta = {delta}"
        )

    zero_E = zero_map(E, H)
    zero_F = zero_map(inclusion.codomain, H)
    step = _operator_square(
        ot, e, zero_E, zero_F, inclusion, delta,
        {"action": "kernel_extend", "delta": delta},
    )
    ot = step["optower"]
    f_prime = step["extension"]                  # F -> new stage
    u_new = ot.top_op
    stage_space = ot.base.top

    r = right_inverse
    source = "supplied"
    if r is None:
        r, source = _find_right_inverse(ot, tol)
    check = np.abs(u_new.matrix @ r.matrix
                   - np.eye(H.dim)).max(initial=0.0)
    if check > tol:
        raise TowerError(
            f"right inverse candidate misses identity by {check:.3e}"
        )
    corrected = f_prime.matrix \
        - r.matrix @ (u_new.matrix @ f_prime.matrix)
    f = LinearMap(inclusion.codomain, stage_space, corrected)

    kernel_residual = np.abs(u_new.matrix @ f.matrix).max(initial=0.0)
    lifted_e = ot.base.links[-1] @ e
    restriction = map_distance(f @ inclusion, lifted_e)
    iso = certify_isometry(f, delta, tol=tol)
    if iso.verdict == "fail":
        raise CertificationError("kernel extension failed its certificate")
    rows = [
        ineq_row("restriction_defect", restriction, delta, tol),
        eq_row("kernel_exact", kernel_residual, 0.0, 0.0),
        ineq_row("op_bound", op_norm(f), 1.0 + delta, tol),
    ]
    cert = make_certificate(
        "inequality_ledger",
        {"delta": delta, "tol": tol, "right_inverse": source},
        {"rows": rows, "inconclusive": iso.verdict == "inconclusive",
         "isometry": iso.to_dict()},
    )
    if cert.verdict == "fail":
        raise CertificationError("kernel extension rows failed")
    return KernelResult(optower=ot, map=f, certificate=cert)


def _find_right_inverse(ot: OperatorTower, tol: float):
    """A map r: H -> top stage with u_top o r = id, exactly if possible."""
    H = ot.target
    u_new = ot.top_op
    stage_space = ot.base.top
    if H.dim == 0:
        return zero_map(H, stage_space), "trivial"
    key = H.generator_key()
    for idx, stage in enumerate(ot.base.stages):
        if stage.generator_key() == key:
            candidate = ot.base.composite(idx, ot.base.top_index)
            cand = LinearMap(H, stage_space, candidate.matrix)
            if np.abs(u_new.matrix @ cand.matrix
                      - np.eye(H.dim)).max(initial=0.0) <= tol:
                return cand, f"stage_{idx}"
    try:
        net = operator_net(H, stage_space, eps=0.5, step=0.5)
    except SizeCapError as exc:
        raise TowerError(
            f"no stage composite inverts the operator and the net "
            f"search is out of range: {exc}"
        ) from exc
    for cand in net:
        if np.abs(u_new.matrix @ cand.matrix
                  - np.eye(H.dim)).max(initial=0.0) <= tol:
            return cand, "net"
    raise TowerError("no right inverse within tolerance at this stage")
