"""End-to-end acceptance runs for the package's headline numeric contracts.

Each test exercises one contract at scale, prints a single summary line with
the measured figure, and registers the report it generated; the final test
replays every registered report from its own bytes and checks byte-identical
re-serialization.
"""

import json
import math
import sys
import time

import numpy as np

from pgl.certs import eq_row, ineq_row, make_certificate
from pgl.constructions import amalgam, multi_extension, pushout
from pgl.core import (
    Exponent,
    GeneratedSpace,
    HaydonFamily,
    eval_norm,
    haydon_norm_power,
    haydon_separation_check,
    haydon_separation_threshold,
    norm_oracle,
)
from pgl.maps import (
    LinearMap,
    certify_isometry,
    coordinate_inclusion,
    identity_map,
    map_distance,
    op_norm,
    zero_map,
)
from pgl.sampling import (
    default_rng,
    image_space,
    padded_inclusion,
    perturbed_isometry,
    random_nonexpansive,
    random_orthogonal,
    random_space,
    random_vector,
)
from pgl.serialize import (
    build_report,
    canonical_json,
    replay_report,
    write_canonical,
)
from pgl.towers import (
    NetParams,
    ScheduleEntry,
    aud_extend,
    back_and_forth,
    local_extend,
    locate_stage,
    optower_build,
    optower_extend,
    optower_lift,
    star_bound,
    tower_build,
    tower_extend,
)

# Reports registered by tests 1-9, replayed byte-for-byte by test 10.
REPORTS: dict[str, dict] = {}

EXPECTED_REPORT_NAMES = (
    "norm_oracle_agreement",
    "amalgam_exactness",
    "pushout_legs",
    "single_pair_extension",
    "disposition_steps",
    "matching_ledger",
    "local_extension",
    "two_functional_separation",
    "operator_tower_conditions",
)


def _announce(num: int, ok: bool, detail: str) -> None:
    print(f"[criterion {num:2d}] {'PASS' if ok else 'FAIL'} - {detail}",
          file=sys.__stdout__, flush=True)


def _register(name: str, certificates: list) -> dict:
    report = build_report(f"acceptance {name}", [], [], certificates)
    REPORTS[name] = report
    return report


def _forced_dim(rng, p, dim: int, max_generators: int) -> GeneratedSpace:
    space = random_space(rng, p=p, max_dim=dim, max_generators=max_generators)
    while space.dim != dim:
        space = random_space(rng, p=p, max_dim=dim,
                             max_generators=max_generators)
    return space


def test_01_norm_engine_oracle_agreement():
    t0 = time.monotonic()
    rng = default_rng(1)
    exponents = [Exponent(1, 2), Exponent(2, 3), Exponent(1, 1)]
    rows = []
    worst = 0.0
    for i in range(200):
        space = random_space(rng, p=exponents[i % 3], max_dim=2,
                             max_generators=4)
        gap_i = 0.0
        for _ in range(20):
            v = random_vector(rng, space)
            gap = abs(eval_norm(space, v).value
                      - norm_oracle(space, v, resolution=1e-3))
            gap_i = max(gap_i, gap)
        worst = max(worst, gap_i)
        rows.append(ineq_row(f"oracle_gap_space_{i}", gap_i, 5e-3))
    elapsed = time.monotonic() - t0
    cert = make_certificate(
        "inequality_ledger",
        {"resolution": 1e-3, "bound": 5e-3, "spaces": 200, "vectors": 20},
        {"rows": rows, "worst_gap": worst, "inconclusive": False},
    )
    _register("norm_oracle_agreement", [cert])
    ok = worst <= 5e-3 and cert.verdict == "pass" and elapsed <= 60.0
    _announce(1, ok, f"worst |engine - oracle| gap {worst:.2e} over "
                     f"200 spaces x 20 vectors in {elapsed:.1f}s (limit 60s)")
    assert worst <= 5e-3
    assert cert.verdict == "pass"
    assert elapsed <= 60.0


def test_02_amalgam_exactness():
    t0 = time.monotonic()
    rng = default_rng(2)
    rows = []
    certs = []
    worst_gap = 0.0
    worst_slack = -math.inf
    for i in range(100):
        X = random_space(rng, max_dim=2, max_generators=3)
        eps = float(rng.uniform(0.05, 0.5))
        f = perturbed_isometry(rng, X, eps)
        f_cert = certify_isometry(f, eps, tol=1e-6)
        assert f_cert.verdict == "pass"
        am = amalgam(f, eps)
        gap = 0.0
        points_x = [np.asarray(g, dtype=float) for g in X.generators]
        points_x += [random_vector(rng, X) for _ in range(25)]
        for x in points_x:
            inside = eval_norm(am.space, am.i.matrix @ x).value
            outside = eval_norm(X, x).value
            gap = max(gap, abs(inside - outside) / max(1.0, outside))
        Y = f.codomain
        points_y = [np.asarray(g, dtype=float) for g in Y.generators]
        points_y += [random_vector(rng, Y) for _ in range(25)]
        for y in points_y:
            inside = eval_norm(am.space, am.j.matrix @ y).value
            outside = eval_norm(Y, y).value
            gap = max(gap, abs(inside - outside) / max(1.0, outside))
        tilt = map_distance(am.j @ f, am.i)
        worst_gap = max(worst_gap, gap)
        worst_slack = max(worst_slack, tilt - eps)
        rows.append(ineq_row(f"factor_isometry_{i}", gap, 1e-6))
        rows.append(ineq_row(f"joint_defect_{i}", tilt, eps, 1e-6))
        if i < 2:
            certs.append(am.certificate)

    # closed-form check on the one-dimensional identity instance
    line_half = GeneratedSpace(Exponent(1, 2), 1, [[1.0]])
    am0 = amalgam(identity_map(line_half), 0.5)
    worked = eval_norm(am0.space, np.array([1.0, -1.0])).value
    rows.append(eq_row("identity_instance_midpoint", worked, 0.5, 1e-12))

    elapsed = time.monotonic() - t0
    cert = make_certificate(
        "inequality_ledger",
        {"instances": 100, "points_per_instance": 50},
        {"rows": rows, "worst_factor_gap": worst_gap,
         "inconclusive": False},
    )
    _register("amalgam_exactness", [cert] + certs)
    ok = (worst_gap <= 1e-6 and worst_slack <= 1e-6
          and abs(worked - 0.5) <= 1e-12 and cert.verdict == "pass"
          and elapsed <= 120.0)
    _announce(2, ok, f"100 amalgams: worst factor gap {worst_gap:.2e}, "
                     f"worst joint slack {worst_slack:+.2e}, midpoint value "
                     f"{worked:.15f} in {elapsed:.1f}s (limit 120s)")
    assert worst_gap <= 1e-6
    assert worst_slack <= 1e-6
    assert abs(worked - 0.5) <= 1e-12
    assert cert.verdict == "pass"
    assert elapsed <= 120.0


def test_03_pushout_leg_contract():
    t0 = time.monotonic()
    rng = default_rng(3)
    rows = []
    certs = []
    worst_op = 0.0
    worst_lo = math.inf
    for i in range(100):
        D = random_space(rng, max_dim=2, max_generators=3)
        C, u = image_space(D, random_orthogonal(rng, D.dim))
        G = random_space(rng, p=D.p, max_dim=2, max_generators=3)
        v = random_nonexpansive(rng, D, G)
        po = pushout(u, v)
        cert = certify_isometry(po.leg_z, 1e-4, tol=1e-9,
                                known_conorm_lo=po.derived_conorm_leg_z)
        op = cert.evidence["op_norm"]
        lo = cert.evidence["conorm_lo"]
        worst_op = max(worst_op, op)
        worst_lo = min(worst_lo, lo)
        rows.append(ineq_row(f"parallel_leg_op_{i}", op, 1.0, 1e-6))
        rows.append(ineq_row(f"parallel_leg_conorm_{i}", 1.0 - 1e-4, lo))
        assert cert.verdict == "pass"
        if i < 2:
            certs.append(po.certificate)
    elapsed = time.monotonic() - t0
    cert = make_certificate(
        "inequality_ledger",
        {"instances": 100},
        {"rows": rows, "worst_op": worst_op, "worst_conorm": worst_lo,
         "inconclusive": False},
    )
    _register("pushout_legs", [cert] + certs)
    ok = (worst_op <= 1.0 + 1e-6 and worst_lo >= 1.0 - 1e-4
          and cert.verdict == "pass" and elapsed <= 120.0)
    _announce(3, ok, f"100 push-outs: parallel leg op <= {worst_op:.9f}, "
                     f"certified co-norm >= {worst_lo:.9f} in {elapsed:.1f}s "
                     f"(limit 120s)")
    assert worst_op <= 1.0 + 1e-6
    assert worst_lo >= 1.0 - 1e-4
    assert cert.verdict == "pass"
    assert elapsed <= 120.0


def _unit_norm_perturbation(rng, D, Y0, iso, eps):
    """A certified eps-isometry with operator norm 1 up to rounding."""
    if eps == 0.0 or D.dim == 1:
        return iso
    for _ in range(8):
        P = np.eye(D.dim) + rng.uniform(-0.35 * eps, 0.35 * eps,
                                        (D.dim, D.dim))
        cand = LinearMap(D, Y0, iso.matrix @ P)
        o = op_norm(cand)
        if o == 0.0:
            continue
        cand = cand.scale(1.0 / o)
        cert = certify_isometry(cand, eps, tol=1e-6)
        if cert.verdict == "pass" and cert.evidence["conorm_lo"] >= 1.0 - eps:
            return cand
    return iso


def test_04_single_pair_extension_contract():
    t0 = time.monotonic()
    rng = default_rng(4)
    eps_cycle = [0.0, 0.1, 0.3]
    rows = []
    certs = []
    worst_square = 0.0
    worst_norm_gap = 0.0
    worst_floor = math.inf
    for i in range(50):
        eps = eps_cycle[i % 3]
        D = random_space(rng, max_dim=2, max_generators=3)
        C, u = padded_inclusion(D)
        Y0, iso = image_space(D, random_orthogonal(rng, D.dim))
        t = _unit_norm_perturbation(rng, D, Y0, iso, eps)
        me = multi_extension([(u, t)])
        t_prime = me.t_primes[0]
        assert np.array_equal((t_prime @ u).matrix, (me.iota @ t).matrix)
        square = map_distance(t_prime @ u, me.iota @ t)
        norm_gap = abs(op_norm(t_prime) - op_norm(t))
        cert = certify_isometry(t_prime, eps + 1e-3, tol=1e-6,
                                known_conorm_lo=me.derived_conorm_t_prime)
        lo = cert.evidence["conorm_lo"]
        assert cert.verdict == "pass"
        worst_square = max(worst_square, square)
        worst_norm_gap = max(worst_norm_gap, norm_gap)
        worst_floor = min(worst_floor, lo - ((1.0 - eps) - 1e-3))
        rows.append(ineq_row(f"square_exact_{i}", square, 0.0))
        rows.append(ineq_row(f"norm_preserved_{i}", norm_gap, 1e-4))
        rows.append(ineq_row(f"conorm_floor_{i}", (1.0 - eps) - 1e-3, lo))
        if i < 2:
            certs.append(me.certificate)
    elapsed = time.monotonic() - t0
    cert = make_certificate(
        "inequality_ledger",
        {"instances": 50, "eps_values": eps_cycle},
        {"rows": rows, "inconclusive": False},
    )
    _register("single_pair_extension", [cert] + certs)
    ok = (worst_square == 0.0 and worst_norm_gap <= 1e-4
          and worst_floor >= 0.0 and cert.verdict == "pass"
          and elapsed <= 300.0)
    _announce(4, ok, f"50 extensions: square defect {worst_square:.1e} "
                     f"(bitwise), worst norm gap {worst_norm_gap:.2e}, "
                     f"co-norm floor margin {worst_floor:+.2e} in "
                     f"{elapsed:.1f}s (limit 300s)")
    assert worst_square == 0.0
    assert worst_norm_gap <= 1e-4
    assert worst_floor >= 0.0
    assert cert.verdict == "pass"
    assert elapsed <= 300.0


def test_05_tower_disposition_steps():
    t0 = time.monotonic()
    rng = default_rng(5)
    p = Exponent(1, 2)
    tower = tower_build(GeneratedSpace.lp(p, 1))
    for k in range(4):
        X = tower.stages[k]
        Y, incl = padded_inclusion(X)
        tower = aud_extend(tower, incl, locate_stage(tower, k), eps=0.3).tower
    assert len(tower.stages) == 5

    eps_cycle = [0.3, 0.21, 0.1]
    certs = []
    worst_rel_defect = 0.0
    for q in range(20):
        eps = eps_cycle[q % 3]
        stage_idx = [0, 1][q % 2]
        X = tower.stages[stage_idx]
        if X.dim == 1:
            ydim = 2 if q % 4 < 2 else 1
            Y = _forced_dim(rng, p, ydim, 4)
            x0 = np.zeros(1)
            x0[0] = 1.0
            nx = eval_norm(X, x0).value
            y0 = rng.standard_normal(Y.dim)
            ny = eval_norm(Y, y0).value
            g = LinearMap(X, Y, (y0 / ny * nx)[:, None])
        else:
            Y, g = image_space(X, random_orthogonal(rng, X.dim))
        res = aud_extend(tower, g, locate_stage(tower, stage_idx), eps=eps)
        assert res.delta == math.sqrt(1.0 + eps) - 1.0
        assert res.isometry_certificate.verdict == "pass"
        assert float(res.isometry_certificate.parameters["eps"]) == eps
        for row in res.certificate.evidence["rows"]:
            if row["name"].startswith("defect_generator"):
                assert row["lhs"] <= row["rhs"]
                if row["rhs"] > 0.0:
                    worst_rel_defect = max(
                        worst_rel_defect, row["lhs"] / (row["rhs"] / eps))
        certs.append(res.certificate)
    elapsed = time.monotonic() - t0
    _register("disposition_steps", certs)
    ok = worst_rel_defect <= 0.3 and elapsed <= 600.0
    _announce(5, ok, f"5-stage tower, 20 requests: every step scale exactly "
                     f"sqrt(1+eps)-1, worst relative generator defect "
                     f"{worst_rel_defect:.4f} <= eps in {elapsed:.1f}s "
                     f"(limit 600s)")
    assert worst_rel_defect <= 0.3
    assert elapsed <= 600.0


def test_06_matching_ledger_contract():
    t0 = time.monotonic()
    configs = [
        (Exponent(1, 1), 0.15, 0.3, 0.3),
        (Exponent(1, 1), 0.15, 0.21, 0.3),
        (Exponent(2, 3), 0.35, 0.3, 0.21),
        (Exponent(2, 3), 0.35, 0.21, 0.21),
        (Exponent(1, 2), 0.92, 0.3, 0.3),
    ]
    certs = []
    worst_two_margin = math.inf
    worst_final = -math.inf
    for idx, (p, eps_budget, eps_u, eps_v) in enumerate(configs):
        seed = GeneratedSpace(p, 1, [[1.0]])
        tower_u = tower_build(seed)
        Yu, inc_u = padded_inclusion(tower_u.stages[0])
        tower_u = aud_extend(tower_u, inc_u, locate_stage(tower_u, 0),
                             eps=eps_u).tower
        tower_v = tower_build(seed)
        Yv, inc_v = padded_inclusion(tower_v.stages[0])
        tower_v = aud_extend(tower_v, inc_v, locate_stage(tower_v, 0),
                             eps=eps_v).tower
        X = GeneratedSpace(p, 1, [[1.0]])
        f = LinearMap(X, tower_v.stages[0], [[1.05]])
        result = back_and_forth(tower_u, tower_v, f, eps=eps_budget, lam=0.2,
                                rounds=4, X_loc=locate_stage(tower_u, 0))
        eta = result.ledger.eta
        assert abs(eta - 0.05) <= 1e-12
        assert result.ledger.violations() == []
        all_rows = [row for step in result.ledger.steps
                    for row in step["rows"]]
        two_rows = [r for r in all_rows if r["name"].startswith("twostar")]
        final_rows = [r for r in all_rows
                      if r["name"].startswith("final_defect")]
        assert two_rows and final_rows
        for row in two_rows:
            worst_two_margin = min(worst_two_margin, row["rhs"] - row["lhs"])
        bound = star_bound(0.05, 0.2, p.value) + 1e-4
        for row in final_rows:
            assert row["lhs"] <= bound
            worst_final = max(worst_final, row["lhs"] - bound)
        certs.append(make_certificate(
            "inequality_ledger",
            {"pair": idx, "p": str(p), "eta": eta, "lam": 0.2, "rounds": 4},
            {"rows": all_rows, "inconclusive": False},
        ))
    elapsed = time.monotonic() - t0
    _register("matching_ledger", certs)
    ok = (worst_two_margin >= 0.0 and worst_final <= 0.0
          and elapsed <= 900.0)
    _announce(6, ok, f"5 tower pairs x 4 rounds: min step-row margin "
                     f"{worst_two_margin:+.2e}, final defect margin "
                     f"{worst_final:+.2e} in {elapsed:.1f}s (limit 900s)")
    assert worst_two_margin >= 0.0
    assert worst_final <= 0.0
    assert elapsed <= 900.0


def test_07_local_extension_contract():
    t0 = time.monotonic()
    rng = default_rng(7)
    certs = []
    worst_restriction = 0.0
    worst_inflation = -math.inf
    for i in range(20):
        G = random_space(rng, max_dim=2, max_generators=3)
        tower = tower_build(G)
        X = _forced_dim(rng, G.p, 2, 3)
        axis_norm = eval_norm(X, np.array([1.0, 0.0])).value
        Y = GeneratedSpace(G.p, 1, [[1.0 / axis_norm]])
        inclusion = coordinate_inclusion(Y, X)
        column = random_vector(rng, G)
        small = LinearMap(Y, G, column[:, None])
        o = op_norm(small)
        while o <= 1e-9:
            column = random_vector(rng, G)
            small = LinearMap(Y, G, column[:, None])
            o = op_norm(small)
        small = small.scale(float(rng.uniform(0.3, 1.0)) / o)
        res = local_extend(tower, small, inclusion, eps=0.1)
        link = res.tower.links[-1]
        restriction = map_distance(res.map @ inclusion, link @ small)
        inflation = op_norm(res.map) - (1.1 * op_norm(small) + 1e-4)
        assert restriction == 0.0
        assert inflation <= 0.0
        assert res.certificate.verdict == "pass"
        worst_restriction = max(worst_restriction, restriction)
        worst_inflation = max(worst_inflation, inflation)
        certs.append(res.certificate)
    elapsed = time.monotonic() - t0
    _register("local_extension", certs)
    ok = (worst_restriction == 0.0 and worst_inflation <= 0.0
          and elapsed <= 300.0)
    _announce(7, ok, f"20 extensions through subspace inclusions: "
                     f"restriction defect {worst_restriction:.1e} (exact), "
                     f"norm inflation margin {worst_inflation:+.2e} in "
                     f"{elapsed:.1f}s (limit 300s)")
    assert worst_restriction == 0.0
    assert worst_inflation <= 0.0
    assert elapsed <= 300.0


def test_08_two_functional_separation():
    t0 = time.monotonic()
    rng = default_rng(8)
    exponents = [Exponent(1, 2), Exponent(2, 3), Exponent(1, 1)]
    certs = []
    worst_gap = math.inf
    worst_identity = 0.0
    for i in range(50):
        p = exponents[i % 3]
        alpha = float(rng.uniform(0.05, 1.47))
        offset = float(rng.uniform(0.1, 0.5))
        beta = alpha + offset if alpha + offset <= 1.52 else alpha - offset
        phi = np.array([math.cos(alpha), math.sin(alpha)])
        psi = np.array([math.cos(beta), math.sin(beta)])
        family = HaydonFamily(p, phi)
        mu = haydon_separation_threshold(family, psi)
        assert math.isfinite(mu) and mu > 0.0
        cert = haydon_separation_check(family, psi, mu)
        assert cert.verdict == "pass"
        gap = cert.evidence["gap"]
        worst_gap = min(worst_gap, gap)
        assert haydon_norm_power(family, np.zeros(2), 1.0) == 1.0
        identity_err = abs(haydon_norm_power(family, mu * phi, 1.0)
                           - (1.0 + mu ** p.value))
        worst_identity = max(worst_identity, identity_err)
        certs.append(cert)
    elapsed = time.monotonic() - t0
    _register("two_functional_separation", certs)
    ok = (worst_gap >= 1.0 - 1e-9 and worst_identity <= 1e-12
          and elapsed <= 5.0)
    _announce(8, ok, f"50 functional pairs at threshold scale: separation "
                     f"gap >= {worst_gap:.12f}, worst identity error "
                     f"{worst_identity:.1e} in {elapsed:.2f}s (limit 5s)")
    assert worst_gap >= 1.0 - 1e-9
    assert worst_identity <= 1e-12
    assert elapsed <= 5.0


def test_09_operator_tower_conditions():
    t0 = time.monotonic()
    rng = default_rng(9)
    p = Exponent(1, 2)
    rows = []

    # zero target: a six-entry schedule against the plain extension route
    H0 = GeneratedSpace(p, 0, np.zeros((0, 0)))
    Z = GeneratedSpace(p, 0, np.zeros((0, 0)))
    cods = [_forced_dim(rng, p, d, 2) for d in (1, 2, 1, 1, 1, 1)]
    ot = optower_build(H0)
    schedule = [ScheduleEntry(arrow=LinearMap(Z, C, np.zeros((C.dim, 0))),
                              cod_op=zero_map(C, H0), stage=0)
                for C in cods]
    grown = optower_extend(ot, schedule)
    assert grown.check_invariants()
    plain = tower_build(Z)
    for C in cods:
        arrow = LinearMap(Z, C, np.zeros((C.dim, 0)))
        plain = tower_extend(plain, [arrow], NetParams(0.5, 0.5))
    assert len(grown.base.stages) == len(plain.stages) == 7
    for i, (a, b) in enumerate(zip(grown.base.stages, plain.stages)):
        assert a.dim == b.dim
        assert a.generator_key() == b.generator_key()
        rows.append(eq_row(f"stage_{i}_dim", float(a.dim), float(b.dim)))
        rows.append(eq_row(
            f"stage_{i}_generators_match",
            1.0 if a.generator_key() == b.generator_key() else 0.0, 1.0))

    # one-dimensional target carried by the tower: lift along a chain
    H = GeneratedSpace(p, 1, [[1.0]])
    ot2 = optower_build(H, seed=H, seed_op=identity_map(H))
    X = GeneratedSpace(p, 1, [[1.0]])
    s = LinearMap(X, H, [[1.0]])
    lift = optower_lift(ot2, s, [Z, X, X, X], rounds=3)
    assert lift.ledger.violations() == []
    lift_rows = []
    for n, step in enumerate(lift.ledger.steps):
        assert step["eps_n"] == 2.0 ** (-n / p.value)
        rows.append(eq_row(f"lift_scale_n{n}", step["eps_n"],
                           2.0 ** (-n / p.value)))
        lift_rows.extend(step["rows"])
    target_rows = [r for r in lift_rows if r["name"].startswith("target_match")]
    assert len(target_rows) == 3
    worst_margin = min(r["rhs"] + r["tol"] - r["lhs"] for r in lift_rows)
    rows.extend(lift_rows)

    elapsed = time.monotonic() - t0
    cert = make_certificate(
        "inequality_ledger",
        {"schedule_entries": 6, "lift_rounds": 3, "p": str(p)},
        {"rows": rows, "inconclusive": False},
    )
    _register("operator_tower_conditions", [cert])
    ok = worst_margin >= 0.0 and cert.verdict == "pass" and elapsed <= 600.0
    _announce(9, ok, f"zero-target schedule matches the plain route on all "
                     f"7 stages; 3-round lift rows hold with min margin "
                     f"{worst_margin:+.2e} in {elapsed:.1f}s (limit 600s)")
    assert worst_margin >= 0.0
    assert cert.verdict == "pass"
    assert elapsed <= 600.0


def test_10_report_replay_determinism(tmp_path):
    t0 = time.monotonic()
    assert set(REPORTS) == set(EXPECTED_REPORT_NAMES)
    for name, report in REPORTS.items():
        path = tmp_path / f"{name}.json"
        write_canonical(report, path)
        raw = path.read_text(encoding="utf-8")
        parsed = json.loads(raw)
        replayed = replay_report(parsed)
        assert replayed["matches"], name
        assert replayed["verdict"] == parsed["verdict"], name
        assert canonical_json(parsed) == raw, name
        second = tmp_path / f"{name}.again.json"
        write_canonical(report, second)
        assert second.read_text(encoding="utf-8") == raw, name
    elapsed = time.monotonic() - t0
    ok = elapsed <= 60.0
    _announce(10, ok, f"all {len(REPORTS)} reports replay to their stored "
                      f"verdicts from their own bytes, byte-identical on "
                      f"re-serialization, in {elapsed:.2f}s (limit 60s)")
    assert elapsed <= 60.0
