"""Batch front door: file-based runs of every construction, with reports.

Each invocation performs one logical command, reads JSON space/map/tower
files, and emits a deterministic report: sorted keys, floats at report
precision, certificate verdicts recomputed from the stored (rounded)
evidence, and input digests.  The report goes to stdout (JSON by default,
``--format text`` for tables) and, with ``--out``, to a file byte-identical
to the stdout JSON.  Artifacts (spaces, towers) are written with ``--save``.

Exit codes: 0 pass, 1 fail, 2 inconclusive, 3 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .catalog import CatalogParams, enumerate_rational_spaces
from .certs import Certificate, eq_row, make_certificate
from .constructions import amalgam, lp_sum, multi_extension, pushout, quotient
from .core import (
    GeneratedSpace,
    HaydonFamily,
    eval_norm,
    haydon_separation_check,
    haydon_separation_threshold,
    norm_oracle,
)
from .errors import (
    CatalogTooCoarseError,
    CertificationError,
    PglError,
)
from .maps import certify_isometry, certify_nonexpansive
from .serialize import (
    EXIT_FAIL,
    EXIT_USAGE,
    build_report,
    canonical_json,
    exit_code_for,
    load_map,
    load_optower,
    load_space,
    load_tower,
    replay_report,
    round_floats,
    save_optower,
    save_space,
    save_tower,
    space_to_dict,
    to_jsonable,
    write_canonical,
)
from .towers import (
    NetParams,
    aud_extend,
    back_and_forth,
    helpful_extend,
    kernel_extend,
    local_extend,
    locate_stage,
    optower_build,
    optower_lift,
    tower_build,
    tower_extend,
)


class UsageError(Exception):
    pass


def _parse_number(value) -> float:
    if isinstance(value, str):
        return float(Fraction(value))
    return float(value)


def _parse_vector(text: str) -> np.ndarray:
    try:
        data = json.loads(text)
        return np.array([_parse_number(v) for v in data], dtype=float)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad vector {text!r}: {exc}") from exc


def _parse_rows(text: str) -> list:
    try:
        data = json.loads(text)
        return [[_parse_number(v) for v in row] for row in data]
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad matrix {text!r}: {exc}") from exc


def _parse_exponent(text: str):
    try:
        frac = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad exponent {text!r}") from exc
    return (frac.numerator, frac.denominator)


def _need(value, flag: str):
    if value in (None, []):
        raise UsageError(f"this command requires {flag}")
    return value


def _exactly(values, count: int, flag: str):
    values = _need(values, flag)
    if len(values) != count:
        raise UsageError(f"this command requires {flag} given {count} "
                         f"time(s), got {len(values)}")
    return values


def _ledger_certificates(ledger) -> list:
    certs = []
    for step in ledger.steps:
        certs.append(make_certificate(
            "inequality_ledger",
            {"n": step["n"], "eps_n": step["eps_n"]},
            {"rows": step["rows"], "inconclusive": False},
        ))
    return certs


# ---------------------------------------------------------------------------
# command handlers: each returns (inputs, outputs, certificates, extra)
# ---------------------------------------------------------------------------

def _cmd_norm(args):
    path = _exactly(args.space, 1, "--space")[0]
    space = load_space(path)
    x = _parse_vector(_need(args.vector, "--vector"))
    tol = args.tol if args.tol is not None else 5e-3
    res = eval_norm(space, x)
    oracle = norm_oracle(space, x, resolution=1e-3, seed=args.seed)
    cert = make_certificate(
        "norm_equality",
        {"tol": tol, "resolution": 1e-3, "seed": args.seed},
        {"rows": [{"name": "oracle_agreement", "lhs": res.value,
                   "rhs": oracle, "tol": tol}],
         "value": res.value, "power": res.power,
         "support": list(res.support)},
    )
    return [path], [], [cert], {"value": res.value}


def _cmd_certify(args):
    path = _exactly(args.map, 1, "--map")[0]
    f = load_map(path)
    kwargs = {}
    if args.budget is not None:
        kwargs["budget"] = args.budget
    cert = certify_isometry(f, args.eps or 0.0, tol=args.tol or 1e-6,
                            strict=args.strict, **kwargs)
    return [path], [], [cert], {}


def _cmd_sum(args):
    paths = _need(args.space, "--space")
    spaces = [load_space(p) for p in paths]
    s = lp_sum(spaces)
    certs = [certify_isometry(inc, 0.0, known_conorm_lo=1.0)
             for inc in s.inclusions]
    certs += [certify_nonexpansive(proj) for proj in s.projections]
    outputs = []
    if args.save:
        outputs.append(str(save_space(s.space, args.save)))
    return paths, outputs, certs, {}


def _cmd_quotient(args):
    path = _exactly(args.space, 1, "--space")[0]
    space = load_space(path)
    kernel = _parse_rows(_need(args.kernel, "--kernel"))
    q = quotient(space, kernel)
    certs = [certify_nonexpansive(q.projection)]
    outputs = []
    if args.save:
        outputs.append(str(save_space(q.space, args.save)))
    return [path], outputs, certs, {"kernel_rank": q.kernel_rank}


def _cmd_pushout(args):
    paths = _exactly(args.map, 2, "--map")
    u, v = load_map(paths[0]), load_map(paths[1])
    po = pushout(u, v)
    outputs = []
    if args.save:
        outputs.append(str(save_space(po.space, args.save)))
    return paths, outputs, [po.certificate], {}


def _cmd_amalgam(args):
    path = _exactly(args.map, 1, "--map")[0]
    f = load_map(path)
    eps = _need(args.eps, "--eps")
    am = amalgam(f, eps)
    outputs = []
    if args.save:
        outputs.append(str(save_space(am.space, args.save)))
    return [path], outputs, [am.certificate], {}


def _cmd_extend(args):
    paths = _need(args.map, "--map")
    if len(paths) % 2 != 0:
        raise UsageError("extend needs --map pairs: u1 t1 [u2 t2 ...]")
    maps = [load_map(p) for p in paths]
    pairs = list(zip(maps[0::2], maps[1::2]))
    me = multi_extension(pairs)
    outputs = []
    if args.save:
        outputs.append(str(save_space(me.space, args.save)))
    return paths, outputs, [me.certificate], {}


def _cmd_tower_build(args):
    path = _exactly(args.space, 1, "--space")[0]
    tower = tower_build(load_space(path))
    outputs = []
    if args.save:
        outputs.append(str(save_tower(tower, args.save)))
    return [path], outputs, [], {}


def _new_link_certificates(tower, first_new: int) -> list:
    certs = []
    for rec in tower.provenance[first_new:]:
        if "link_certificate" in rec:
            certs.append(Certificate.from_dict(rec["link_certificate"]))
    return certs


def _cmd_tower_extend(args):
    tower_path = _exactly(args.tower, 1, "--tower")[0]
    map_paths = _need(args.map, "--map")
    tower = load_tower(tower_path)
    fam = [load_map(p) for p in map_paths]
    nets = NetParams(eps=args.eps if args.eps is not None else 0.1,
                     step=args.step if args.step is not None else 0.5)
    before = len(tower.stages)
    grown = tower_extend(tower, fam, nets)
    outputs = []
    if args.save:
        outputs.append(str(save_tower(grown, args.save)))
    certs = _new_link_certificates(grown, before)
    return [tower_path] + map_paths, outputs, certs, {}


def _cmd_tower_aud(args):
    tower_path = _exactly(args.tower, 1, "--tower")[0]
    map_path = _exactly(args.map, 1, "--map")[0]
    tower = load_tower(tower_path)
    g = load_map(map_path)
    res = aud_extend(tower, g, locate_stage(tower, args.stage),
                     _need(args.eps, "--eps"), tol=args.tol or 1e-6)
    outputs = []
    if args.save:
        outputs.append(str(save_tower(res.tower, args.save)))
    certs = [res.certificate, res.isometry_certificate]
    return [tower_path, map_path], outputs, certs, {"stage": res.stage}


def _cmd_tower_helpful(args):
    tower_path = _exactly(args.tower, 1, "--tower")[0]
    map_path = _exactly(args.map, 1, "--map")[0]
    tower = load_tower(tower_path)
    f = load_map(map_path)
    res = helpful_extend(tower, f, _need(args.eps, "--eps"),
                         locate_stage(tower, args.stage),
                         tol=args.tol or 1e-6)
    outputs = []
    if args.save:
        outputs.append(str(save_tower(res.tower, args.save)))
    return [tower_path, map_path], outputs, [res.certificate], {}


def _cmd_tower_local(args):
    tower_path = _exactly(args.tower, 1, "--tower")[0]
    map_paths = _exactly(args.map, 2, "--map")
    tower = load_tower(tower_path)
    small, incl = load_map(map_paths[0]), load_map(map_paths[1])
    res = local_extend(tower, small, incl,
                       eps=args.eps if args.eps is not None else 0.1,
                       tol=args.tol or 1e-6)
    outputs = []
    if args.save:
        outputs.append(str(save_tower(res.tower, args.save)))
    return [tower_path] + map_paths, outputs, [res.certificate], {}


def _cmd_match(args):
    tower_paths = _exactly(args.tower, 2, "--tower")
    map_path = _exactly(args.map, 1, "--map")[0]
    tu, tv = load_tower(tower_paths[0]), load_tower(tower_paths[1])
    f = load_map(map_path)
    res = back_and_forth(
        tu, tv, f,
        eps=_need(args.eps, "--eps"),
        lam=_need(args.lam, "--lambda"),
        rounds=_need(args.steps, "--steps"),
        X_loc=locate_stage(tu, args.stage),
        tol=args.tol or 1e-6,
    )
    outputs = []
    if args.save:
        base = Path(args.save)
        outputs.append(str(save_tower(
            res.tower_u, base.with_suffix(".u.json"),
            ledgers=res.ledger.steps)))
        outputs.append(str(save_tower(
            res.tower_v, base.with_suffix(".v.json"))))
    certs = _ledger_certificates(res.ledger)
    return tower_paths + [map_path], outputs, certs, {}


def _cmd_optower_build(args):
    paths = _need(args.space, "--space")
    if len(paths) not in (1, 2):
        raise UsageError("optower build takes --space target [--space seed]")
    target = load_space(paths[0])
    seed = load_space(paths[1]) if len(paths) == 2 else None
    seed_op = None
    if args.map:
        op_path = _exactly(args.map, 1, "--map")[0]
        seed_op = load_map(op_path)
        paths = paths + [op_path]
    ot = optower_build(target, seed=seed, seed_op=seed_op)
    outputs = []
    if args.save:
        outputs.append(str(save_optower(ot, args.save)))
    return paths, outputs, [], {}


def _cmd_optower_lift(args):
    ot_path = _need(args.optower, "--optower")
    map_path = _exactly(args.map, 1, "--map")[0]
    chain_paths = _need(args.space, "--space")
    ot = load_optower(ot_path)
    s = load_map(map_path)
    chain = [load_space(p) for p in chain_paths]
    res = optower_lift(ot, s, chain, rounds=_need(args.steps, "--steps"),
                       tol=args.tol or 1e-6)
    outputs = []
    if args.save:
        outputs.append(str(save_optower(res.optower, args.save)))
    certs = _ledger_certificates(res.ledger)
    return [ot_path, map_path] + chain_paths, outputs, certs, {}


def _cmd_optower_kernel(args):
    ot_path = _need(args.optower, "--optower")
    map_paths = _exactly(args.map, 2, "--map")
    ot = load_optower(ot_path)
    incl, e = load_map(map_paths[0]), load_map(map_paths[1])
    res = kernel_extend(ot, incl, e, delta=_need(args.eps, "--eps"),
                        tol=args.tol or 1e-6)
    outputs = []
    if args.save:
        outputs.append(str(save_optower(res.optower, args.save)))
    return [ot_path] + map_paths, outputs, [res.certificate], {}


def _cmd_haydon(args):
    p = _parse_exponent(_need(args.p, "--p"))
    phi = _parse_vector(_need(args.phi, "--phi"))
    psi = _parse_vector(_need(args.psi, "--psi"))
    family = HaydonFamily(p, phi)
    mu = args.mu
    if mu is None:
        mu = haydon_separation_threshold(family, psi)
        if not np.isfinite(mu):
            raise UsageError("phi and psi do not separate: no finite mu")
    cert = haydon_separation_check(family, psi, mu, tol=args.tol or 1e-9)
    return [], [], [cert], {"mu": float(mu)}


def _catalog_cache_path(p, params: CatalogParams) -> Path | None:
    root = os.environ.get("PGL_CACHE")
    if not root:
        return None
    key = canonical_json({
        "p": list(p), "max_dim": params.max_dim,
        "max_generators": params.max_generators,
        "denominator_bound": params.denominator_bound,
        "coefficient_bound": params.coefficient_bound,
    })
    import hashlib
    digest = hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]
    return Path(root) / f"catalog-{digest}.json"


def _cmd_catalog(args):
    p = _parse_exponent(_need(args.p, "--p"))
    params = CatalogParams(
        max_dim=args.max_dim, max_generators=args.max_generators,
        denominator_bound=args.denominator_bound,
        coefficient_bound=args.coefficient_bound,
    )
    cache = _catalog_cache_path(p, params)
    outputs = []
    if cache is not None and cache.exists():
        doc = json.loads(cache.read_text(encoding="utf-8"))
        count = len(doc["spaces"])
        outputs.append(str(cache))
    else:
        spaces = enumerate_rational_spaces(p, params)
        count = len(spaces)
        doc = {
            "p": list(p),
            "params": {
                "max_dim": params.max_dim,
                "max_generators": params.max_generators,
                "denominator_bound": params.denominator_bound,
                "coefficient_bound": params.coefficient_bound,
            },
            "spaces": [space_to_dict(s) for s in spaces],
        }
        if cache is not None:
            outputs.append(str(write_canonical(doc, cache)))
    if args.save:
        outputs.append(str(write_canonical(doc, args.save)))
    return [], outputs, [], {"count": count}


def _cmd_replay(args):
    path = _need(args.report, "--report")
    raw = Path(path).read_text(encoding="utf-8")
    report = json.loads(raw)
    result = replay_report(report)
    byte_identical = canonical_json(report) == raw
    meta = make_certificate(
        "inequality_ledger",
        {"report": str(path)},
        {"rows": [
            eq_row("verdict_matches",
                   1.0 if result["matches"] else 0.0, 1.0),
            eq_row("byte_identical",
                   1.0 if byte_identical else 0.0, 1.0),
        ],
            "inconclusive": False,
            "replayed_verdict": result["verdict"],
            "stored_verdict": report.get("verdict"),
        },
    )
    return [path], [], [meta], {"replayed_verdict": result["verdict"]}


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------

def _render_text(report: dict) -> str:
    lines = [f"command: {report['command']}",
             f"verdict: {report['verdict']}"]
    for entry in report["inputs"]:
        lines.append(f"input: {entry['path']} sha256={entry['sha256'][:16]}")
    for out in report["outputs"]:
        lines.append(f"output: {out}")
    for idx, cert in enumerate(report["certificates"]):
        lines.append(f"certificate[{idx}] kind={cert['kind']} "
                     f"verdict={cert['verdict']}")
        rows = cert.get("evidence", {}).get("rows", [])
        if rows:
            lines.append(f"  {'row':<28} {'lhs':>16} {'rhs':>16} "
                         f"{'tol':>10}")
            for row in rows:
                lines.append(
                    f"  {row['name']:<28} {row['lhs']:>16.9g} "
                    f"{row['rhs']:>16.9g} {row.get('tol', 0.0):>10.3g}")
    return "\n".join(lines) + "\n"


def _emit(report: dict, args) -> int:
    text = canonical_json(report)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
    if (args.format or "json") == "text":
        sys.stdout.write(_render_text(report))
    else:
        sys.stdout.write(text)
    return exit_code_for(report["verdict"])


_HANDLERS = {
    "norm": _cmd_norm,
    "certify": _cmd_certify,
    "sum": _cmd_sum,
    "quotient": _cmd_quotient,
    "pushout": _cmd_pushout,
    "amalgam": _cmd_amalgam,
    "extend": _cmd_extend,
    "tower/build": _cmd_tower_build,
    "tower/extend": _cmd_tower_extend,
    "tower/aud": _cmd_tower_aud,
    "tower/helpful": _cmd_tower_helpful,
    "tower/local": _cmd_tower_local,
    "match": _cmd_match,
    "optower/build": _cmd_optower_build,
    "optower/lift": _cmd_optower_lift,
    "optower/kernel": _cmd_optower_kernel,
    "haydon": _cmd_haydon,
    "catalog": _cmd_catalog,
    "replay": _cmd_replay,
}


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--space", action="append", default=[])
    parser.add_argument("--map", action="append", default=[])
    parser.add_argument("--tower", action="append", default=[])
    parser.add_argument("--optower")
    parser.add_argument("--report")
    parser.add_argument("--vector")
    parser.add_argument("--kernel")
    parser.add_argument("--phi")
    parser.add_argument("--psi")
    parser.add_argument("--p")
    parser.add_argument("--mu", type=float)
    parser.add_argument("--eps", type=float)
    parser.add_argument("--eta", type=float)
    parser.add_argument("--lambda", dest="lam", type=float)
    parser.add_argument("--steps", type=int)
    parser.add_argument("--step", type=float)
    parser.add_argument("--stage", type=int, default=0)
    parser.add_argument("--tol", type=float)
    parser.add_argument("--budget", type=int)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--strict", action="store_true")
    parser.add_argument("--max-dim", type=int, default=1)
    parser.add_argument("--max-generators", type=int, default=1)
    parser.add_argument("--denominator-bound", type=int, default=1)
    parser.add_argument("--coefficient-bound", type=int, default=1)
    parser.add_argument("--out")
    parser.add_argument("--save")
    parser.add_argument("--format", choices=["json", "text"],
                        default="json")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pgl",
        description="certified computations with finitely generated "
                    "p-normed spaces",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("norm", "certify", "sum", "quotient", "pushout",
                 "amalgam", "extend", "match", "haydon", "catalog",
                 "replay"):
        _add_common(sub.add_parser(name))
    tower = sub.add_parser("tower")
    tower_sub = tower.add_subparsers(dest="action", required=True)
    for name in ("build", "extend", "aud", "helpful", "local"):
        _add_common(tower_sub.add_parser(name))
    optower = sub.add_parser("optower")
    optower_sub = optower.add_subparsers(dest="action", required=True)
    for name in ("build", "lift", "kernel"):
        _add_common(optower_sub.add_parser(name))
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else EXIT_USAGE

    key = args.command
    if getattr(args, "action", None):
        key = f"{args.command}/{args.action}"
        command_name = f"{args.command} {args.action}"
    else:
        command_name = args.command

    try:
        inputs, outputs, certs, extra = _HANDLERS[key](args)
        report = build_report(command_name, inputs, outputs, certs)
        if extra:
            report["details"] = round_floats(to_jsonable(extra))
        return _emit(report, args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CertificationError, CatalogTooCoarseError) as exc:
        print(f"certification failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (OSError, ValueError, KeyError, json.JSONDecodeError,
            PglError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
