"""Canonical JSON files for spaces, maps, towers, and reports.

Spaces, maps, and towers round-trip bit-exactly: floats are written with
Python's shortest round-trip representation and ``p`` stays an exact integer
pair.  Reports are different: every float inside a report is rounded to 12
significant digits *first*, and certificate verdicts are recomputed from the
rounded numbers, so a stored report replays to its own verdict from its own
bytes.  All writers emit sorted keys and fixed separators, making equal data
byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from .certs import Certificate, FAIL, INCONCLUSIVE, PASS, replay_verdict
from .core import GeneratedSpace
from .maps import LinearMap
from .towers import OperatorTower, Tower

SIG_DIGITS = 12

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3

_EXIT_BY_VERDICT = {PASS: EXIT_PASS, FAIL: EXIT_FAIL,
                    INCONCLUSIVE: EXIT_INCONCLUSIVE}


def exit_code_for(verdict: str) -> int:
    return _EXIT_BY_VERDICT.get(verdict, EXIT_FAIL)


# ---------------------------------------------------------------------------
# canonical encoding
# ---------------------------------------------------------------------------

def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and tuples to JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return obj


def round_sig(x: float, digits: int = SIG_DIGITS) -> float:
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x} cannot enter a report")
    if x == 0.0:
        return 0.0
    return float(f"{x:.{digits}g}") + 0.0


def round_floats(obj, digits: int = SIG_DIGITS):
    """Round every float in a JSON-able structure to significant digits."""
    if isinstance(obj, dict):
        return {k: round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, list):
        return [round_floats(v, digits) for v in obj]
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        return round_sig(obj, digits)
    return obj


def canonical_json(obj) -> str:
    """Deterministic JSON text: sorted keys, compact separators, newline."""
    return json.dumps(to_jsonable(obj), sort_keys=True,
                      separators=(",", ":"), allow_nan=False) + "\n"


def write_canonical(obj, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(canonical_json(obj), encoding="utf-8")
    return path


def sha256_file(path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


# ---------------------------------------------------------------------------
# spaces
# ---------------------------------------------------------------------------

def _parse_entry(value) -> float:
    """Numbers pass through; decimal strings parse exactly via Fraction."""
    if isinstance(value, bool):
        raise ValueError("generator entries must be numbers")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(Fraction(value))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"bad generator entry {value!r}") from exc
    raise ValueError(f"bad generator entry {value!r}")


def space_to_dict(space: GeneratedSpace) -> dict:
    return {
        "p": [space.p.num, space.p.den],
        "dim": space.dim,
        "generators": space.generators.tolist(),
    }


def space_from_dict(d: dict) -> GeneratedSpace:
    if not isinstance(d, dict):
        raise ValueError("space document must be a JSON object")
    try:
        num, den = d["p"]
        dim = d["dim"]
        gens_raw = d["generators"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"space document missing fields: {exc}") from exc
    gens = [[_parse_entry(v) for v in row] for row in gens_raw]
    return GeneratedSpace((int(num), int(den)), int(dim), gens)


def load_space(path) -> GeneratedSpace:
    return space_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def save_space(space: GeneratedSpace, path) -> Path:
    return write_canonical(space_to_dict(space), path)


# ---------------------------------------------------------------------------
# maps
# ---------------------------------------------------------------------------

def map_to_dict(m: LinearMap) -> dict:
    return {
        "domain": space_to_dict(m.domain),
        "codomain": space_to_dict(m.codomain),
        "matrix": np.asarray(m.matrix).tolist(),
    }


def _resolve_space(doc, base_dir: Path | None) -> GeneratedSpace:
    if isinstance(doc, str):
        path = Path(doc)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return load_space(path)
    return space_from_dict(doc)


def _parse_matrix(doc, rows: int, cols: int) -> np.ndarray:
    """Parse a nested entry list into an exact (rows, cols) float matrix."""
    flat = [_parse_entry(v) for row in doc for v in row]
    if len(flat) != rows * cols:
        raise ValueError(
            f"matrix entries do not fill shape ({rows}, {cols})"
        )
    return np.array(flat, dtype=float).reshape(rows, cols)


def map_from_dict(d: dict, base_dir: Path | None = None) -> LinearMap:
    if not isinstance(d, dict):
        raise ValueError("map document must be a JSON object")
    try:
        dom_doc = d["domain"]
        cod_doc = d["codomain"]
        matrix = d["matrix"]
    except KeyError as exc:
        raise ValueError(f"map document missing field {exc}") from exc
    domain = _resolve_space(dom_doc, base_dir)
    codomain = _resolve_space(cod_doc, base_dir)
    return LinearMap(domain, codomain,
                     _parse_matrix(matrix, codomain.dim, domain.dim))


def load_map(path) -> LinearMap:
    path = Path(path)
    return map_from_dict(json.loads(path.read_text(encoding="utf-8")),
                         base_dir=path.parent)


def save_map(m: LinearMap, path) -> Path:
    return write_canonical(map_to_dict(m), path)


# ---------------------------------------------------------------------------
# towers
# ---------------------------------------------------------------------------

def tower_to_dict(tower: Tower, ledgers: list | None = None) -> dict:
    stages = [space_to_dict(s) for s in tower.stages]
    links = [
        {"domain": n, "codomain": n + 1,
         "matrix": np.asarray(link.matrix).tolist()}
        for n, link in enumerate(tower.links)
    ]
    return {
        "stages": stages,
        "links": links,
        "provenance": to_jsonable(list(tower.provenance)),
        "ledgers": to_jsonable(ledgers or []),
    }


def tower_from_dict(d: dict) -> Tower:
    if not isinstance(d, dict):
        raise ValueError("tower document must be a JSON object")
    stages = tuple(space_from_dict(s) for s in d.get("stages", []))
    links = []
    for link_doc in d.get("links", []):
        n, m = int(link_doc["domain"]), int(link_doc["codomain"])
        if m != n + 1 or not 0 <= n < len(stages) - 1:
            raise ValueError("tower links must join consecutive stages")
        links.append(LinearMap(
            stages[n], stages[m],
            _parse_matrix(link_doc["matrix"], stages[m].dim, stages[n].dim)))
    provenance = tuple(dict(rec) for rec in d.get("provenance", []))
    return Tower(stages=stages, links=tuple(links), provenance=provenance)


def load_tower(path) -> Tower:
    return tower_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def save_tower(tower: Tower, path, ledgers: list | None = None) -> Path:
    return write_canonical(tower_to_dict(tower, ledgers=ledgers), path)


# ---------------------------------------------------------------------------
# operator towers
# ---------------------------------------------------------------------------

def optower_to_dict(ot: OperatorTower) -> dict:
    return {
        "base": tower_to_dict(ot.base),
        "target": space_to_dict(ot.target),
        "stage_ops": [np.asarray(op.matrix).tolist()
                      for op in ot.stage_ops],
    }


def optower_from_dict(d: dict) -> OperatorTower:
    if not isinstance(d, dict):
        raise ValueError("operator tower document must be a JSON object")
    base = tower_from_dict(d["base"])
    target = space_from_dict(d["target"])
    ops = tuple(
        LinearMap(stage, target,
                  _parse_matrix(mat, target.dim, stage.dim))
        for stage, mat in zip(base.stages, d.get("stage_ops", []))
    )
    return OperatorTower(base=base, target=target, stage_ops=ops)


def load_optower(path) -> OperatorTower:
    return optower_from_dict(
        json.loads(Path(path).read_text(encoding="utf-8")))


def save_optower(ot: OperatorTower, path) -> Path:
    return write_canonical(optower_to_dict(ot), path)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

def _certificate_dict(cert) -> dict:
    if isinstance(cert, Certificate):
        cert = cert.to_dict()
    rounded = round_floats(to_jsonable(dict(cert)))
    rounded["verdict"] = replay_verdict(
        rounded["kind"], rounded.get("parameters", {}),
        rounded.get("evidence", {}))
    return rounded


def aggregate_verdict(verdicts) -> str:
    verdicts = list(verdicts)
    if any(v == FAIL for v in verdicts):
        return FAIL
    if any(v == INCONCLUSIVE for v in verdicts):
        return INCONCLUSIVE
    return PASS


def build_report(command: str, inputs: list, outputs: list,
                 certificates: list, wall_time: float | None = None) -> dict:
    """Assemble a report whose verdict is recomputable from its own bytes.

    ``inputs`` may hold paths (digested) or prebuilt {"path", "sha256"}
    entries.  Certificates are rounded to report precision and re-judged
    from the rounded evidence, so replaying the written file reproduces
    every verdict exactly.  ``wall_time`` defaults to null because equal
    inputs must yield byte-identical reports.
    """
    digested = []
    for entry in inputs:
        if isinstance(entry, dict):
            digested.append({"path": str(entry["path"]),
                             "sha256": str(entry["sha256"])})
        else:
            digested.append({"path": str(entry),
                             "sha256": sha256_file(entry)})
    digested.sort(key=lambda e: e["path"])
    certs = [_certificate_dict(c) for c in certificates]
    verdict = aggregate_verdict(c["verdict"] for c in certs)
    return {
        "command": command,
        "inputs": digested,
        "outputs": [str(p) for p in outputs],
        "certificates": certs,
        "wall_time": (None if wall_time is None
                      else round_sig(float(wall_time))),
        "verdict": verdict,
    }


def replay_report(report: dict) -> dict:
    """Re-judge every stored certificate from its stored evidence.

    Returns the recomputed per-certificate verdicts, the recomputed
    aggregate, and whether everything matches what the report claims.
    """
    stored = report.get("certificates", [])
    recomputed = [
        replay_verdict(c["kind"], c.get("parameters", {}),
                       c.get("evidence", {}))
        for c in stored
    ]
    verdict = aggregate_verdict(recomputed)
    matches = verdict == report.get("verdict") and all(
        new == c.get("verdict") for new, c in zip(recomputed, stored)
    )
    return {
        "verdict": verdict,
        "certificate_verdicts": recomputed,
        "matches": bool(matches),
    }


def load_report(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
