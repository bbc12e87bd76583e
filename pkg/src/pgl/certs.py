"""Numeric certificates and their replay rules.

A certificate stores the parameters of a claim, the numeric evidence gathered
while checking it, and a verdict.  Verdicts are a pure function of
(kind, parameters, evidence), so a stored certificate can be re-judged from its
own numbers at any time; `replay` does exactly that.
"""

from dataclasses import dataclass, field
from typing import Any

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"

ISOMETRY_KINDS = ("isometry", "eps_isometry", "strict_eps_isometry")


@dataclass
class Certificate:
    kind: str
    parameters: dict[str, Any] = field(default_factory=dict)
    evidence: dict[str, Any] = field(default_factory=dict)
    verdict: str = PASS

    def replay(self) -> str:
        """Recompute the verdict from stored evidence alone."""
        return replay_verdict(self.kind, self.parameters, self.evidence)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "parameters": dict(self.parameters),
            "evidence": dict(self.evidence),
            "verdict": self.verdict,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Certificate":
        return cls(
            kind=d["kind"],
            parameters=dict(d.get("parameters", {})),
            evidence=dict(d.get("evidence", {})),
            verdict=d.get("verdict", PASS),
        )


def _row_violated(row) -> bool:
    """Rows assert lhs <= rhs + tol (or |lhs - rhs| <= tol when eq is set)."""
    lhs, rhs = float(row["lhs"]), float(row["rhs"])
    tol = float(row.get("tol", 0.0))
    if row.get("eq", False):
        return abs(lhs - rhs) > tol
    return lhs > rhs + tol


def replay_verdict(kind: str, parameters: dict, evidence: dict) -> str:
    """Pure verdict rule; used both at construction time and on replay."""
    if kind in ISOMETRY_KINDS:
        eps = float(parameters.get("eps", 0.0))
        tol = float(parameters.get("tol", 0.0))
        strict = kind == "strict_eps_isometry"
        op = float(evidence["op_norm"])
        lo = float(evidence["conorm_lo"])
        hi = float(evidence["conorm_hi"])
        conclusive = bool(evidence.get("conorm_conclusive", True))
        if strict:
            ok_up = op < 1.0 + eps - tol
        else:
            ok_up = op <= 1.0 + eps + tol
        if not ok_up:
            return FAIL
        lower_need = 1.0 - eps + tol if strict else 1.0 - eps - tol
        if lo >= lower_need:
            return PASS
        if hi < 1.0 - eps:
            return FAIL
        return INCONCLUSIVE if not conclusive else FAIL
    if kind == "nonexpansive":
        tol = float(parameters.get("tol", 0.0))
        return PASS if float(evidence["op_norm"]) <= 1.0 + tol else FAIL
    if kind == "norm_equality":
        for row in evidence.get("rows", []):
            if abs(float(row["lhs"]) - float(row["rhs"])) > float(row.get("tol", 0.0)):
                return FAIL
        return PASS
    if kind == "inequality_ledger":
        # The `inconclusive` flag marks a claim whose premises were not
        # established; then a gated row's violation is undecided, not a
        # failure, and even full row success cannot upgrade to a pass.
        undecided = bool(evidence.get("inconclusive", False))
        for row in evidence.get("rows", []):
            if _row_violated(row) and not (undecided and row.get("gated", False)):
                return FAIL
        return INCONCLUSIVE if undecided else PASS
    raise ValueError(f"unknown certificate kind: {kind}")


def make_certificate(kind: str, parameters: dict, evidence: dict) -> Certificate:
    return Certificate(kind, parameters, evidence,
                       replay_verdict(kind, parameters, evidence))


def ineq_row(name: str, lhs: float, rhs: float, tol: float = 0.0,
             gated: bool = False) -> dict:
    """A ledger row asserting lhs <= rhs + tol, with its margin recorded."""
    row = {
        "name": name,
        "lhs": float(lhs),
        "rhs": float(rhs),
        "tol": float(tol),
        "margin": float(rhs) + float(tol) - float(lhs),
    }
    if gated:
        row["gated"] = True
    return row


def eq_row(name: str, lhs: float, rhs: float, tol: float = 0.0) -> dict:
    return {"name": name, "lhs": float(lhs), "rhs": float(rhs),
            "tol": float(tol), "eq": True}
