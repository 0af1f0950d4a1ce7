"""Verification cases and the JSON suite report."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from importlib import resources

from .mc import McEstimate, combined_stderr

# relative floor added to Monte Carlo tolerances; covers rounding when an
# importance sampler happens to be exact and the measured stderr is zero
ROUNDING_RTOL = 1e-10


def _complex_pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


@dataclass(frozen=True)
class Case:
    name: str
    lhs: complex
    rhs: complex
    stderr: float
    residual: float
    tolerance: float
    passed: bool
    skipped_fraction: float = 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lhs"] = _complex_pair(self.lhs)
        d["rhs"] = _complex_pair(self.rhs)
        d["pass"] = d.pop("passed")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Case":
        return cls(
            name=d["name"],
            lhs=complex(*d["lhs"]),
            rhs=complex(*d["rhs"]),
            stderr=float(d["stderr"]),
            residual=float(d["residual"]),
            tolerance=float(d["tolerance"]),
            passed=bool(d["pass"]),
            skipped_fraction=float(d["skipped_fraction"]),
        )


def _value(x) -> complex:
    return x.value if isinstance(x, McEstimate) else complex(x)


def _skipped(*xs) -> float:
    return max((x.skipped_fraction for x in xs if isinstance(x, McEstimate)), default=0.0)


def mc_case(name: str, lhs, rhs, sigmas: float = 3.0) -> Case:
    """Compare estimates (or exact values) at ``sigmas`` combined standard errors."""
    a, b = _value(lhs), _value(rhs)
    err = combined_stderr(*(x for x in (lhs, rhs) if isinstance(x, McEstimate)))
    residual = abs(a - b)
    tol = sigmas * err + ROUNDING_RTOL * max(abs(a), abs(b))
    return Case(name, a, b, err, residual, tol, residual <= tol, _skipped(lhs, rhs))


def exact_case(name: str, lhs, rhs, rtol: float = 0.0, atol: float = 0.0) -> Case:
    """Compare closed-form values at ``atol + rtol * max(|lhs|, |rhs|)``."""
    a, b = complex(lhs), complex(rhs)
    residual = abs(a - b)
    tol = atol + rtol * max(abs(a), abs(b))
    return Case(name, a, b, 0.0, residual, tol, residual <= tol)


def flag_case(name: str, ok: bool) -> Case:
    """A yes/no check recorded in case form (residual 0 or 1, tolerance 0)."""
    return Case(name, complex(ok), 1 + 0j, 0.0, 0.0 if ok else 1.0, 0.0, bool(ok))


@dataclass
class SuiteReport:
    suite: str
    cases: list[Case] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    def to_dict(self) -> dict:
        return {"suite": self.suite, "cases": [c.to_dict() for c in self.cases], "meta": dict(self.meta)}

    @classmethod
    def from_dict(cls, d: dict) -> "SuiteReport":
        return cls(d["suite"], [Case.from_dict(c) for c in d["cases"]], dict(d["meta"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SuiteReport":
        return cls.from_dict(json.loads(text))


def report_schema() -> dict:
    """The published JSON schema of :class:`SuiteReport`."""
    text = resources.files("compcos").joinpath("data/report.schema.json").read_text()
    return json.loads(text)
