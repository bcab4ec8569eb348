"""Bundle input data: Fano factors, case selection, sign vectors, validation.

The discrete input of every construction is a list of Fano Kaehler-Einstein
factors, each carrying a complex dimension ``n``, a Chern constant ``p > 0``
and a nonzero Euler-class coefficient ``q``, together with a case tag
(steady / expanding / shrinking).  The first factor is a normalized complex
projective space (|q| = 1, p = n + 1); compact shrinking constructions
require the same normalization of the last factor.

``validate_bundle`` checks every hypothesis the constructions rely on and
reports them individually, so a caller can see exactly which inequality
ruled a case out.  ``enumerate_chi`` lists the sign assignments the compact
construction searches over; the end signs are pinned to +1 / -1 because the
admissibility integral is invariant under that normalization.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from pathlib import Path
from typing import Optional, Sequence, Union

from .errors import InputError


class Case(str, Enum):
    STEADY = "steady"
    EXPANDING = "expanding"
    SHRINKING = "shrinking"


#: Sign of the constant term in the governing equation for each case.
EPSILON = {Case.STEADY: 0.0, Case.EXPANDING: 1.0, Case.SHRINKING: -1.0}


@dataclass(frozen=True)
class FanoFactor:
    """One base factor: complex dimension n, Chern constant p, Euler
    coefficient q.  n = 0 (a point) is legal only at the ends of the list;
    :class:`BundleSpec` enforces that placement rule."""

    n: int
    p: int
    q: int

    def __post_init__(self):
        if self.n < 0:
            raise InputError(f"factor dimension must be >= 0, got {self.n}")
        if self.p <= 0:
            raise InputError(f"Chern constant must be positive, got {self.p}")
        if self.q == 0:
            raise InputError("Euler coefficient q must be nonzero")


@dataclass(frozen=True)
class BundleSpec:
    """Ordered factor list plus the case tag."""

    factors: tuple[FanoFactor, ...]
    case: Case

    def __post_init__(self):
        if not self.factors:
            raise InputError("factor list must be nonempty")
        object.__setattr__(self, "factors", tuple(self.factors))
        object.__setattr__(self, "case", Case(self.case))
        for i, f in enumerate(self.factors):
            interior = 0 < i < len(self.factors) - 1
            if interior and f.n == 0:
                raise InputError(
                    f"zero-dimensional factor at interior position {i + 1}; "
                    "points are allowed only as end factors")

    @property
    def r(self) -> int:
        return len(self.factors)

    @property
    def n1(self) -> int:
        return self.factors[0].n

    @property
    def nr(self) -> int:
        return self.factors[-1].n

    @property
    def dim_sum(self) -> int:
        """Sum of the complex dimensions n_i."""
        return sum(f.n for f in self.factors)


@dataclass(frozen=True)
class ChiVector:
    """Sign assignment, one sign per factor, ends pinned to +1 and -1."""

    signs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "signs", tuple(int(s) for s in self.signs))
        if any(s not in (1, -1) for s in self.signs):
            raise InputError("chi entries must be +1 or -1")
        if len(self.signs) < 2:
            raise InputError("chi needs at least two entries")
        if self.signs[0] != 1 or self.signs[-1] != -1:
            raise InputError("chi must start with +1 and end with -1")

    def __iter__(self):
        return iter(self.signs)

    def __getitem__(self, i: int) -> int:
        return self.signs[i]

    def __len__(self) -> int:
        return len(self.signs)


@dataclass(frozen=True)
class ValidationCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of every hypothesis check plus per-case admissibility."""

    case: Case
    m: float
    checks: tuple[ValidationCheck, ...]
    admissible: dict[str, bool] = field(default_factory=dict)

    @property
    def admissible_for_case(self) -> bool:
        return self.admissible[self.case.value]

    def to_dict(self) -> dict:
        return {
            "case": self.case.value,
            "m": self.m,
            "checks": [{"name": c.name, "passed": c.passed,
                        "detail": c.detail} for c in self.checks],
            "admissible": dict(self.admissible),
        }


def validate_bundle(spec: BundleSpec, m: float) -> ValidationReport:
    """Check every construction hypothesis for ``spec`` at parameter ``m``.

    Raises on structurally unusable inputs (m <= 1 or infinite m); all
    geometric hypotheses are reported pass/fail rather than raised, and the
    report carries one admissibility flag per case.
    """
    if not isinstance(m, (int, float)) or math.isnan(m):
        raise InputError("m must be a real number")
    if math.isinf(m):
        raise InputError(
            "m = infinity selects the gradient Ricci soliton limit, which "
            "this package does not construct; use a finite m > 1")
    if m <= 1.0:
        raise InputError(f"m must exceed 1, got {m}")

    checks: list[ValidationCheck] = []
    f = spec.factors
    n1, nr, r = spec.n1, spec.nr, spec.r

    checks.append(ValidationCheck(
        "factor_count", r >= 3, f"r = {r}, need r >= 3"))

    first_ok = abs(f[0].q) == 1 and f[0].p == f[0].n + 1
    checks.append(ValidationCheck(
        "first_factor_normalized", first_ok,
        f"|q1| = {abs(f[0].q)} (need 1), p1 = {f[0].p} (need n1+1 = {n1 + 1})"))

    last_ok = abs(f[-1].q) == 1 and f[-1].p == f[-1].n + 1
    checks.append(ValidationCheck(
        "last_factor_normalized", last_ok,
        f"|qr| = {abs(f[-1].q)} (need 1), pr = {f[-1].p} "
        f"(need nr+1 = {nr + 1}); required for the shrinking case only"))

    steady_bad = [i + 1 for i in range(1, r)
                  if (n1 + 1) * abs(f[i].q) >= f[i].p]
    checks.append(ValidationCheck(
        "steady_strict_inequality", not steady_bad,
        "(n1+1)|q_i| < p_i for 2 <= i <= r"
        + (f"; fails at factors {steady_bad}" if steady_bad else "")))

    le_all = all((n1 + 1) * abs(f[i].q) <= f[i].p for i in range(1, r))
    gt_all = all((n1 + 1) * abs(f[i].q) > f[i].p for i in range(1, r))
    regime = "uniform_le" if le_all else ("uniform_gt" if gt_all else "mixed")
    checks.append(ValidationCheck(
        "expanding_nonstrict_inequality", le_all,
        f"(n1+1)|q_i| <= p_i for all i >= 2: {le_all}; regime = {regime} "
        "(the opposite regime admits its own parameter window)"))

    shrink_bad = [i + 1 for i in range(1, r - 1)
                  if (n1 + 1) * abs(f[i].q) >= f[i].p
                  or (nr + 1) * abs(f[i].q) >= f[i].p]
    checks.append(ValidationCheck(
        "shrinking_end_inequalities", not shrink_bad,
        "|q_i|(n1+1) < p_i and |q_i|(nr+1) < p_i for interior factors"
        + (f"; fails at factors {shrink_bad}" if shrink_bad else "")))

    by_name = {c.name: c.passed for c in checks}
    admissible = {
        Case.STEADY.value: (by_name["factor_count"]
                            and by_name["first_factor_normalized"]
                            and by_name["steady_strict_inequality"]),
        # A one-parameter expanding family exists for any structurally valid
        # data: small e_star always gives positive profile coefficients.
        Case.EXPANDING.value: (by_name["factor_count"]
                               and by_name["first_factor_normalized"]),
        Case.SHRINKING.value: (by_name["factor_count"]
                               and by_name["first_factor_normalized"]
                               and by_name["last_factor_normalized"]
                               and by_name["shrinking_end_inequalities"]),
    }
    return ValidationReport(spec.case, float(m), tuple(checks), admissible)


def enumerate_chi(spec: BundleSpec) -> list[ChiVector]:
    """All sign vectors with the ends pinned, interior signs free.

    Exactly 2**(r-2) vectors, in lexicographic order with +1 before -1.
    """
    out = []
    for interior in product((1, -1), repeat=max(spec.r - 2, 0)):
        out.append(ChiVector((1,) + interior + (-1,)))
    return out


# ---------------------------------------------------------------------------
# JSON document format.
#
#   {
#     "case": "steady" | "expanding" | "shrinking",
#     "m": 2.0,
#     "factors": [{"n": 0, "p": 1, "q": 1}, ...],
#     "chi": [1, 1, -1, -1]          # optional
#   }
#
# Unknown keys are rejected so that typos fail loudly.
# ---------------------------------------------------------------------------

_TOP_KEYS = {"case", "m", "factors", "chi"}
_FACTOR_KEYS = {"n", "p", "q"}


@dataclass(frozen=True)
class BundleInput:
    """A parsed bundle document: the spec plus m and an optional chi."""

    spec: BundleSpec
    m: float
    chi: Optional[ChiVector] = None


def bundle_from_dict(doc: dict) -> BundleInput:
    if not isinstance(doc, dict):
        raise InputError("bundle document must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise InputError(f"unknown keys in bundle document: {sorted(unknown)}")
    for key in ("case", "m", "factors"):
        if key not in doc:
            raise InputError(f"bundle document missing key {key!r}")
    try:
        case = Case(doc["case"])
    except ValueError:
        raise InputError(f"unknown case {doc['case']!r}") from None
    factors = []
    for k, entry in enumerate(doc["factors"]):
        if not isinstance(entry, dict):
            raise InputError(f"factor {k + 1} must be an object")
        bad = set(entry) - _FACTOR_KEYS
        if bad:
            raise InputError(f"unknown keys in factor {k + 1}: {sorted(bad)}")
        missing = _FACTOR_KEYS - set(entry)
        if missing:
            raise InputError(f"factor {k + 1} missing {sorted(missing)}")
        for key in _FACTOR_KEYS:
            if not isinstance(entry[key], int) or isinstance(entry[key], bool):
                raise InputError(f"factor {k + 1} field {key!r} must be an "
                                 "integer")
        factors.append(FanoFactor(entry["n"], entry["p"], entry["q"]))
    m = doc["m"]
    if not isinstance(m, (int, float)) or isinstance(m, bool):
        raise InputError("m must be a number")
    chi = None
    if "chi" in doc and doc["chi"] is not None:
        signs = doc["chi"]
        if not isinstance(signs, list):
            raise InputError("chi must be a list of +1/-1")
        if len(signs) != len(factors):
            raise InputError("chi length must match the factor count")
        chi = ChiVector(tuple(signs))
    return BundleInput(BundleSpec(tuple(factors), case), float(m), chi)


def bundle_to_dict(inp: BundleInput) -> dict:
    doc = {
        "case": inp.spec.case.value,
        "m": inp.m,
        "factors": [{"n": f.n, "p": f.p, "q": f.q}
                    for f in inp.spec.factors],
    }
    if inp.chi is not None:
        doc["chi"] = list(inp.chi.signs)
    return doc


def load_bundle_json(path: Union[str, Path]) -> BundleInput:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read bundle file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"bundle file is not valid JSON: {exc}") from exc
    return bundle_from_dict(doc)


def dump_bundle_json(inp: BundleInput, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(bundle_to_dict(inp), fh, indent=2, sort_keys=True)
        fh.write("\n")
