"""Exact evaluation of the sign obstruction integrals.

The compact shrinking construction exists exactly when a sign vector chi
makes a certain polynomial moment integral strictly negative.  That
integral, the related Futaki-type integral (whose vanishing is the
Kaehler-Einstein degeneration), and the two limits of the closing function
F(e_star) that produce the existence bracket are all polynomial moments
with rational data, so they are computed here in exact rational arithmetic.
Only the sign is contractual; positive constant prefactors dropped in the
asymptotic analysis are omitted from the returned values.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .bundle import BundleSpec, ChiVector, enumerate_chi
from .genpoly import RationalPoly


@dataclass(frozen=True)
class ObstructionResult:
    """Exact value and sign of one obstruction integral."""

    value: Fraction
    sign: int
    kind: str
    chi: Optional[ChiVector] = None

    def to_dict(self) -> dict:
        d = {"value": f"{self.value.numerator}/{self.value.denominator}",
             "value_float": float(self.value),
             "sign": self.sign, "kind": self.kind}
        if self.chi is not None:
            d["chi"] = list(self.chi.signs)
        return d


def _sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


def sign_parity(spec: BundleSpec, chi: ChiVector) -> int:
    """S = (-1)**(sum of n_i over factors with chi_i = -1)."""
    total = sum(f.n for f, s in zip(spec.factors, chi) if s == -1)
    return -1 if total % 2 else 1


def admissibility_integral(spec: BundleSpec, chi: ChiVector) -> ObstructionResult:
    """Moment integral whose strict negativity admits a shrinking metric.

    Exact value of

        int_{-(n1+1)}^{(nr+1)}  prod_i (chi_i x + p_i/|q_i|)**n_i  * x dx.
    """
    if len(chi) != spec.r:
        raise ValueError("chi length must match the factor count")
    poly = RationalPoly([1])
    for f, s in zip(spec.factors, chi):
        poly = poly * RationalPoly.linear(Fraction(f.p, abs(f.q)), s) ** f.n
    poly = poly * RationalPoly([0, 1])
    value = poly.integrate(-(spec.n1 + 1), spec.nr + 1)
    return ObstructionResult(value, _sign(value), "admissibility", chi)


def futaki_integral(spec: BundleSpec) -> ObstructionResult:
    """Futaki-type integral; zero means the Kaehler-Einstein case.

    Exact value of

        int_{-(n1+1)}^{(nr+1)}  prod_i (p_i/q_i - x)**n_i  * x dx

    with the signed ratios p_i/q_i (no absolute values here).
    """
    poly = RationalPoly([1])
    for f in spec.factors:
        poly = poly * RationalPoly.linear(Fraction(f.p, f.q), -1) ** f.n
    poly = poly * RationalPoly([0, 1])
    value = poly.integrate(-(spec.n1 + 1), spec.nr + 1)
    return ObstructionResult(value, _sign(value), "futaki")


def limit_zero_integral(spec: BundleSpec, m: float, chi: ChiVector) -> float:
    """Limit of the closing function as e_star -> 0, up to a positive factor.

    In the limit the closing integrand degenerates, factor by factor, to

        chi_i = +1:  (x + n1+1)**(2 n_i)        (the coefficient A_i blows up)
        chi_i = -1:  -(4 p_i^2/q_i^2 - (x + n1+1)**2)**n_i
                                                 (A_i -> -q_i^2/(8 p_i))

    over x in [-(n1+1), 2(nr+1) - (n1+1)], against the measure
    (x + n1+1)**m dx.  Collecting the minus signs gives the parity factor
    S; under the end inequalities the remaining integrand is nonnegative,
    so the sign of the returned value is exactly S.

    Substituting z = x + n1 + 1 gives a polynomial times z**m on
    [0, 2(nr+1)], integrated termwise; exact rational arithmetic is used
    when m is an integer, floats otherwise (z**m has no rational
    antiderivative for irrational m).
    """
    if len(chi) != spec.r:
        raise ValueError("chi length must match the factor count")
    if m <= 1:
        raise ValueError("m must exceed 1")
    S = sign_parity(spec, chi)
    poly = RationalPoly([1])
    for f, s in zip(spec.factors, chi):
        if s == 1:
            block = RationalPoly([0, 0, 1]) ** f.n          # z^(2n)
        else:
            block = RationalPoly([Fraction(4 * f.p * f.p, f.q * f.q),
                                  0, -1]) ** f.n            # 4p^2/q^2 - z^2
        poly = poly * block
    hi = 2 * (spec.nr + 1)
    if float(m).is_integer():
        mi = int(m)
        total = Fraction(0)
        for k, c in enumerate(poly.coeffs):
            total += c * Fraction(hi) ** (k + mi + 1) / (k + mi + 1)
        return float(S * total)
    total = 0.0
    for k, c in enumerate(poly.coeffs):
        total += float(c) * float(hi) ** (k + m + 1) / (k + m + 1)
    return S * total


def limit_infinity_scaled(spec: BundleSpec, chi: ChiVector) -> ObstructionResult:
    """Scaled limit of the closing function as e_star -> infinity.

    Equals S times the admissibility integral up to a positive constant
    that is dropped; the sign is the asymptotic sign of the closing
    function.  A sign change against :func:`limit_zero_integral` is what
    guarantees the root bracket for the compact construction.
    """
    S = sign_parity(spec, chi)
    base = admissibility_integral(spec, chi)
    value = S * base.value
    return ObstructionResult(value, _sign(value), "limit_infinity_scaled", chi)


def find_admissible_chi(spec: BundleSpec) -> list[ChiVector]:
    """All sign vectors with strictly negative admissibility integral."""
    return [chi for chi in enumerate_chi(spec)
            if admissibility_integral(spec, chi).value < 0]
