"""Exact algebra of generalized polynomials in a shifted variable.

A :class:`GenPoly` represents

    Sum_k c_k * u**(k + sigma),   u = s + kappa0,

a polynomial in u times a common real power u**sigma.  Every profile
function in this package lives in this ring: the volume polynomial V is an
ordinary polynomial (sigma = 0), the integrand defining the metric
coefficient alpha carries sigma = m - 2, and its antiderivative carries
sigma = m - 1 plus an additive constant.  Products, derivatives and
antiderivatives are closed-form and exact up to float rounding, so no
quadrature is ever needed on the construction path.

:class:`RationalPoly` is the exact-rational sibling used for the sign
obstruction integrals, where the verdict is a strict inequality and float
thresholding would be unacceptable.  Its arithmetic is pure
``fractions.Fraction``; nothing is ever rounded.

``integral_quad`` is an adaptive-quadrature evaluator kept as an
independent cross-check oracle for tests.  It is deliberately not used by
any construction code.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np
from scipy import integrate

from . import _kernels

Scalar = Union[int, float]


def _trim(coeffs: Iterable[float]) -> tuple[float, ...]:
    out = list(float(c) for c in coeffs)
    while out and out[-1] == 0.0:
        out.pop()
    return tuple(out)


@dataclass(frozen=True)
class GenPoly:
    """Sum_k coeffs[k] * (s + kappa0)**(k + sigma).

    The zero element has empty ``coeffs``.  Evaluation assumes
    s + kappa0 > 0 whenever ``sigma`` is not a nonnegative integer.
    """

    coeffs: tuple[float, ...]
    sigma: float = 0.0
    kappa0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _trim(self.coeffs))
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "kappa0", float(self.kappa0))
        if self.kappa0 < 0.0:
            raise ValueError("kappa0 must be nonnegative")

    # ---------------- constructors ----------------

    @staticmethod
    def zero(kappa0: float = 0.0, sigma: float = 0.0) -> "GenPoly":
        return GenPoly((), sigma, kappa0)

    @staticmethod
    def monomial(degree: int, coeff: float = 1.0, *, sigma: float = 0.0,
                 kappa0: float = 0.0) -> "GenPoly":
        return GenPoly((0.0,) * degree + (float(coeff),), sigma, kappa0)

    # ---------------- structure ----------------

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        """Largest k with coeffs[k] != 0 (-1 for the zero element)."""
        return len(self.coeffs) - 1

    def normalized(self) -> "GenPoly":
        """Canonical form: leading zero coefficients folded into sigma."""
        c = list(self.coeffs)
        sigma = self.sigma
        while c and c[0] == 0.0:
            c.pop(0)
            sigma += 1.0
        return GenPoly(tuple(c), sigma, self.kappa0)

    def approx_equal(self, other: "GenPoly", rel: float = 1e-12) -> bool:
        a, b = self.normalized(), other.normalized()
        if a.is_zero and b.is_zero:
            return True
        if a.kappa0 != b.kappa0 or len(a.coeffs) != len(b.coeffs):
            return False
        if abs(a.sigma - b.sigma) > 1e-9 * (1.0 + abs(a.sigma)):
            return False
        scale = max(abs(c) for c in a.coeffs + b.coeffs)
        return all(abs(x - y) <= rel * scale
                   for x, y in zip(a.coeffs, b.coeffs))

    # ---------------- ring operations ----------------

    def _check_compatible(self, other: "GenPoly", op: str) -> None:
        if self.kappa0 != other.kappa0:
            raise ValueError(f"{op}: mismatched kappa0 "
                             f"({self.kappa0} vs {other.kappa0})")

    def __add__(self, other: "GenPoly") -> "GenPoly":
        self._check_compatible(other, "add")
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        if self.sigma != other.sigma:
            raise ValueError("add: mismatched sigma")
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [0.0] * (n - len(self.coeffs))
        b = list(other.coeffs) + [0.0] * (n - len(other.coeffs))
        return GenPoly(tuple(x + y for x, y in zip(a, b)),
                       self.sigma, self.kappa0)

    def __neg__(self) -> "GenPoly":
        return GenPoly(tuple(-c for c in self.coeffs), self.sigma, self.kappa0)

    def __sub__(self, other: "GenPoly") -> "GenPoly":
        return self + (-other)

    def __mul__(self, other: Union["GenPoly", Scalar]) -> "GenPoly":
        if isinstance(other, (int, float)):
            return GenPoly(tuple(c * other for c in self.coeffs),
                           self.sigma, self.kappa0)
        self._check_compatible(other, "mul")
        if self.is_zero or other.is_zero:
            return GenPoly.zero(self.kappa0, self.sigma + other.sigma)
        out = [0.0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, ca in enumerate(self.coeffs):
            if ca == 0.0:
                continue
            for j, cb in enumerate(other.coeffs):
                out[i + j] += ca * cb
        return GenPoly(tuple(out), self.sigma + other.sigma, self.kappa0)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "GenPoly":
        if n < 0:
            raise ValueError("negative powers are not representable")
        out = GenPoly((1.0,), 0.0, self.kappa0)
        for _ in range(n):
            out = out * self
        return out

    # ---------------- calculus ----------------

    def derivative(self) -> "GenPoly":
        """Termwise: c_k u^(k+sigma) -> c_k (k+sigma) u^(k+sigma-1)."""
        coeffs = tuple(c * (k + self.sigma)
                       for k, c in enumerate(self.coeffs))
        return GenPoly(coeffs, self.sigma - 1.0, self.kappa0)

    def antiderivative_from(self, s_lo: float) -> "GenPolyWithConst":
        """The unique antiderivative F with F(s_lo) = 0.

        Termwise power rule; raises if some exponent k + sigma equals -1,
        which cannot occur for the metric integrands (all exponents there
        are k + m - 2 with m > 1).
        """
        for k in range(len(self.coeffs)):
            if self.coeffs[k] != 0.0 and abs(k + self.sigma + 1.0) < 1e-12:
                raise ValueError("antiderivative: exponent -1 encountered")
        shifted = (0.0,) + tuple(c / (k + self.sigma + 1.0)
                                 for k, c in enumerate(self.coeffs))
        poly = GenPoly(shifted, self.sigma, self.kappa0)
        return GenPolyWithConst(poly, -poly(s_lo))

    # ---------------- evaluation ----------------

    def __call__(self, s):
        arr = np.asarray(self.coeffs, dtype=np.float64)
        if np.isscalar(s) or np.ndim(s) == 0:
            return _kernels.eval_sum_scalar(arr, self.sigma, self.kappa0,
                                            float(s))
        pts = np.ascontiguousarray(s, dtype=np.float64)
        return _kernels.eval_sum(arr, self.sigma, self.kappa0, pts)

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        terms = " + ".join(f"{c:g}*u^({k}+{self.sigma:g})"
                           for k, c in enumerate(self.coeffs) if c != 0.0)
        return f"{terms}, u = s+{self.kappa0:g}"


@dataclass(frozen=True)
class GenPolyWithConst:
    """A GenPoly plus an additive constant (antiderivatives need one when
    sigma is not an integer, since a constant is not a u-power term)."""

    poly: GenPoly
    constant: float

    def __call__(self, s):
        return self.poly(s) + self.constant

    def derivative(self) -> GenPoly:
        return self.poly.derivative()

    @property
    def kappa0(self) -> float:
        return self.poly.kappa0


# ---------------------------------------------------------------------------
# Exact rational polynomials in a plain variable x.
# ---------------------------------------------------------------------------

RationalLike = Union[int, Fraction]


class RationalPoly:
    """Polynomial with exact Fraction coefficients, index = degree.

    Supports +, *, integer powers and exact definite integration.  Used for
    the obstruction integrals whose strict sign is the whole point.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[RationalLike]):
        c = [Fraction(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    @staticmethod
    def constant(value: RationalLike) -> "RationalPoly":
        return RationalPoly([Fraction(value)])

    @staticmethod
    def linear(const: RationalLike, slope: RationalLike) -> "RationalPoly":
        """const + slope*x."""
        return RationalPoly([Fraction(const), Fraction(slope)])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other: "RationalPoly") -> "RationalPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [Fraction(0)] * (n - len(self.coeffs))
        b = list(other.coeffs) + [Fraction(0)] * (n - len(other.coeffs))
        return RationalPoly([x + y for x, y in zip(a, b)])

    def __mul__(self, other: Union["RationalPoly", RationalLike]):
        if isinstance(other, (int, Fraction)):
            return RationalPoly([c * other for c in self.coeffs])
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1 or 1)
        for i, ca in enumerate(self.coeffs):
            for j, cb in enumerate(other.coeffs):
                out[i + j] += ca * cb
        return RationalPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "RationalPoly":
        out = RationalPoly([Fraction(1)])
        for _ in range(n):
            out = out * self
        return out

    def __call__(self, x: RationalLike) -> Fraction:
        x = Fraction(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def integrate(self, lo: RationalLike, hi: RationalLike) -> Fraction:
        """Exact definite integral by the termwise power rule."""
        lo, hi = Fraction(lo), Fraction(hi)
        total = Fraction(0)
        for k, c in enumerate(self.coeffs):
            total += c * (hi ** (k + 1) - lo ** (k + 1)) / (k + 1)
        return total

    def to_floats(self) -> tuple[float, ...]:
        return tuple(float(c) for c in self.coeffs)

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        return " + ".join(f"({c})*x^{k}" for k, c in enumerate(self.coeffs)
                          if c != 0)


# ---------------------------------------------------------------------------
# Quadrature oracle (tests only).
# ---------------------------------------------------------------------------

def integral_quad(f, lo: float, hi: float, *, epsrel: float = 1e-12,
                  limit: int = 200) -> float:
    """Adaptive-quadrature definite integral of a callable or GenPoly.

    Cross-check oracle: a second, independent evaluation route for objects
    whose main-path integrals are computed in closed form.
    """
    if isinstance(f, (GenPoly, GenPolyWithConst)):
        g = f
        f = lambda x: g(x)  # noqa: E731
    value, _ = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=epsrel,
                              limit=limit)
    return value
