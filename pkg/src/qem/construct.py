"""Closed-form construction of the metric profiles.

Every profile is determined by a handful of scalars derived from the
consistency conditions of the reduced system:

* ``e_star``    the consistency constant shared by all factors,
                (8 A_i p_i - eps q_i^2) / (8 A_i^2) for every i;
* ``kappa0``    the shift in the linear potential factor phi = kappa1 (s+kappa0),
                tied to e_star by e_star = (kappa0/2)(4(n1+1) - eps*kappa0);
* ``A_i``       the quadratic coefficients of beta_i = A_i u^2 - q_i^2/(4 A_i),
                u = s + kappa0, roots of the same consistency relation;
* ``s_star``    the domain endpoint in the compact shrinking case, fixed by
                the smooth-collapse condition -1 = 2 A_r (s_star + kappa0).

With those in hand, alpha has the closed form

    alpha(s) = V(s)^-1 (s+kappa0)^(1-m)
               * int_0^s V (x+kappa0)^(m-2) (e_star + (eps/2)(x+kappa0)^2) dx

where V = prod beta_i^(n_i).  The integral is a shifted-power sum, so the
antiderivative is exact (see :mod:`qem.genpoly`); no quadrature is used.

The compact shrinking case additionally requires alpha(s_star) = 0.  That
closing condition is a scalar root-finding problem in e_star, solved by
bracketed bisection on :func:`closing_integral`, whose sign is positive for
small e_star and settles to the sign of the admissibility integral (times a
parity factor) for large e_star.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .bundle import (EPSILON, BundleSpec, Case, ChiVector, validate_bundle)
from .errors import HypothesisError, NumericalError
from .genpoly import GenPoly, GenPolyWithConst
from .invariants import admissibility_integral

#: Geometric expansion caps for the e_star root bracket search.
_BRACKET_MIN = 1e-12
_BRACKET_MAX = 1e12


def kappa0_from_consistency(n1: int, e_star: float, epsilon: float,
                            branch: str = "plus") -> float:
    """Solve (kappa0/2)(4(n1+1) - epsilon*kappa0) = e_star for kappa0 > 0.

    Steady (epsilon = 0): the relation is linear and ``branch`` is ignored.
    Expanding (epsilon = 1): two positive roots exist for
    0 < e_star < 2(n1+1)^2 and ``branch`` picks one; for e_star < 0 only the
    plus branch is positive.  Shrinking (epsilon = -1): the unique positive
    quadratic root, requiring e_star > 0.
    """
    b = branch.lower()
    if b not in ("plus", "minus"):
        raise ValueError(f"branch must be 'plus' or 'minus', got {branch!r}")
    c1 = float(n1 + 1)
    if epsilon == 0.0:
        if e_star <= 0.0:
            raise NumericalError("steady case needs e_star > 0")
        return e_star / (2.0 * c1)
    if epsilon > 0.0:
        disc = c1 * c1 - e_star / 2.0
        if disc <= 0.0:
            raise NumericalError(
                f"expanding case needs e_star < 2(n1+1)^2 = {2 * c1 * c1:g}; "
                f"got {e_star:g} (the two branches coincide at the boundary)")
        root = math.sqrt(disc)
        if b == "minus":
            if e_star <= 0.0:
                raise NumericalError(
                    "the minus branch needs e_star > 0 (it is nonpositive "
                    "otherwise)")
            return 2.0 * c1 - 2.0 * root
        return 2.0 * c1 + 2.0 * root
    if e_star <= 0.0:
        raise NumericalError("shrinking case needs e_star > 0")
    return 2.0 * (math.sqrt(c1 * c1 + e_star / 2.0) - c1)


def a_coeff(p: int, q: int, e_star: float, epsilon: float,
            chi: int = 1) -> float:
    """Quadratic coefficient A solving e_star = (8Ap - eps q^2)/(8 A^2).

    ``chi`` selects the root: A = (p + chi*sqrt(p^2 - eps*e_star*q^2/2))
    / (2 e_star).  In the shrinking case (eps = -1, e_star > 0) the
    discriminant is always positive and chi is the sign of A.  In the
    expanding case the plus root is used for e_star > 0 and the minus root
    for e_star < 0 (both give A > 0).  Steady reduces to A = p/e_star.
    """
    if chi not in (1, -1):
        raise ValueError("chi must be +1 or -1")
    if epsilon == 0.0:
        if e_star <= 0.0:
            raise NumericalError("steady case needs e_star > 0")
        return p / e_star
    if e_star == 0.0:
        raise NumericalError("e_star must be nonzero")
    disc = p * p - epsilon * e_star * q * q / 2.0
    if disc < 0.0:
        raise NumericalError(
            f"negative discriminant for (p, q) = ({p}, {q}) at "
            f"e_star = {e_star:g}: e_star exceeds 2 p^2/q^2 = "
            f"{2 * p * p / (q * q):g}")
    return (p + chi * math.sqrt(disc)) / (2.0 * e_star)


def s_star_compact(kappa0: float, n1: int, nr: int) -> float:
    """Domain endpoint of the compact shrinking profile.

    The positive solution of the far-end smooth-collapse condition; when
    n1 = nr it collapses to the constant 4(n1+1) independently of kappa0.
    """
    if kappa0 <= 0.0:
        raise ValueError("kappa0 must be positive")
    c1, cr = float(n1 + 1), float(nr + 1)
    return math.sqrt(kappa0 * (4.0 * c1 + kappa0) + 4.0 * cr * cr) \
        - kappa0 + 2.0 * cr


def build_V(spec: BundleSpec, A: Sequence[float], kappa0: float) -> GenPoly:
    """Volume polynomial V(s) = prod_i (A_i u^2 - q_i^2/(4 A_i))**n_i."""
    out = GenPoly((1.0,), 0.0, kappa0)
    for f, a in zip(spec.factors, A):
        quad = GenPoly((-f.q * f.q / (4.0 * a), 0.0, a), 0.0, kappa0)
        out = out * quad ** f.n
    return out


def build_alpha(V: GenPoly, kappa0: float, m: float, epsilon: float,
                e_star: float) -> GenPolyWithConst:
    """Antiderivative core of alpha: F(s) = int_0^s V u^(m-2) (e* + eps/2 u^2).

    The full alpha divides F by V(s) u^(m-1) at evaluation time; that
    division lives in :class:`MetricProfile`.
    """
    if m <= 1.0:
        raise ValueError("m must exceed 1")
    weight = GenPoly((e_star, 0.0, epsilon / 2.0), 0.0, kappa0)
    integrand = V * weight * GenPoly((1.0,), m - 2.0, kappa0)
    return integrand.antiderivative_from(0.0)


@dataclass(frozen=True)
class MetricProfile:
    """A fully determined candidate metric in closed form.

    Profile functions, all in the shifted variable u = s + kappa0:

        beta_i(s) = A_i u^2 - q_i^2/(4 A_i)      (factor metrics squared)
        phi(s)    = kappa1 u                     (potential factor e^(-u/m))
        V(s)      = prod beta_i^(n_i)
        alpha(s)  = F(s) / (V(s) u^(m-1))        (fiber metric squared)

    with F the stored antiderivative core.  alpha and its derivatives are
    evaluated by the quotient rule from F and V; the boundary points s = 0
    (and s = s_star when the end volume vanishes) are removable 0/0 limits
    and are patched with their exact closed-form values.
    """

    spec: BundleSpec
    case: Case
    m: float
    epsilon: float
    e_star: float
    kappa0: float
    A: tuple[float, ...]
    s_star: float
    V: GenPoly
    alpha_core: GenPolyWithConst
    chi: Optional[ChiVector] = None
    kappa1: float = 1.0

    # -------------- derived quantities --------------

    @property
    def compact(self) -> bool:
        return math.isfinite(self.s_star)

    @property
    def mu(self) -> float:
        """Integrability constant, kappa1^2 * e_star."""
        return self.kappa1 * self.kappa1 * self.e_star

    @cached_property
    def _V1(self) -> GenPoly:
        return self.V.derivative()

    @cached_property
    def _V2(self) -> GenPoly:
        return self._V1.derivative()

    @cached_property
    def _F1(self) -> GenPoly:
        return self.alpha_core.derivative()

    @cached_property
    def _F2(self) -> GenPoly:
        return self._F1.derivative()

    # -------------- profile functions --------------

    def u(self, s):
        return np.asarray(s, dtype=float) + self.kappa0

    def beta(self, i: int, s):
        f, a = self.spec.factors[i], self.A[i]
        uu = self.u(s)
        return a * uu * uu - f.q * f.q / (4.0 * a)

    def beta_prime(self, i: int, s):
        return 2.0 * self.A[i] * self.u(s)

    def beta_second(self, i: int, s):
        return 2.0 * self.A[i] * np.ones_like(self.u(s))

    def phi(self, s):
        return self.kappa1 * self.u(s)

    def potential(self, s):
        """Quasi-Einstein potential u(s) = -m log(phi)."""
        return -self.m * np.log(self.phi(s))

    def _quotient_parts(self, s):
        """alpha, alpha', alpha'' at interior points via the quotient rule."""
        uu = self.u(s)
        m = self.m
        V = self.V(s)
        V1 = self._V1(s)
        V2 = self._V2(s)
        F = self.alpha_core(s)
        F1 = self._F1(s)
        F2 = self._F2(s)
        um1 = uu ** (m - 1.0)
        um2 = uu ** (m - 2.0)
        um3 = uu ** (m - 3.0)
        G = V * um1
        G1 = V1 * um1 + (m - 1.0) * V * um2
        G2 = V2 * um1 + 2.0 * (m - 1.0) * V1 * um2 \
            + (m - 1.0) * (m - 2.0) * V * um3
        with np.errstate(divide="ignore", invalid="ignore"):
            al = F / G
            al1 = (F1 - al * G1) / G
            al2 = (F2 - 2.0 * al1 * G1 - al * G2) / G
        return al, al1, al2

    def _endpoint_masks(self, s):
        arr = np.asarray(s, dtype=float)
        at0 = arr == 0.0
        at_star = np.zeros_like(at0) if not self.compact \
            else np.isclose(arr, self.s_star, rtol=1e-14, atol=0.0)
        return arr, at0, at_star

    def alpha(self, s):
        """Fiber profile alpha; alpha(0) = 0 exactly by construction."""
        arr, at0, at_star = self._endpoint_masks(s)
        al, _, _ = self._quotient_parts(arr)
        al = np.where(at0, 0.0, al)
        if self.compact and self.spec.nr > 0:
            # Removable 0/0 at the far end; the limit is 0 whenever the
            # closing condition holds, which construct_shrinking enforces.
            al = np.where(at_star, 0.0, al)
        return al if np.ndim(s) else float(al)

    def alpha_prime(self, s):
        arr, at0, at_star = self._endpoint_masks(s)
        _, al1, _ = self._quotient_parts(arr)
        if np.any(at0):
            uu0 = self.kappa0
            slope0 = (self.e_star + self.epsilon * uu0 * uu0 / 2.0) \
                / ((self.spec.n1 + 1) * uu0)
            al1 = np.where(at0, slope0, al1)
        if self.compact and self.spec.nr > 0 and np.any(at_star):
            y = self.s_star + self.kappa0
            slope1 = (self.e_star + self.epsilon * y * y / 2.0) \
                / ((self.spec.nr + 1) * y)
            al1 = np.where(at_star, slope1, al1)
        return al1 if np.ndim(s) else float(al1)

    def alpha_second(self, s):
        """Second derivative; defined at interior points only."""
        _, _, al2 = self._quotient_parts(np.asarray(s, dtype=float))
        return al2 if np.ndim(s) else float(al2)

    def summary(self) -> dict:
        d = {
            "case": self.case.value,
            "m": self.m,
            "epsilon": self.epsilon,
            "e_star": self.e_star,
            "kappa0": self.kappa0,
            "kappa1": self.kappa1,
            "mu": self.mu,
            "A": list(self.A),
            "s_star": self.s_star if self.compact else "inf",
            "beta_at_zero": [float(self.beta(i, 0.0))
                             for i in range(self.spec.r)],
        }
        if self.chi is not None:
            d["chi"] = list(self.chi.signs)
        return d


def _assemble(spec: BundleSpec, case: Case, m: float, e_star: float,
              kappa0: float, A: Sequence[float], s_star: float,
              chi: Optional[ChiVector] = None) -> MetricProfile:
    epsilon = EPSILON[case]
    V = build_V(spec, A, kappa0)
    core = build_alpha(V, kappa0, m, epsilon, e_star)
    return MetricProfile(spec=spec, case=case, m=float(m),
                         epsilon=epsilon, e_star=float(e_star),
                         kappa0=float(kappa0), A=tuple(float(a) for a in A),
                         s_star=float(s_star), V=V, alpha_core=core, chi=chi)


def _require_admissible(spec: BundleSpec, m: float, case: Case) -> None:
    report = validate_bundle(spec, m)
    if not report.admissible[case.value]:
        failed = [c for c in report.checks if not c.passed]
        lines = "; ".join(f"{c.name}: {c.detail}" for c in failed)
        raise HypothesisError(
            f"bundle is not admissible for the {case.value} case ({lines})")


def construct_steady(spec: BundleSpec, m: float, e_star: float) -> MetricProfile:
    """Steady profile on [0, inf): eps = 0, A_i = p_i/e_star.

    e_star is a pure homothety parameter here; any positive value gives the
    same metric up to scale.
    """
    _require_admissible(spec, m, Case.STEADY)
    if e_star <= 0.0:
        raise NumericalError("steady case needs e_star > 0")
    kappa0 = kappa0_from_consistency(spec.n1, e_star, 0.0)
    A = [a_coeff(f.p, f.q, e_star, 0.0) for f in spec.factors]
    _check_positive_at_start(spec, A, kappa0)
    return _assemble(spec, Case.STEADY, m, e_star, kappa0, A, math.inf)


def construct_expanding(spec: BundleSpec, m: float, e_star: float,
                        branch: str = "plus") -> MetricProfile:
    """Expanding profile on [0, inf): eps = +1, two kappa0 branches.

    For 0 < e_star < 2(n1+1)^2 both branches exist; e_star < 0 is admitted
    on the plus branch with the other root of the A quadratic (the printed
    plus root would make every A_i negative there).  Positivity of each
    beta_i(0) is verified exactly and failures name the offending factor.
    """
    _require_admissible(spec, m, Case.EXPANDING)
    if e_star == 0.0:
        raise NumericalError("expanding case needs e_star != 0")
    kappa0 = kappa0_from_consistency(spec.n1, e_star, 1.0, branch)
    root = 1 if e_star > 0.0 else -1
    A = [1.0 / (2.0 * kappa0)]
    for f in spec.factors[1:]:
        try:
            A.append(a_coeff(f.p, f.q, e_star, 1.0, chi=root))
        except NumericalError as exc:
            raise NumericalError(
                f"factor {len(A) + 1}: {exc}") from None
    _check_positive_at_start(spec, A, kappa0)
    return _assemble(spec, Case.EXPANDING, m, e_star, kappa0, A, math.inf)


def _check_positive_at_start(spec: BundleSpec, A: Sequence[float],
                             kappa0: float) -> None:
    """beta_i(0) > 0 for i >= 2, i.e. 2 A_i kappa0 > |q_i|."""
    for i, (f, a) in enumerate(zip(spec.factors, A)):
        if i == 0:
            continue
        if 2.0 * a * kappa0 <= abs(f.q):
            raise NumericalError(
                f"beta_{i + 1}(0) <= 0: factor (n={f.n}, p={f.p}, q={f.q}) "
                f"has 2 A kappa0 = {2.0 * a * kappa0:g} <= |q| = {abs(f.q)}; "
                "inconsistent regime/e_star selection")


# ---------------------------------------------------------------------------
# Compact shrinking case.
# ---------------------------------------------------------------------------

def _shrinking_parameters(spec: BundleSpec, e_star: float, chi: ChiVector):
    """(kappa0, A, s_star) for the shrinking case at a given e_star > 0."""
    if len(chi) != spec.r:
        raise ValueError("chi length must match the factor count")
    kappa0 = kappa0_from_consistency(spec.n1, e_star, -1.0)
    A = [1.0 / (2.0 * kappa0)]
    for f, s in zip(spec.factors[1:], chi.signs[1:]):
        A.append(a_coeff(f.p, f.q, e_star, -1.0, chi=s))
    s_star = s_star_compact(kappa0, spec.n1, spec.nr)
    return kappa0, A, s_star


def _check_beta_positive_compact(spec: BundleSpec, chi: ChiVector,
                                 A: Sequence[float], kappa0: float,
                                 s_star: float, e_star: float) -> None:
    """Interior positivity of every beta_i on (0, s_star).

    Growing factors (A_i > 0) are smallest at s = 0, shrinking ones
    (A_i < 0) at s = s_star; the end factors vanish exactly at their own
    ends, which is the intended smooth collapse.
    """
    y = s_star + kappa0
    for i in range(1, spec.r - 1):
        f, a = spec.factors[i], A[i]
        if a > 0.0:
            ok = 2.0 * a * kappa0 > abs(f.q)
            where = "s = 0"
        else:
            ok = 2.0 * abs(a) * y < abs(f.q)
            where = "s = s_star"
        if not ok:
            raise NumericalError(
                f"beta_{i + 1} <= 0 at {where} for e_star = {e_star:g}, "
                f"chi = {list(chi.signs)}: profile invalid at this e_star")


def closing_integral(spec: BundleSpec, m: float, e_star: float,
                     chi: ChiVector) -> float:
    """Closing function whose zero in e_star closes the compact profile.

    Closed-form value of

        int_0^{s_star} prod_i (u^2 - q_i^2/(4 A_i^2))**n_i
                       * u^(m-2) * (u^2/2 - e_star) ds,   u = s + kappa0,

    which is, up to the positive constant prod |A_i|^(n_i) and the overall
    parity factor S, the negative of alpha(s_star) times V(s_star)
    u^(m-1): its zeros in e_star are exactly the closing values
    alpha(s_star) = 0.  The measure factor is written as (u^2/2 - e_star)
    so that the small-e_star sign equals the parity factor S and the
    large-e_star sign equals S times the sign of the admissibility
    integral; the bisection bracket rests on that sign change.
    """
    if m <= 1.0:
        raise ValueError("m must exceed 1")
    kappa0, A, s_star = _shrinking_parameters(spec, e_star, chi)
    _check_beta_positive_compact(spec, chi, A, kappa0, s_star, e_star)
    poly = GenPoly((1.0,), 0.0, kappa0)
    for f, a in zip(spec.factors, A):
        d = f.q * f.q / (4.0 * a * a)
        poly = poly * GenPoly((-d, 0.0, 1.0), 0.0, kappa0) ** f.n
    poly = poly * GenPoly((-e_star, 0.0, 0.5), 0.0, kappa0)
    core = (poly * GenPoly((1.0,), m - 2.0, kappa0)).antiderivative_from(0.0)
    return float(core(s_star))


def closing_scale(spec: BundleSpec, m: float, e_star: float,
                  chi: ChiVector) -> float:
    """Magnitude scale for closing_integral tolerances.

    The same integral with every subtraction replaced by an addition; it
    bounds the integral of the absolute integrand from above and has the
    same natural size, making |closing_integral| / closing_scale a
    scale-free residual.
    """
    kappa0, A, s_star = _shrinking_parameters(spec, e_star, chi)
    poly = GenPoly((1.0,), 0.0, kappa0)
    for f, a in zip(spec.factors, A):
        d = f.q * f.q / (4.0 * a * a)
        poly = poly * GenPoly((d, 0.0, 1.0), 0.0, kappa0) ** f.n
    poly = poly * GenPoly((abs(e_star), 0.0, 0.5), 0.0, kappa0)
    core = (poly * GenPoly((1.0,), m - 2.0, kappa0)).antiderivative_from(0.0)
    return float(core(s_star))


def closing_sweep(spec: BundleSpec, m: float, chi: ChiVector,
                  e_values: Sequence[float]):
    """Evaluate the closing function over a grid of e_star values.

    Returns a list of (e_star, value, valid) rows; ``valid`` is False for
    e_star values where the candidate profile has a nonpositive beta
    factor (value is NaN there).
    """
    rows = []
    for e in e_values:
        try:
            rows.append((float(e), closing_integral(spec, m, e, chi), True))
        except NumericalError:
            rows.append((float(e), math.nan, False))
    return rows


def construct_shrinking(spec: BundleSpec, m: float, chi: ChiVector,
                        tol: float = 1e-13) -> MetricProfile:
    """Compact shrinking profile: find e_star > 0 closing the far end.

    Brackets a sign change of :func:`closing_integral` by geometric
    expansion from e_star = 1 (factor 10 per step, capped at
    [1e-12, 1e12]), takes the smallest bracketed change, and bisects to
    relative width ``tol``.  The admissibility integral must be strictly
    negative for ``chi``; existence of the bracket is guaranteed in that
    case, and multiple roots beyond the first are deliberately not
    searched for.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    _require_admissible(spec, m, Case.SHRINKING)
    adm = admissibility_integral(spec, chi)
    if not adm.value < 0:
        raise HypothesisError(
            f"admissibility integral is {adm.value} >= 0 for chi = "
            f"{list(chi.signs)}: no shrinking metric is promised for this "
            "sign vector (pick one from find_admissible_chi)")

    def h(e: float) -> float:
        return closing_integral(spec, m, e, chi)

    # Ladder of evaluated points, expanded geometrically both ways.
    es = [1.0]
    vals = [h(1.0)]
    while vals[0] * vals[-1] > 0.0 and es[-1] < _BRACKET_MAX:
        es.append(es[-1] * 10.0)
        vals.append(h(es[-1]))
    while vals[0] * vals[-1] > 0.0 and es[0] > _BRACKET_MIN:
        es.insert(0, es[0] / 10.0)
        vals.insert(0, h(es[0]))

    lo = hi = None
    for k in range(len(es) - 1):
        if vals[k] == 0.0:
            lo = hi = es[k]
            break
        if vals[k] * vals[k + 1] < 0.0:
            lo, hi = es[k], es[k + 1]
            break
    else:
        if vals[-1] == 0.0:
            lo = hi = es[-1]
    if lo is None:
        raise NumericalError(
            "no sign change of the closing function in "
            f"[{es[0]:g}, {es[-1]:g}]: endpoint values "
            f"{vals[0]:.6g} and {vals[-1]:.6g} share a sign "
            "(is the admissibility hypothesis satisfied?)")

    if lo != hi:
        flo, fhi = h(lo), h(hi)
        while hi - lo > tol * hi:
            mid = 0.5 * (lo + hi)
            fmid = h(mid)
            if fmid == 0.0:
                lo = hi = mid
                flo = fhi = 0.0
                break
            if flo * fmid < 0.0:
                hi, fhi = mid, fmid
            else:
                lo, flo = mid, fmid
    e_root = 0.5 * (lo + hi)
    if lo != hi:
        # A few clamped secant steps inside the final bracket sharpen the
        # root to the floating-point floor.  The objective here is the
        # profile's own end value (the volume-weighted antiderivative at
        # s_star), which is what the boundary check measures; it vanishes
        # together with the closing function, differing only by the
        # constant factor prod A_i^(n_i).
        def g(e: float) -> float:
            kappa0, A, s_star = _shrinking_parameters(spec, e, chi)
            V = build_V(spec, A, kappa0)
            return float(build_alpha(V, kappa0, m, -1.0, e)(s_star))

        glo, ghi = g(lo), g(hi)
        best_e, best_f = (lo, glo) if abs(glo) <= abs(ghi) else (hi, ghi)
        ea, fa, eb, fb = lo, glo, hi, ghi
        for _ in range(8):
            if fb == fa:
                break
            ec = eb - fb * (eb - ea) / (fb - fa)
            if not lo <= ec <= hi or ec == eb:
                break
            fc = g(ec)
            ea, fa, eb, fb = eb, fb, ec, fc
            if abs(fc) < abs(best_f):
                best_e, best_f = ec, fc
            if fc == 0.0:
                break
        e_root = best_e

    kappa0, A, s_star = _shrinking_parameters(spec, e_root, chi)
    _check_beta_positive_compact(spec, chi, A, kappa0, s_star, e_root)
    profile = _assemble(spec, Case.SHRINKING, m, e_root, kappa0, A, s_star,
                        chi=chi)
    interior = np.linspace(1e-4 * s_star, s_star * (1.0 - 1e-4), 1025)
    if not np.all(profile.alpha(interior) > 0.0):
        raise NumericalError(
            f"alpha is not positive on (0, s_star) at the bisected "
            f"e_star = {e_root:g}; closing at a different root may be "
            "required")
    return profile
