"""Independent verification of constructed metric profiles.

A profile that came out of :mod:`qem.construct` satisfies the reduced
quasi-Einstein system identically; what can still be wrong is the
implementation.  This module therefore re-evaluates everything the hard
way:

* ``residuals``       substitutes the closed-form profile functions into
                      each equation of the moment-map system and reports
                      scale-free residuals on an interior grid;
* ``time_form_residuals``
                      does the same for the original arc-length form of
                      the system, converted by the chain rule, which is an
                      algebraically independent transcription;
* ``boundary_check``  measures the smooth-collapse boundary values;
* ``t_of_s`` / ``completeness_diagnostic`` / ``asymptotics_report``
                      recover the arc-length coordinate by quadrature and
                      test the growth laws that make the noncompact
                      metrics complete;
* ``alpha_quadrature``
                      evaluates alpha through adaptive quadrature of its
                      defining integral, an oracle entirely independent of
                      the closed-form antiderivative.

Residual normalization: each equation's residual at a point is divided by
the largest magnitude among its summands at that point, so tolerances mean
the same thing near the collapsing ends (where single terms blow up) as in
the middle of the domain.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from scipy import integrate

from .construct import MetricProfile
from .bundle import Case
from .errors import NumericalError

#: Relative distance of grid ends from the domain endpoints.  The ends are
#: smooth-compactification points of the metric but coordinate
#: singularities of the equations (beta_1(0) = 0 divides several terms).
_EDGE = 1e-4


def _chebyshev(lo: float, hi: float, count: int) -> np.ndarray:
    j = np.arange(count)
    nodes = np.cos(np.pi * (2.0 * j + 1.0) / (2.0 * count))
    return 0.5 * (lo + hi) + 0.5 * (hi - lo) * nodes[::-1]


def default_grid(profile: MetricProfile, grid_size: int = 512) -> np.ndarray:
    """Interior verification grid.

    Compact case: Chebyshev points on [delta, s_star - delta].  Noncompact:
    Chebyshev points on [delta, 10 kappa0] plus a log-spaced tail out to
    s = 1e4 so the asymptotic regime is sampled too.
    """
    if grid_size < 4:
        raise ValueError("grid_size must be at least 4")
    if profile.compact:
        delta = _EDGE * profile.s_star
        return _chebyshev(delta, profile.s_star - delta, grid_size)
    delta = _EDGE * profile.kappa0
    body = max(grid_size - grid_size // 8, 4)
    head = _chebyshev(delta, 10.0 * profile.kappa0, body)
    tail = np.geomspace(10.0 * profile.kappa0 * 1.05,
                        100.0 * max(profile.kappa0, 1.0),
                        grid_size - body)
    return np.concatenate([head, tail])


@dataclass
class ResidualReport:
    """Per-equation residuals of the moment-map system on a grid."""

    grid: np.ndarray
    residuals: dict[str, np.ndarray]
    max_rel: dict[str, float]
    mu_values: np.ndarray
    mu_mean: float
    mu_spread: float
    j_invariance_max: float

    @property
    def worst(self) -> float:
        return max(self.max_rel.values())

    def to_dict(self, full: bool = False) -> dict:
        d = {
            "max_rel": {k: float(v) for k, v in self.max_rel.items()},
            "worst": float(self.worst),
            "mu_mean": float(self.mu_mean),
            "mu_spread": float(self.mu_spread),
            "j_invariance_max": float(self.j_invariance_max),
            "grid_size": int(self.grid.size),
        }
        if full:
            d["grid"] = self.grid.tolist()
            d["residuals"] = {k: v.tolist() for k, v in
                              self.residuals.items()}
            d["mu_values"] = self.mu_values.tolist()
        return d


def _profile_fields(profile: MetricProfile, s: np.ndarray):
    """All pointwise quantities the equations need."""
    spec = profile.spec
    u = profile.u(s)
    al, al1, al2 = profile._quotient_parts(s)
    beta = [profile.beta(i, s) for i in range(spec.r)]
    bet1 = [profile.beta_prime(i, s) for i in range(spec.r)]
    bet2 = [profile.beta_second(i, s) for i in range(spec.r)]
    logv1 = sum(f.n * bp / b for f, b, bp in zip(spec.factors, beta, bet1))
    return u, al, al1, al2, beta, bet1, bet2, logv1


def _rel(terms: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """(|sum of terms|, pointwise max |term|)."""
    total = np.zeros_like(terms[0])
    scale = np.zeros_like(terms[0])
    for t in terms:
        total = total + t
        scale = np.maximum(scale, np.abs(t))
    return np.abs(total), scale


def residuals(profile: MetricProfile, grid_size: int = 512,
              grid: Optional[np.ndarray] = None) -> ResidualReport:
    """Residuals of the full moment-map system at interior points.

    Checks the two fiber equations, one equation per base factor, and the
    integrability relation that pins the constant mu = kappa1^2 e_star.
    The profile is valid only where every beta_i and alpha are positive;
    a nonpositive value on the grid raises.
    """
    s = default_grid(profile, grid_size) if grid is None else \
        np.asarray(grid, dtype=float)
    spec, m, eps = profile.spec, profile.m, profile.epsilon
    u, al, al1, al2, beta, bet1, bet2, logv1 = _profile_fields(profile, s)
    for i, b in enumerate(beta):
        if not np.all(b > 0.0):
            raise NumericalError(f"beta_{i + 1} <= 0 on the grid: profile "
                                 "invalid")
    if not np.all(al > 0.0):
        raise NumericalError("alpha <= 0 on the grid: profile invalid")

    k1 = profile.kappa1
    phi = k1 * u
    phi1 = k1 * np.ones_like(u)
    ones = np.ones_like(u)
    res: dict[str, np.ndarray] = {}
    rel: dict[str, float] = {}

    def record(name: str, terms: list[np.ndarray]) -> None:
        total, scale = _rel(terms)
        res[name] = total
        rel[name] = float(np.max(total / scale))

    curv = sum(f.n * (b2 / b - 0.5 * (b1 / b) ** 2)
               for f, b, b1, b2 in zip(spec.factors, beta, bet1, bet2))
    record("fiber_second_order", [
        0.5 * al2, 0.5 * al1 * logv1, al * curv,
        m * al1 * phi1 / (2.0 * phi), -0.5 * eps * ones])

    qcurv = sum(f.n * f.q * f.q / (2.0 * b * b)
                for f, b in zip(spec.factors, beta))
    record("fiber_curvature", [
        0.5 * al2, 0.5 * al1 * logv1, -al * qcurv,
        m * al1 * phi1 / (2.0 * phi), -0.5 * eps * ones])

    for i, f in enumerate(spec.factors):
        b, b1, b2 = beta[i], bet1[i], bet2[i]
        record(f"base_factor_{i + 1}", [
            0.5 * al1 * b1 / b,
            0.5 * al * (b2 / b - (b1 / b) ** 2),
            0.5 * al * b1 / b * logv1,
            -f.p / b,
            f.q * f.q * al / (2.0 * b * b),
            0.5 * m * al * b1 * phi1 / (b * phi),
            -0.5 * eps * ones])

    mu_terms = [phi * phi1 * al1 * 0.5, phi * phi1 * (0.5 * al1 + logv1 * al),
                (m - 1.0) * phi1 * phi1 * al, -0.5 * eps * phi * phi]
    mu_hat = sum(mu_terms)
    record("integrability", mu_terms + [-profile.mu * ones])

    # The curvature combination that forces phi linear; identically zero
    # for the quadratic beta branch, so any excess is transcription error.
    if spec.dim_sum:
        j_terms = [f.n * (b2 / b - 0.5 * (b1 / b) ** 2
                          + 0.5 * f.q * f.q / (b * b))
                   for f, b, b1, b2 in zip(spec.factors, beta, bet1, bet2)]
        j_scale = np.maximum.reduce(
            [np.maximum(np.abs(f.n * b2 / b), np.abs(0.5 * f.n * f.q * f.q
                                                     / (b * b)))
             for f, b, b1, b2 in zip(spec.factors, beta, bet1, bet2)])
        j_max = float(np.max(np.abs(sum(j_terms)) / j_scale))
    else:
        j_max = 0.0

    mu_mean = float(np.mean(mu_hat))
    spread = float((np.max(mu_hat) - np.min(mu_hat)) / abs(mu_mean))
    return ResidualReport(grid=s, residuals=res, max_rel=rel,
                          mu_values=np.asarray(mu_hat), mu_mean=mu_mean,
                          mu_spread=spread, j_invariance_max=j_max)


def time_form_residuals(profile: MetricProfile, points: int = 16,
                        grid: Optional[np.ndarray] = None) -> dict[str, float]:
    """Residuals of the arc-length (original) form of the system.

    The arc-length equations are autonomous, so the chain rule
    d/dt = sqrt(alpha) d/ds turns every term into a closed-form expression
    in the s-coordinate quantities; no quadrature is involved.  This is an
    independent transcription of the system and cross-checks the
    moment-map form.
    """
    s = default_grid(profile, points) if grid is None else \
        np.asarray(grid, dtype=float)
    spec, m, eps = profile.spec, profile.m, profile.epsilon
    u, al, al1, al2, beta, bet1, bet2, _ = _profile_fields(profile, s)
    k1 = profile.kappa1
    phi = k1 * u
    phi1 = k1 * np.ones_like(u)
    ones = np.ones_like(u)

    # d2f/dt2 / f = alpha''/2 ; (df/dt)(dg/dt)/(fg) = alpha' beta'/(4 beta);
    # d2g/dt2 / g = alpha' beta'/(4 beta) + alpha(beta''/(2 beta)
    #               - beta'^2/(4 beta^2)), and similarly for the potential
    # factor v = phi.
    ff = 0.5 * al2
    gg = [al1 * b1 / (4.0 * b) + al * (b2 / (2.0 * b) - b1 * b1 / (4.0 * b * b))
          for b, b1, b2 in zip(beta, bet1, bet2)]
    fg = [al1 * b1 / (4.0 * b) for b, b1 in zip(beta, bet1)]
    vv = (0.5 * al1 * phi1) / phi
    fv = 0.5 * al1 * phi1 / phi

    out: dict[str, float] = {}

    def record(name, terms):
        total, scale = _rel(terms)
        out[name] = float(np.max(total / scale))

    record("trace", [ff] + [2.0 * f.n * g for f, g in zip(spec.factors, gg)]
           + [m * vv, -0.5 * eps * ones])
    record("constraint",
           [ff]
           + [2.0 * f.n * x for f, x in zip(spec.factors, fg)]
           + [-f.n * f.q * f.q * al / (2.0 * b * b)
              for f, b in zip(spec.factors, beta)]
           + [m * fv, -0.5 * eps * ones])
    for i, f in enumerate(spec.factors):
        b, b1 = beta[i], bet1[i]
        gv = al * b1 * phi1 / (2.0 * b * phi)
        cross = [2.0 * spec.factors[j].n * al * b1 * bet1[j]
                 / (4.0 * b * beta[j]) for j in range(spec.r)]
        record(f"factor_{i + 1}",
               [gg[i], -al * b1 * b1 / (4.0 * b * b), fg[i]]
               + cross
               + [-f.p / b, f.q * f.q * al / (2.0 * b * b), m * gv,
                  -0.5 * eps * ones])
    return out


@dataclass
class BoundaryReport:
    """Measured smooth-collapse boundary values.

    Targets: alpha(0) = 0, alpha'(0) = 2, beta_1(0) = 0, beta_1'(0) = 1;
    in the compact case also alpha(s_star) = 0, alpha'(s_star) = -2,
    beta_r(s_star) = 0, beta_r'(s_star) = -1 (the far-end slope targets
    mirror the near end; they are inferred, measured and reported on the
    same footing).  ``alpha``-type entries are scaled by max alpha.
    """

    values: dict[str, float]
    alpha_scale: float

    @property
    def worst(self) -> float:
        return max(self.values.values())

    def to_dict(self) -> dict:
        return {"values": {k: float(v) for k, v in self.values.items()},
                "alpha_scale": float(self.alpha_scale),
                "worst": float(self.worst)}


def boundary_check(profile: MetricProfile, grid_size: int = 512) -> BoundaryReport:
    s = default_grid(profile, grid_size)
    scale = float(np.max(profile.alpha(s)))
    vals = {
        "alpha_at_start": abs(profile.alpha(0.0)) / scale,
        "alpha_slope_start_error": abs(profile.alpha_prime(0.0) - 2.0) / max(scale, 1.0),
        "beta1_at_start": abs(float(profile.beta(0, 0.0))),
        "beta1_slope_start_error": abs(float(profile.beta_prime(0, 0.0)) - 1.0),
    }
    if profile.compact:
        ss = profile.s_star
        r = profile.spec.r
        vals.update({
            "alpha_at_end": abs(profile.alpha(ss)) / scale,
            "alpha_slope_end_error": abs(profile.alpha_prime(ss) + 2.0) / max(scale, 1.0),
            "beta_r_at_end": abs(float(profile.beta(r - 1, ss))),
            "beta_r_slope_end_error": abs(float(profile.beta_prime(r - 1, ss)) + 1.0),
        })
    return BoundaryReport(values=vals, alpha_scale=scale)


# ---------------------------------------------------------------------------
# Arc-length coordinate and completeness diagnostics.
# ---------------------------------------------------------------------------

def _sqrt_edge_piece(alpha_fn, cut: float, x_lo: float = 0.0) -> float:
    """int_{x_lo}^cut dx / sqrt(alpha) where alpha vanishes linearly at 0.

    Fits the local model alpha = a x + b x^2 from two evaluations at
    cut/2 and cut (both far enough from 0 for alpha to be accurate) and
    integrates the model in closed form.  The model error is O(cut^2)
    relative, negligible for the cut sizes used here; evaluating alpha
    closer to the root than the cut would hit its floating-point
    cancellation floor and is exactly what this piece avoids.
    """
    h1 = alpha_fn(0.5 * cut) / (0.5 * cut)
    h2 = alpha_fn(cut) / cut
    a = 2.0 * h1 - h2
    b = 2.0 * (h2 - h1) / cut
    if a <= 0.0 or h2 <= 0.0:
        raise NumericalError("alpha is not positive near the boundary")

    def antideriv(x: float) -> float:
        if x == 0.0:
            return 0.0
        rho = b * x / a
        if abs(rho) < 1e-8:
            return 2.0 * math.sqrt(x / a) * (1.0 - rho / 6.0)
        if b > 0.0:
            return 2.0 / math.sqrt(b) * math.asinh(math.sqrt(rho))
        return 2.0 / math.sqrt(-b) * math.asin(math.sqrt(-rho))

    return antideriv(cut) - antideriv(x_lo)


def _tail_piece(alpha_fn, s_star: float, w_lo: float, w_hi: float,
                head_scale: float, epsrel: float = 1e-10) -> float:
    """int over x in [s_star-w_hi, s_star-w_lo] of dx / sqrt(alpha(x)).

    In the reflected coordinate w = s_star - x the profile vanishes
    linearly at w = 0, so the boundary layer below the cut uses the same
    fitted closed-form model as the near end.
    """
    if w_hi <= w_lo:
        return 0.0
    refl = lambda w: alpha_fn(s_star - w)  # noqa: E731
    cut = min(1e-3 * head_scale, w_hi)
    total = 0.0
    if w_lo < cut:
        total += _sqrt_edge_piece(refl, cut, x_lo=w_lo)
        w_lo = cut
    if w_hi > w_lo:
        seg, _ = integrate.quad(lambda w: 1.0 / math.sqrt(refl(w)),
                                w_lo, w_hi, epsabs=0.0, epsrel=epsrel,
                                limit=200)
        total += seg
    return total


def arc_length(alpha_fn, s: float, s_star: float = math.inf,
               head_scale: float = 1.0, epsrel: float = 1e-10) -> float:
    """t(s) = int_0^s dx / sqrt(alpha(x)) for a positive profile alpha.

    alpha vanishes linearly at 0 (and at s_star in the compact case), so
    1/sqrt(alpha) has integrable square-root singularities there.  The
    boundary layer at 0 is integrated through the fitted local model (see
    :func:`_sqrt_edge_piece`, a square-root substitution in closed form);
    the far end uses the substitution x = s_star - v^2, whose quadrature
    nodes stay clear of the cancellation floor of alpha.
    """
    if s < 0.0:
        raise ValueError("s must be nonnegative")
    if s == 0.0:
        return 0.0
    if s > s_star:
        raise ValueError("s exceeds the domain endpoint")

    cut0 = min(1e-3 * head_scale, 0.5 * s)
    val = _sqrt_edge_piece(alpha_fn, cut0)
    err = 0.0
    if math.isfinite(s_star) and s > 0.9 * s_star:
        cut1 = 0.9 * s_star
        v0, e0 = integrate.quad(lambda x: 1.0 / math.sqrt(alpha_fn(x)),
                                cut0, cut1, epsabs=0.0, epsrel=epsrel,
                                limit=200)
        val += v0 + _tail_piece(alpha_fn, s_star, s_star - s,
                                s_star - cut1, head_scale, epsrel)
        err += e0
    elif s > cut0:
        v0, e0 = integrate.quad(lambda x: 1.0 / math.sqrt(alpha_fn(x)),
                                cut0, s, epsabs=0.0, epsrel=epsrel,
                                limit=200)
        val += v0
        err += e0
    if err > 1e-6 * max(abs(val), 1.0):
        raise NumericalError(
            f"arc-length quadrature did not converge: value {val:.6g}, "
            f"error estimate {err:.3g}")
    return val


def t_of_s(profile: MetricProfile, s: float) -> float:
    """Arc-length coordinate of the sample point s."""
    return arc_length(lambda x: profile.alpha(x), s, profile.s_star,
                      head_scale=profile.kappa0)


@dataclass
class CompletenessReport:
    verdict: str          # "divergent" | "inconclusive"
    law: str              # "linear" | "logarithmic"
    rate: float           # fitted slope of t against s (or log s)
    predicted_rate: float
    fit_residual: float
    s_values: np.ndarray = field(repr=False)
    t_values: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "law": self.law,
                "rate": float(self.rate),
                "predicted_rate": float(self.predicted_rate),
                "fit_residual": float(self.fit_residual),
                "s_values": self.s_values.tolist(),
                "t_values": self.t_values.tolist()}


def steady_alpha_limit(profile: MetricProfile) -> float:
    """Constant the steady alpha approaches: e_star/(2 sum(n) + m - 1)."""
    return profile.e_star / (2.0 * profile.spec.dim_sum + profile.m - 1.0)


def expanding_alpha_rate(profile: MetricProfile) -> float:
    """Coefficient of s^2 in the expanding alpha: 1/(2(2 sum(n) + m + 1))."""
    return 1.0 / (2.0 * (2.0 * profile.spec.dim_sum + profile.m + 1.0))


def completeness_diagnostic(profile: MetricProfile,
                            s_lo: float = 1e2, s_hi: float = 1e4,
                            count: int = 24) -> CompletenessReport:
    """Establish that t(s) diverges as s grows (no boundary at infinity).

    Fits the case-appropriate growth law on a log-spaced sample: constant
    alpha gives t linear in s (steady), quadratic alpha gives t growing
    like log s (expanding).  A good fit of an unbounded law certifies
    divergence; a bad fit returns "inconclusive" with the data attached.
    """
    if profile.compact:
        raise ValueError("completeness diagnostic applies to noncompact "
                         "profiles only (the shrinking domain is compact)")
    ss = np.geomspace(s_lo, s_hi, count)
    ts = np.array([t_of_s(profile, float(s)) for s in ss])
    if profile.case is Case.STEADY:
        x, law = ss, "linear"
        predicted = 1.0 / math.sqrt(steady_alpha_limit(profile))
    else:
        x, law = np.log(ss), "logarithmic"
        predicted = 1.0 / math.sqrt(expanding_alpha_rate(profile))
    coef = np.polynomial.polynomial.polyfit(x, ts, 1)
    fit = coef[0] + coef[1] * x
    residual = float(np.max(np.abs(fit - ts) / np.abs(ts)))
    verdict = "divergent" if residual < 0.01 else "inconclusive"
    return CompletenessReport(verdict=verdict, law=law, rate=float(coef[1]),
                              predicted_rate=predicted,
                              fit_residual=residual, s_values=ss, t_values=ts)


@dataclass
class AsymptoticsReport:
    """Fitted growth of f = sqrt(alpha) and g_i = sqrt(beta_i) against t."""

    case: str
    t_values: np.ndarray = field(repr=False)
    f_values: np.ndarray = field(repr=False)
    g_values: list[np.ndarray] = field(repr=False)
    fits: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"case": self.case, "fits": self.fits,
                "t_values": self.t_values.tolist(),
                "f_values": self.f_values.tolist(),
                "g_values": [g.tolist() for g in self.g_values]}


def asymptotics_report(profile: MetricProfile, s_lo: float = 1e3,
                       s_hi: float = 1e4, count: int = 16) -> AsymptoticsReport:
    """Growth laws over the last sampled decade of the noncompact domain.

    Steady: f approaches the constant sqrt(K) and each g_i grows linearly
    in t (fitted exponent of g against t near 1).  Expanding: log f and
    log g_i are linear in t with rate sqrt(K).
    """
    if profile.compact:
        raise ValueError("asymptotics apply to noncompact profiles only")
    ss = np.geomspace(s_lo, s_hi, count)
    ts = np.array([t_of_s(profile, float(s)) for s in ss])
    f = np.sqrt(profile.alpha(ss))
    gs = [np.sqrt(profile.beta(i, ss)) for i in range(profile.spec.r)]
    fits: dict = {}
    if profile.case is Case.STEADY:
        K = steady_alpha_limit(profile)
        fits["f_limit"] = float(f[-1])
        fits["f_limit_predicted"] = math.sqrt(K)
        fits["f_relative_variation"] = float((f.max() - f.min()) / f.mean())
        exps = []
        for g in gs:
            c = np.polynomial.polynomial.polyfit(np.log(ts), np.log(g), 1)
            exps.append(float(c[1]))
        fits["g_exponents_vs_t"] = exps          # target: all 1.0
    else:
        K = expanding_alpha_rate(profile)
        rate = math.sqrt(K)
        c = np.polynomial.polynomial.polyfit(ts, np.log(f), 1)
        fits["log_f_rate"] = float(c[1])
        fits["log_f_rate_predicted"] = rate
        fits["log_g_rates"] = []
        for g in gs:
            cg = np.polynomial.polynomial.polyfit(ts, np.log(g), 1)
            fits["log_g_rates"].append(float(cg[1]))
    return AsymptoticsReport(case=profile.case.value, t_values=ts,
                             f_values=f, g_values=gs, fits=fits)


# ---------------------------------------------------------------------------
# Quadrature oracle for alpha (tests / cross-checks only).
# ---------------------------------------------------------------------------

def alpha_quadrature(profile: MetricProfile, s: float,
                     epsrel: float = 1e-12) -> float:
    """alpha(s) through adaptive quadrature of its defining integral.

    Independent of the closed-form antiderivative: only the volume
    polynomial and the weight are shared.  Valid at interior points where
    V(s) > 0.
    """
    k0, m, eps, e = (profile.kappa0, profile.m, profile.epsilon,
                     profile.e_star)

    def integrand(x: float) -> float:
        u = x + k0
        return profile.V(x) * u ** (m - 2.0) * (e + 0.5 * eps * u * u)

    val, _ = integrate.quad(integrand, 0.0, s, epsabs=0.0, epsrel=epsrel,
                            limit=200)
    u = s + k0
    return val / (profile.V(s) * u ** (m - 1.0))


# ---------------------------------------------------------------------------
# Profile table export.
# ---------------------------------------------------------------------------

def default_table_grid(profile: MetricProfile, rows: int = 512) -> np.ndarray:
    if profile.compact:
        return np.linspace(0.0, profile.s_star, rows + 1)
    start = 1e-3 * profile.kappa0
    return np.concatenate([[0.0],
                           np.geomspace(start, 1e3 * max(profile.kappa0, 1.0),
                                        rows)])


def profile_table(profile: MetricProfile,
                  s_values: Optional[Sequence[float]] = None) -> list[dict]:
    """Rows of (s, t, alpha, f, beta_1..beta_r, phi, u).

    ``u`` is the quasi-Einstein potential -m log(phi).  The arc-length
    column accumulates segment quadratures so each row costs one short
    integral.
    """
    s_vals = default_table_grid(profile) if s_values is None \
        else np.asarray(s_values, dtype=float)
    r = profile.spec.r
    rows = []
    t_prev, s_prev = 0.0, 0.0
    s_star = profile.s_star
    for s in s_vals:
        s = float(s)
        if s == 0.0:
            t = 0.0
        elif s_prev == 0.0:
            t = arc_length(lambda x: profile.alpha(x), s, s_star,
                           head_scale=profile.kappa0)
        elif profile.compact and s > 0.9 * s_star:
            mid = max(s_prev, 0.9 * s_star)
            seg = 0.0
            if mid > s_prev:
                seg, _ = integrate.quad(
                    lambda x: 1.0 / math.sqrt(profile.alpha(x)), s_prev, mid,
                    epsabs=0.0, epsrel=1e-10, limit=200)
            seg += _tail_piece(lambda x: profile.alpha(x), s_star,
                               s_star - s, s_star - mid, profile.kappa0)
            t = t_prev + seg
        else:
            seg, _ = integrate.quad(
                lambda x: 1.0 / math.sqrt(profile.alpha(x)), s_prev, s,
                epsabs=0.0, epsrel=1e-10, limit=200)
            t = t_prev + seg
        al = float(profile.alpha(s))
        row = {"s": s, "t": t, "alpha": al,
               "f": math.sqrt(max(al, 0.0))}
        for i in range(r):
            row[f"beta_{i + 1}"] = float(profile.beta(i, s))
        row["phi"] = float(profile.phi(s))
        row["u"] = float(profile.potential(s))
        rows.append(row)
        t_prev, s_prev = t, s
    return rows


def write_profile_csv(profile: MetricProfile, path: Union[str, Path],
                      s_values: Optional[Sequence[float]] = None) -> None:
    """Deterministic CSV: fixed column order, 17 significant digits."""
    rows = profile_table(profile, s_values)
    header = list(rows[0].keys())
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{row[k]:.17g}" for k in header])
