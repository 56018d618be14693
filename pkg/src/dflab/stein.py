"""Stein neighborhood analysis on a boundary annulus.

The period of the boundary one-form over the inner annulus rim gives the
constant c1; a1 = (c1 / 4 pi) log(A/B) decides existence of a Stein
neighborhood basis (|a1| < pi yes, > pi no).  The same twist bound C
gives the exterior-side exponent threshold tau > pi/(pi - 2 C log(B/A)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .complexform import (BoundaryClassification, alpha_coefficients,
                          boundary_complex_jet)
from .dfindex import AnnulusInvariant, df_upper_bound, KAPPA_TOL
from .distance import AmbientPoint, ambient_gradient, project_to_boundary
from .errors import DegenerateNormal, HypothesisViolation
from .profiles import HartogsProfile

# |a1| within this distance of pi is reported inconclusive.
PI_TOL = 1e-9


@dataclass
class SteinReport:
    c1: float
    c1_quadrature: float
    a1: float
    verdict: str                  # exists | not_exists | inconclusive
    threshold_lhs: float          # |d^2 sdist/dz dwbar| at |z| = sqrt(A)
    threshold_rhs: float          # pi / (2 sqrt(A) |log(A/B)|)


@dataclass
class SteinnessBound:
    C: float
    feasible: bool
    tau_lower: float | None


def _rim_point(profile: HartogsProfile, t: float,
               w_anchor: complex) -> AmbientPoint:
    p = AmbientPoint(math.sqrt(t), w_anchor)
    rho, grad = ambient_gradient(profile, p)
    if abs(rho) / max(np.linalg.norm(grad), 1e-30) > 1e-10:
        p = project_to_boundary(profile, p).foot
    return p


def alpha_period_c1(profile: HartogsProfile, inv: AnnulusInvariant) -> float:
    """Closed-form period of the boundary one-form over the inner rim:
    c1 = -2 Re(2 pi i A rho_twbar(A, w) / rho_wbar(A, w)), derivatives of
    the signed-distance profile."""
    if inv.A <= 0.0:
        raise HypothesisViolation("inner rim requires A > 0")
    p = _rim_point(profile, inv.A, inv.w_anchor)
    jet = boundary_complex_jet(profile, p)
    if abs(jet.d_w) <= 1e-10:
        raise DegenerateNormal("rho_wbar vanishes on the inner rim")
    rho_twbar = jet.d_zwbar / np.conj(p.z)
    rho_wbar = np.conj(jet.d_w)
    return float(-2.0 * (2.0j * math.pi * inv.A * rho_twbar / rho_wbar).real)


def alpha_period_quadrature(profile: HartogsProfile, inv: AnnulusInvariant,
                            n: int = 64) -> float:
    """Independent trapezoid quadrature of the one-form over the inner rim
    circle (z = sqrt(A) e^{i theta}, w = w_anchor)."""
    base = _rim_point(profile, inv.A, inv.w_anchor)
    total = 0.0
    for theta in np.linspace(0.0, 2.0 * math.pi, n, endpoint=False):
        z = abs(base.z) * complex(math.cos(theta), math.sin(theta))
        jet = boundary_complex_jet(profile, AmbientPoint(z, base.w))
        a_dz, _ = alpha_coefficients(jet)
        total += 2.0 * (1j * a_dz * z).real
    return float(total * (2.0 * math.pi / n))


def winding_constant_a1(c1: float, A: float, B: float) -> float:
    """a1 = (c1 / 4 pi) log(A / B)."""
    if not 0.0 < A <= B:
        raise ValueError(f"need 0 < A <= B, got A={A}, B={B}")
    return c1 / (4.0 * math.pi) * math.log(A / B)


def _require_single_annulus(classification: BoundaryClassification):
    comps = classification.components
    if len(comps) != 1 or comps[0].kind != "annulus_like":
        raise HypothesisViolation(
            "analysis requires the weak set to be a single boundary annulus; "
            f"found {[c.kind for c in comps]}")
    return comps[0]


def stein_verdict(profile: HartogsProfile,
                  classification: BoundaryClassification,
                  inv: AnnulusInvariant, tol: float = PI_TOL) -> SteinReport:
    """Stein-neighborhood-basis verdict via |a1| against pi.

    The boundary case |a1| = pi (within ``tol``) is undecided by the
    criterion and reported inconclusive.
    """
    _require_single_annulus(classification)
    c1 = alpha_period_c1(profile, inv)
    c1_quad = alpha_period_quadrature(profile, inv)
    a1 = winding_constant_a1(c1, inv.A, inv.B)
    if abs(a1) < math.pi - tol:
        verdict = "exists"
    elif abs(a1) > math.pi + tol:
        verdict = "not_exists"
    else:
        verdict = "inconclusive"
    p = _rim_point(profile, inv.A, inv.w_anchor)
    jet = boundary_complex_jet(profile, p)
    lhs = abs(jet.d_zwbar)
    log_ratio = abs(math.log(inv.A / inv.B))
    rhs = math.inf if log_ratio == 0.0 else \
        math.pi / (2.0 * math.sqrt(inv.A) * log_ratio)
    return SteinReport(c1=c1, c1_quadrature=c1_quad, a1=a1, verdict=verdict,
                       threshold_lhs=lhs, threshold_rhs=rhs)


def df_one_implies_snb_check(profile: HartogsProfile,
                             classification: BoundaryClassification,
                             inv: AnnulusInvariant) -> bool:
    """Whether the twist vanishes at the inner rim, kappa(A) < tol.

    When the upper bound equals one this must hold (continuity forces the
    mixed derivative to vanish at |z|^2 = A), which ties the index-one
    case to the existence verdict.
    """
    _require_single_annulus(classification)
    threshold = KAPPA_TOL * max(1.0, inv.C_upper)
    flag = bool(inv.kappa[0] < threshold)
    if df_upper_bound(inv) >= 1.0 - 1e-12 and not flag:
        raise HypothesisViolation(
            "upper bound 1 requires vanishing twist at the inner rim")
    return flag


def steinness_index_bound(inv: AnnulusInvariant) -> SteinnessBound:
    """Exterior-side exponent bound from the twist lower constant.

    Feasible when C < pi / (2 log(B/A)); then every exponent tau > 1 with
    h sdist^tau plurisubharmonic outside the closure satisfies
    tau > pi / (pi - 2 C log(B/A)).
    """
    if not inv.A < inv.B:
        raise ValueError("steinness bound requires A < B")
    c = inv.C_lower
    log_ratio = math.log(inv.B / inv.A)
    feasible = c < math.pi / (2.0 * log_ratio)
    tau_lower = math.pi / (math.pi - 2.0 * c * log_ratio) if feasible else None
    return SteinnessBound(C=c, feasible=feasible, tau_lower=tau_lower)
