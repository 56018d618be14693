"""Curvature invariant on boundary annuli and the closed-form bounds it
implies for the largest exponent tau with -h(-sdist)^tau plurisubharmonic.

The invariant kappa(t) = |z| |d^2 sdist / dw dzbar| measures the twisting
of the boundary annulus.  With C a bound for kappa and [A, B] the t-range
of the annulus, both the upper and the lower closed-form bound take the
value pi / (2 C log(B/A) + pi); feasibility of the positive trigonometric
weight g(t) = sin(omega log t + phi) - eps, omega = 2 tau C / (1 - tau),
is governed by the oscillation window omega log(B/A) < pi.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .complexform import BoundaryClassification, WeakComponent, \
    boundary_complex_jet
from .distance import AmbientPoint, ambient_gradient, project_to_boundary
from .errors import IrregularWeakSet, NonPositive, NotAnnulus, WindowTooWide
from .profiles import HartogsProfile

# kappa below this absolute threshold counts as vanishing twist.
KAPPA_TOL = 1e-8


@dataclass
class AnnulusInvariant:
    """Tabulated twist profile kappa(t) on a boundary annulus [A, B]."""

    A: float
    B: float
    w_anchor: complex
    ts: np.ndarray
    kappa: np.ndarray
    C_lower: float
    C_upper: float

    @staticmethod
    def from_table(ts, kappa, w_anchor=0.0j) -> "AnnulusInvariant":
        ts = np.asarray(ts, dtype=float)
        kappa = np.asarray(kappa, dtype=float)
        return AnnulusInvariant(A=float(ts[0]), B=float(ts[-1]),
                                w_anchor=w_anchor, ts=ts, kappa=kappa,
                                C_lower=float(np.min(kappa)),
                                C_upper=float(np.max(kappa)))

    def export_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "kappa"])
            for t, k in zip(self.ts, self.kappa):
                writer.writerow([t, k])


@dataclass
class DFBounds:
    upper: float
    lower: float
    per_component: list
    consistent: bool


def kappa_at(profile: HartogsProfile, t: float, w_anchor: complex) -> float:
    """|z| |d^2 sdist / dw dzbar| at the boundary point over (t, w_anchor),
    computed from the signed-distance complex jet."""
    p = AmbientPoint(math.sqrt(t), w_anchor)
    rho, grad = ambient_gradient(profile, p)
    if abs(rho) / max(np.linalg.norm(grad), 1e-30) > 1e-10:
        p = project_to_boundary(profile, p).foot
    jet = boundary_complex_jet(profile, p)
    return abs(p.z) * abs(jet.d_zwbar)


def effective_band(profile: HartogsProfile, component: WeakComponent,
                   margin: float = 0.0):
    """The t-band on which kappa is extracted.

    Cutoff ramps vanish to infinite order at the edge of the flat band, so
    a sampled t-range always lands within a slice step of the exact band;
    when the profile declares its cutoff-free band, edges within three
    sample steps snap to it.  ``margin`` shrinks the band symmetrically.
    """
    a, b = component.t_range
    band = profile.lambda_free_band
    if band is not None:
        t_vals = sorted({s.t for s in component.samples})
        step = (max(np.diff(t_vals)) if len(t_vals) > 2 else (b - a))
        snap = 3.0 * step
        if abs(a - band[0]) <= snap:
            a = band[0]
        if abs(b - band[1]) <= snap:
            b = band[1]
        a, b = max(a, band[0]), min(b, band[1])
    return a + margin, b - margin


def curvature_profile(profile: HartogsProfile, component: WeakComponent,
                      n_samples: int = 200,
                      margin: float = 0.0) -> AnnulusInvariant:
    """Tabulate kappa over an annulus-like component's effective band."""
    if component.kind == "disk_like":
        raise NotAnnulus("curvature profile requires an annulus-like component")
    a, b = effective_band(profile, component, margin)
    if not a > 0.0:
        raise NotAnnulus(f"annulus band must have A > 0, got {a}")
    ts = np.linspace(a, b, n_samples)
    kappa = np.array([kappa_at(profile, float(t), component.w_anchor)
                      for t in ts])
    return AnnulusInvariant(A=a, B=b, w_anchor=component.w_anchor, ts=ts,
                            kappa=kappa, C_lower=float(np.min(kappa)),
                            C_upper=float(np.max(kappa)))


def df_upper_bound(inv: AnnulusInvariant) -> float:
    """min over sampled sub-annuli [A', B'] of pi/(2 min(kappa) log(B'/A') + pi).

    The closed-form bound holds on every sub-annulus, and optimizing over
    them only strengthens it (kappa may dip near the band edges).
    """
    ts, kap = inv.ts, inv.kappa
    n = len(ts)
    best = 1.0
    logs = np.log(ts)
    for i in range(n):
        run_min = kap[i]
        for j in range(i + 1, n):
            run_min = min(run_min, kap[j])
            if run_min <= KAPPA_TOL:
                break
            bound = math.pi / (2.0 * run_min * (logs[j] - logs[i]) + math.pi)
            if bound < best:
                best = bound
    return best


def lower_bound_for_component(profile: HartogsProfile,
                              component: WeakComponent,
                              n_samples: int = 200):
    """Per-component lower bound; disk-like and d_z != 0 components admit
    weights with no exponent obstruction and contribute 1."""
    if component.kind in ("disk_like", "m2_type"):
        return 1.0, None
    inv = curvature_profile(profile, component, n_samples)
    value = math.pi / (2.0 * inv.C_upper * math.log(inv.B / inv.A) + math.pi)
    return value, inv


def df_lower_bound(profile: HartogsProfile,
                   classification: BoundaryClassification,
                   n_samples: int = 200) -> float:
    """Largest exponent guaranteed by per-component weight constructions,
    combined by minimum."""
    if not classification.is_regular:
        raise IrregularWeakSet("lower bound requires regular weak points")
    best = 1.0
    for component in classification.components:
        value, _ = lower_bound_for_component(profile, component, n_samples)
        best = min(best, value)
    return best


def df_bounds(profile: HartogsProfile,
              classification: BoundaryClassification,
              n_samples: int = 200) -> DFBounds:
    """Upper and lower closed-form bounds with per-component breakdown."""
    if not classification.is_regular:
        raise IrregularWeakSet("bounds require regular weak points")
    upper = 1.0
    lower = 1.0
    per_component = []
    for component in classification.components:
        lo, inv = lower_bound_for_component(profile, component)
        up = df_upper_bound(inv) if inv is not None else 1.0
        per_component.append({
            "kind": component.kind,
            "t_range": component.t_range,
            "upper": up,
            "lower": lo,
            "invariant": inv,
        })
        upper = min(upper, up)
        lower = min(lower, lo)
    return DFBounds(upper=upper, lower=lower, per_component=per_component,
                    consistent=lower <= upper + 1e-12)


# ---------------------------------------------------------------------------
# Trigonometric weight construction and the oscillation window test
# ---------------------------------------------------------------------------

@dataclass
class GCandidate:
    """Positive weight core g(t) = c1 cos(omega log t) + c2 sin(omega log t)
    - eps on [A, B], with omega = 2 tau C / |1 - tau|."""

    tau: float
    C: float
    phi: float
    eps: float
    c1: float
    c2: float
    A: float
    B: float
    omega: float

    def value(self, t):
        return math.sin(self.omega * math.log(t) + self.phi) - self.eps

    def deriv1(self, t):
        return self.omega * math.cos(self.omega * math.log(t) + self.phi) / t

    def deriv2(self, t):
        u = self.omega * math.log(t) + self.phi
        return -(self.omega ** 2 * math.sin(u)
                 + self.omega * math.cos(u)) / t ** 2

    def radial_inequality(self, t):
        """Left side of the linearized positivity requirement
        -tau(1-tau)^2 (g' + t g'')/4 - tau^3 t g C^2/t^2 at t."""
        tau, C = self.tau, self.C
        return (-0.25 * tau * (1.0 - tau) ** 2
                * (self.deriv1(t) + t * self.deriv2(t))
                - tau ** 3 * self.C ** 2 / t * self.value(t))


def sturm_window_check(tau: float, C: float, A: float, B: float) -> str:
    """'infeasible' exactly when the oscillation window
    (2 tau C/(1-tau)) log(B/A) reaches pi, where the comparison ODE
    g'' + g < 0 admits no positive strictly decreasing solution."""
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must be in (0,1), got {tau}")
    if C < 0.0:
        raise ValueError(f"C must be nonnegative, got {C}")
    omega = 2.0 * tau * C / (1.0 - tau)
    return "infeasible" if omega * math.log(B / A) >= math.pi else "feasible"


def build_g(tau: float, C: float, A: float, B: float,
            n_grid: int = 1000) -> GCandidate:
    """Construct the positive trigonometric weight core on [A, B].

    The phase centers the positive sine window on the oscillation range
    and eps is half the window minimum, which makes the linearized
    inequality hold with margin exactly eps tau^3 C^2 / t.  Raises
    WindowTooWide when omega log(B/A) >= pi (no admissible phase).
    """
    if not (0.0 < tau and tau != 1.0):
        raise ValueError(f"tau must be positive and != 1, got {tau}")
    if C < 0.0 or not 0.0 < A <= B:
        raise ValueError("need C >= 0 and 0 < A <= B")
    omega = 2.0 * tau * C / abs(1.0 - tau)
    width = omega * math.log(B / A)
    if width >= math.pi:
        raise WindowTooWide(
            f"omega log(B/A) = {width:.6f} >= pi at tau={tau}, C={C}")
    theta_a = omega * math.log(A)
    theta_b = omega * math.log(B)
    phi = 0.5 * (math.pi - theta_a - theta_b)
    eps = 0.5 * math.cos(0.5 * width)
    cand = GCandidate(tau=tau, C=C, phi=phi, eps=eps,
                      c1=math.sin(phi), c2=math.cos(phi),
                      A=A, B=B, omega=omega)
    ts = np.geomspace(A, B, n_grid) if A < B else np.array([A])
    margin = eps * tau ** 3 * C ** 2
    for t in ts:
        g = cand.value(float(t))
        if g <= 0.0:
            raise NonPositive(f"g({t}) = {g} <= 0 (internal bug guard)")
        lhs = cand.radial_inequality(float(t))
        if lhs < margin / t - 1e-12 * max(1.0, abs(lhs)):
            raise NonPositive(
                f"linearized inequality violated at t={t}: {lhs:.3e}")
    return cand


def good_vector_field_criterion(inv: AnnulusInvariant) -> str:
    """'exists' when the annulus is degenerate (A = B) or the twist
    vanishes on some circle (min kappa = 0); on these domains that is
    equivalent to approximately-normal vector field families existing."""
    if inv.A == inv.B:
        return "exists"
    threshold = KAPPA_TOL * max(1.0, inv.C_upper)
    return "exists" if inv.C_lower <= threshold else "not_exists"


def export_g_profile(cand: GCandidate, path, n: int = 200):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "g"])
        for t in np.geomspace(cand.A, cand.B, n):
            writer.writerow([t, cand.value(float(t))])
