"""Numerical plurisubharmonicity certification of sigma = -h(-sdist)^tau
on interior collars (or h sdist^tau on exterior collars), and the
bisection estimate of the largest certifiable exponent.

The complex Hessian of sigma is assembled by the exact product/chain rule
from the transported signed-distance jet and the weight jet; positivity
is tested on the congruence-scaled matrix diag(1, |sdist|) H diag(1, |sdist|)
/ |sdist|^tau, whose entries stay O(1) down to the boundary.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .complexform import (ComplexJet2, boundary_complex_jet,
                          interior_complex_jet, wirtinger_from_real)
from .dfindex import GCandidate, KAPPA_TOL, build_g, curvature_profile
from .distance import (AmbientPoint, ambient_gradient, project_to_boundary)
from .errors import (NoBracket, NonPositive, NotAnnulus, OutsideCollar,
                     WindowTooWide)
from .profiles import HartogsProfile

# PSD slack relative to the squared norm of the scaled Hessian.
TOL_PSD = 1e-9
# Grid samples whose Levi form is below this (relative) level join the
# trigonometric-weight zone during bisection.
ZONE_LEVI = 1e-2
TWO_PI = 2.0 * math.pi


@dataclass
class WeightJet:
    value: float
    d_z: complex
    d_w: complex
    d_zzbar: complex
    d_zwbar: complex
    d_wwbar: complex


class ConstantWeight:
    """Rotationally averaged constant weight (value includes the 2 pi of
    the averaging convention)."""

    def __init__(self, value: float = 1.0) -> None:
        self.base = value

    def cjet(self, p: AmbientPoint) -> WeightJet:
        return WeightJet(TWO_PI * self.base, 0.0j, 0.0j, 0.0j, 0.0j, 0.0j)


class GWeight:
    """Averaged weight 2 pi g(|z|^2)^(1 - tau) built from a trigonometric
    weight core."""

    def __init__(self, core: GCandidate) -> None:
        self.core = core
        self.exponent = 1.0 - core.tau

    def cjet(self, p: AmbientPoint) -> WeightJet:
        t = abs(p.z) ** 2
        g = self.core.value(t)
        if g <= 0.0:
            raise NonPositive(f"weight core g({t}) = {g} <= 0")
        g1 = self.core.deriv1(t)
        g2 = self.core.deriv2(t)
        e = self.exponent
        h = TWO_PI * g ** e
        h_t = TWO_PI * e * g ** (e - 1.0) * g1
        h_tt = TWO_PI * e * ((e - 1.0) * g ** (e - 2.0) * g1 * g1
                             + g ** (e - 1.0) * g2)
        zbar = np.conj(p.z)
        return WeightJet(value=h, d_z=h_t * zbar, d_w=0.0j,
                         d_zzbar=h_t + t * h_tt,
                         d_zwbar=0.0j, d_wwbar=0.0j)


class AveragedWeight:
    """Weight from an ambient positive function, rotationally averaged by
    periodic quadrature; jets by central differences."""

    def __init__(self, h_ambient, n_quad: int = 64, fd_step: float = 1e-5):
        self.h = h_ambient
        self.n_quad = n_quad
        self.fd_step = fd_step

    def value(self, z: complex, w: complex) -> float:
        total = 0.0
        for theta in np.linspace(0.0, TWO_PI, self.n_quad, endpoint=False):
            total += self.h(z * complex(math.cos(theta), math.sin(theta)), w)
        return total * (TWO_PI / self.n_quad)

    def cjet(self, p: AmbientPoint) -> WeightJet:
        h = self.fd_step
        v0 = p.vec4()

        def at(v):
            return self.value(complex(v[0], v[1]), complex(v[2], v[3]))

        grad = np.zeros(4)
        hess = np.zeros((4, 4))
        f0 = at(v0)
        for i in range(4):
            ei = np.zeros(4)
            ei[i] = h
            grad[i] = (at(v0 + ei) - at(v0 - ei)) / (2 * h)
            hess[i, i] = (at(v0 + ei) - 2 * f0 + at(v0 - ei)) / h ** 2
        for i in range(4):
            for j in range(i + 1, 4):
                ei = np.zeros(4)
                ej = np.zeros(4)
                ei[i] = h
                ej[j] = h
                hess[i, j] = hess[j, i] = (
                    at(v0 + ei + ej) - at(v0 + ei - ej)
                    - at(v0 - ei + ej) + at(v0 - ei - ej)) / (4 * h * h)
        from .distance import RealHessian4
        cj = wirtinger_from_real(RealHessian4(h=hess), grad)
        return WeightJet(value=f0, d_z=cj.d_z, d_w=cj.d_w,
                         d_zzbar=cj.d_zzbar, d_zwbar=cj.d_zwbar,
                         d_wwbar=cj.d_wwbar)


def rotational_average(h_ambient, n_quad: int = 64):
    """Average an ambient function over the z-rotation orbit; the paper's
    convention keeps the measure d theta (total mass 2 pi)."""
    avg = AveragedWeight(h_ambient, n_quad=n_quad)
    return avg.value


@dataclass
class ExhaustionCandidate:
    """Weight and exponent for sigma = -h_avg (-sdist)^tau (interior) or
    h_avg sdist^tau (exterior)."""

    weight: object
    tau: float
    side: str = "interior"


def constant_candidate(tau: float, side: str = "interior",
                       value: float = 1.0) -> ExhaustionCandidate:
    return ExhaustionCandidate(weight=ConstantWeight(value), tau=tau, side=side)


def candidate_from_g(core: GCandidate,
                     side: str = "interior") -> ExhaustionCandidate:
    return ExhaustionCandidate(weight=GWeight(core), tau=core.tau, side=side)


# ---------------------------------------------------------------------------
# Complex Hessian of sigma
# ---------------------------------------------------------------------------

def sigma_hessian(profile: HartogsProfile, candidate: ExhaustionCandidate,
                  p: AmbientPoint, proj=None) -> np.ndarray:
    """Exact 2x2 complex Hessian of sigma at a collar point.

    Uses the full product/chain rule on the transported distance jet, not
    the boundary-limit truncations (see abc_limit_matrix for those).
    """
    if proj is None:
        proj = project_to_boundary(profile, p)
    sd = proj.sdist
    if candidate.side == "interior" and sd >= 0.0:
        raise OutsideCollar(f"interior candidate evaluated at sdist={sd:.3e}")
    if candidate.side == "exterior" and sd <= 0.0:
        raise OutsideCollar(f"exterior candidate evaluated at sdist={sd:.3e}")
    jet = interior_complex_jet(profile, p, proj)
    wj = candidate.weight.cjet(p)
    tau = candidate.tau
    d = abs(sd)
    dvec = (jet.d_z, jet.d_w)
    hvec = (wj.d_z, wj.d_w)
    herm_delta = ((jet.d_zzbar, jet.d_zwbar),
                  (np.conj(jet.d_zwbar), jet.d_wwbar))
    herm_h = ((wj.d_zzbar, wj.d_zwbar),
              (np.conj(wj.d_zwbar), wj.d_wwbar))
    out = np.zeros((2, 2), dtype=complex)
    for j in range(2):
        for k in range(2):
            bracket = (hvec[j] * np.conj(dvec[k])
                       + np.conj(hvec[k]) * dvec[j]
                       + wj.value * herm_delta[j][k])
            quad = wj.value * dvec[j] * np.conj(dvec[k])
            if candidate.side == "interior":
                out[j, k] = (-herm_h[j][k] * d ** tau
                             + tau * d ** (tau - 1.0) * bracket
                             + tau * (1.0 - tau) * d ** (tau - 2.0) * quad)
            else:
                out[j, k] = (herm_h[j][k] * d ** tau
                             + tau * d ** (tau - 1.0) * bracket
                             + tau * (tau - 1.0) * d ** (tau - 2.0) * quad)
    return out


def scaled_sigma_hessian(profile: HartogsProfile,
                         candidate: ExhaustionCandidate, p: AmbientPoint,
                         proj=None) -> np.ndarray:
    """Congruence-scaled Hessian diag(1, d) H diag(1, d) / d^tau: the same
    positivity content with entries O(1) in the depth d."""
    if proj is None:
        proj = project_to_boundary(profile, p)
    h = sigma_hessian(profile, candidate, p, proj)
    d = abs(proj.sdist)
    scale = np.diag([1.0, d])
    return scale @ h @ scale / d ** candidate.tau


def abc_limit_matrix(profile: HartogsProfile, candidate: ExhaustionCandidate,
                     p: AmbientPoint):
    """Boundary-limit entries (a, b, c) of the scaled Hessian on a flat
    annulus: a = 4 h tau |rho_tw|^2 t - h_zzbar, b = tau(1-tau) h / 4,
    c = h tau rho_twbar zbar + tau h_z sdist_wbar (signs flip on the
    exterior side)."""
    jet = boundary_complex_jet(profile, p)
    if abs(jet.d_z) > 1e-6 or abs(jet.d_zzbar) > 1e-6:
        raise NotAnnulus(
            f"point is not on a flat annulus: |d_z|={abs(jet.d_z):.2e}, "
            f"|d_zzbar|={abs(jet.d_zzbar):.2e}")
    wj = candidate.weight.cjet(p)
    tau = candidate.tau
    a = 4.0 * wj.value * tau * abs(jet.d_zw) ** 2 - wj.d_zzbar.real
    b = 0.25 * tau * (1.0 - tau) * wj.value
    c = wj.value * tau * jet.d_zwbar + tau * wj.d_z * np.conj(jet.d_w)
    if candidate.side == "exterior":
        a = -a
        b = -b
    return float(a), float(b), complex(c)


# ---------------------------------------------------------------------------
# Collar grids and certification
# ---------------------------------------------------------------------------

@dataclass
class CollarGrid:
    """Offset boundary feet with verified projections."""

    points: list                   # (AmbientPoint, foot AmbientPoint, depth)
    side: str
    d_min: float
    d_max: float


def make_collar_grid(profile: HartogsProfile, feet, depths,
                     side: str = "interior") -> CollarGrid:
    """Offset each foot along its normal; points whose projection does not
    return to the generating foot (reach exceeded) are dropped."""
    sign = -1.0 if side == "interior" else 1.0
    points = []
    for foot in feet:
        _, grad = ambient_gradient(profile, foot)
        n = grad / np.linalg.norm(grad)
        for depth in depths:
            x = AmbientPoint.from_vec4(foot.vec4() + sign * depth * n)
            try:
                proj = project_to_boundary(profile, x, seed=foot)
            except OutsideCollar:
                continue
            if abs(abs(proj.sdist) - depth) > 1e-8 * (1.0 + depth):
                continue
            points.append((x, foot, float(depth)))
    if not points:
        raise OutsideCollar("no grid point admitted a verified projection")
    return CollarGrid(points=points, side=side,
                      d_min=min(p[2] for p in points),
                      d_max=max(p[2] for p in points))


def default_feet(profile: HartogsProfile, n_boundary: int = 128):
    """Feet roughly uniform in the (slice, ray angle) boundary parameters."""
    from .distance import slice_point
    n_t = max(4, int(round(math.sqrt(2 * n_boundary))))
    n_phase = max(4, n_boundary // n_t)
    lo, hi = profile.t_window
    pad = 1e-3 * (hi - lo)
    feet = []
    for t in np.linspace(lo + pad, hi - pad, n_t):
        for phase in np.linspace(0.0, TWO_PI, n_phase, endpoint=False):
            w = slice_point(profile, float(t), float(phase))
            if w is None:
                continue
            feet.append(AmbientPoint(math.sqrt(max(float(t), 0.0)), w))
    return feet


def default_depths(d_min: float = 1e-4, d_max: float = 1e-2, n: int = 6):
    return list(np.geomspace(d_min, d_max, n))


@dataclass
class CertificateReport:
    passed: bool
    min_scaled_determinant: float      # normalized by the squared norm
    min_b: float
    worst_point: AmbientPoint | None
    grid_size: int
    tau: float
    side: str
    n_failures: int = 0
    notes: list = field(default_factory=list)


def _n_threads() -> int:
    try:
        return max(1, int(os.environ.get("DFLAB_THREADS", "1")))
    except ValueError:
        return 1


def certify(profile: HartogsProfile, candidate: ExhaustionCandidate,
            grid: CollarGrid, seed: int = 0,
            tol_psd: float = TOL_PSD) -> CertificateReport:
    """Positive-semidefiniteness scan of the sigma Hessian over a collar
    grid.  Failures are report content, not exceptions.

    The b entry must be positive and the determinant of the scaled matrix
    may not fall below -tol_psd times its squared norm; ten percent of the
    points additionally get random-direction quadratic-form spot checks.
    """
    if candidate.side != grid.side:
        raise ValueError(f"candidate side {candidate.side!r} does not match "
                         f"grid side {grid.side!r}")
    rng = np.random.default_rng(seed)
    spot_every = 10

    def evaluate(item):
        x, foot, _depth = item
        proj = project_to_boundary(profile, x, seed=foot)
        m = scaled_sigma_hessian(profile, candidate, x, proj)
        norm2 = max(float(np.linalg.norm(m)) ** 2, 1e-300)
        det = float(np.linalg.det(m).real) / norm2
        b = float(m[1, 1].real)
        return det, b, m, norm2

    n_workers = _n_threads()
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(evaluate, grid.points))
    else:
        results = [evaluate(item) for item in grid.points]

    passed = True
    min_det = math.inf
    min_b = math.inf
    worst = None
    failures = 0
    notes = []
    for idx, ((x, _foot, _d), (det, b, m, norm2)) in enumerate(
            zip(grid.points, results)):
        if det < min_det:
            min_det = det
            worst = x
        min_b = min(min_b, b)
        ok = b > 0.0 and det >= -tol_psd
        if ok and idx % spot_every == 0:
            for _ in range(8):
                v = rng.normal(size=2) + 1j * rng.normal(size=2)
                v /= np.linalg.norm(v)
                q = float((np.conj(v) @ m @ v).real)
                if q < -tol_psd * math.sqrt(norm2):
                    ok = False
                    notes.append(f"direction check failed at {x}")
                    break
        if not ok:
            failures += 1
            passed = False
    return CertificateReport(passed=passed, min_scaled_determinant=min_det,
                             min_b=min_b, worst_point=worst,
                             grid_size=len(grid.points), tau=candidate.tau,
                             side=grid.side, n_failures=failures, notes=notes)


def export_certificate_scan(profile, candidate, grid, path):
    """CSV of per-point (t, depth, normalized det, b) over the grid."""
    import csv
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "depth", "det_normalized", "b"])
        for x, foot, depth in grid.points:
            proj = project_to_boundary(profile, x, seed=foot)
            m = scaled_sigma_hessian(profile, candidate, x, proj)
            norm2 = max(float(np.linalg.norm(m)) ** 2, 1e-300)
            writer.writerow([abs(foot.z) ** 2, depth,
                             float(np.linalg.det(m).real) / norm2,
                             float(m[1, 1].real)])


# ---------------------------------------------------------------------------
# Bisection over the exponent
# ---------------------------------------------------------------------------

@dataclass
class BisectZones:
    """Certification zones: one trigonometric-weight zone per annulus with
    its padded window, plus the strictly pseudoconvex complement."""

    annulus_grids: list            # (CollarGrid, A_win, B_win, C_window)
    complement_grid: CollarGrid | None


def _zone_feet(samples):
    return [AmbientPoint(math.sqrt(max(s.t, 0.0)), s.w) for s in samples]


def build_bisect_zones(profile: HartogsProfile, classification, depths,
                       max_complement: int = 160) -> BisectZones:
    near_weak = [row for row in classification.grid
                 if row.levi < ZONE_LEVI * row.herm_norm]
    complement_rows = [row for row in classification.grid
                       if row.levi >= ZONE_LEVI * row.herm_norm]
    annulus_grids = []
    claimed: set = set()
    for comp in classification.components:
        if comp.kind == "m2_type":
            continue
        lo_t, hi_t = comp.t_range
        samples = list(comp.samples)
        t_vals = sorted({s.t for s in comp.samples})
        step = max(np.diff(t_vals)) if len(t_vals) > 2 else (hi_t - lo_t + 1e-9)
        extra = [row for row in near_weak
                 if lo_t - 4 * step <= row.t <= hi_t + 4 * step]
        claimed.update(id(row) for row in extra)
        a_win = min([s.t for s in samples] + [row.t for row in extra])
        b_win = max([s.t for s in samples] + [row.t for row in extra])
        c_win = max([s.kappa for s in samples]
                    + [row.kappa for row in extra] + [0.0])
        feet = _zone_feet(samples) + [
            AmbientPoint(math.sqrt(max(row.t, 0.0)), row.w) for row in extra]
        grid = make_collar_grid(profile, feet, depths, side="interior")
        annulus_grids.append((grid, a_win, b_win, c_win))
    orphan = [row for row in near_weak if id(row) not in claimed]
    complement_rows.extend(orphan)
    stride = max(1, len(complement_rows) // max_complement)
    feet = [AmbientPoint(math.sqrt(max(row.t, 0.0)), row.w)
            for row in complement_rows[::stride]]
    complement = make_collar_grid(profile, feet, depths, side="interior") \
        if feet else None
    return BisectZones(annulus_grids=annulus_grids, complement_grid=complement)


@dataclass
class BisectResult:
    tau_feasible: float
    tau_infeasible: float
    history: list
    monotone: bool                  # certification monotone along the search


def numeric_df_bisect(profile: HartogsProfile, tolerance: float = 0.02,
                      resolution: int = 96, seed: int = 0,
                      depth_range=(1e-4, 1e-3), n_depths: int = 4,
                      classification=None) -> BisectResult:
    """Bracket the largest certifiable exponent by bisection.

    Feasibility at tau: the trigonometric-weight candidate certifies on
    each annulus zone (window feasibility included) and a constant weight
    certifies on the strictly pseudoconvex complement.
    """
    if tolerance < 0.01:
        raise ValueError("tolerance below 0.01 is not supported")
    from .complexform import classify_weak_set
    if classification is None:
        classification = classify_weak_set(profile, resolution)
    depths = list(np.geomspace(depth_range[0], depth_range[1], n_depths))
    zones = build_bisect_zones(profile, classification, depths)

    def feasible(tau: float) -> bool:
        for grid, a_win, b_win, c_win in zones.annulus_grids:
            if c_win <= KAPPA_TOL:
                cand = constant_candidate(tau)
            else:
                try:
                    core = build_g(tau, c_win, a_win, b_win)
                except WindowTooWide:
                    return False
                cand = candidate_from_g(core)
            if not certify(profile, cand, grid, seed=seed).passed:
                return False
        if zones.complement_grid is not None:
            if not certify(profile, constant_candidate(tau),
                           zones.complement_grid, seed=seed).passed:
                return False
        return True

    lo, hi = 0.01, 0.99
    history = []
    if not feasible(lo):
        raise NoBracket(
            "tau = 0.01 is already infeasible; check collar configuration")
    history.append((lo, True))
    if feasible(hi):
        history.append((hi, True))
        return BisectResult(tau_feasible=hi, tau_infeasible=1.0,
                            history=history, monotone=True)
    history.append((hi, False))
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        ok = feasible(mid)
        history.append((mid, ok))
        if ok:
            lo = mid
        else:
            hi = mid
    flips = [h for h in sorted(history)]
    monotone = all(b >= a for (_, a), (_, b)
                   in zip(flips[1:], flips[:-1]))  # feasible below infeasible
    return BisectResult(tau_feasible=lo, tau_infeasible=hi, history=history,
                        monotone=monotone)
