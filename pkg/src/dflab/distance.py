"""Signed distance machinery near the boundary of a Hartogs profile.

Closest points are solved in reduced coordinates (|z|, Re w, Im w): the
rotation invariance of rho means the ambient Euclidean distance between
orbits equals the reduced Euclidean distance after phase alignment, so a
3-space Lagrange-Newton solve suffices.  The boundary Hessian of the
signed distance is the tangentially projected Hessian of rho/|grad rho|
(Weingarten map), and interior values follow from the exact transport
formula H(x) = H(pi(x)) (I + sdist H(pi(x)))^{-1}.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .errors import (DegenerateGradient, DomainError, OutsideCollar,
                     ProjectionDiverged, SingularTransport)
from .profiles import HartogsProfile

PROJECTION_TOL = 1e-12
PROJECTION_MAX_ITER = 100
TRANSPORT_COND_LIMIT = 1e12


class AmbientPoint(NamedTuple):
    z: complex
    w: complex

    def vec4(self) -> np.ndarray:
        return np.array([self.z.real, self.z.imag, self.w.real, self.w.imag])

    @staticmethod
    def from_vec4(v) -> "AmbientPoint":
        return AmbientPoint(complex(v[0], v[1]), complex(v[2], v[3]))


@dataclass
class ProjectionResult:
    foot: AmbientPoint
    sdist: float
    grad: np.ndarray          # unit outward gradient of the signed distance
    converged: bool
    iterations: int


@dataclass
class RealHessian4:
    """Symmetric 4x4 Hessian of the signed distance in (x, y, u, v)."""

    h: np.ndarray


def ambient_gradient(profile: HartogsProfile, p: AmbientPoint):
    """(rho, grad rho) on C^2 = R^4 from the reduced jet, t = |z|^2."""
    jet = profile.jet(abs(p.z) ** 2, p.w)
    rho_t = jet.d(1)
    grad = np.array([2.0 * p.z.real * rho_t, 2.0 * p.z.imag * rho_t,
                     jet.d(0, 1, 0), jet.d(0, 0, 1)])
    return jet.value, grad


def ambient_hessian(profile: HartogsProfile, p: AmbientPoint):
    """(rho, grad rho, Hess rho) on R^4 from the reduced jet."""
    x, y = p.z.real, p.z.imag
    jet = profile.jet(x * x + y * y, p.w)
    rt, rtt = jet.d(1), jet.d(2)
    rtu, rtv = jet.d(1, 1, 0), jet.d(1, 0, 1)
    grad = np.array([2 * x * rt, 2 * y * rt, jet.d(0, 1, 0), jet.d(0, 0, 1)])
    hess = np.array([
        [2 * rt + 4 * x * x * rtt, 4 * x * y * rtt, 2 * x * rtu, 2 * x * rtv],
        [4 * x * y * rtt, 2 * rt + 4 * y * y * rtt, 2 * y * rtu, 2 * y * rtv],
        [2 * x * rtu, 2 * y * rtu, jet.d(0, 2, 0), jet.d(0, 1, 1)],
        [2 * x * rtv, 2 * y * rtv, jet.d(0, 1, 1), jet.d(0, 0, 2)],
    ])
    return jet.value, grad, hess


# ---------------------------------------------------------------------------
# Boundary sampling (seeds for projection, grids for classification)
# ---------------------------------------------------------------------------

def slice_point(profile: HartogsProfile, t: float, phase: float):
    """One point of the w-slice {rho(t, .) = 0} in the ray direction
    ``phase`` from the slice center, or None for a degenerate slice."""
    if profile.slice_geometry is not None:
        center, radius = profile.slice_geometry(t)
        if radius <= 0.0:
            return None
        return center + radius * complex(math.cos(phase), math.sin(phase))
    center = profile.slice_center(t)
    if profile.rho(t, center) >= -1e-12:
        return None
    direction = complex(math.cos(phase), math.sin(phase))

    def along(radius):
        return profile.rho(t, center + radius * direction)

    hi = 1.0
    doublings = 0
    while along(hi) < 0.0:
        hi *= 2.0
        doublings += 1
        if doublings > 40:
            raise DomainError(f"slice t={t} appears unbounded")
    return center + brentq(along, 0.0, hi, xtol=1e-14) * direction


def slice_curve(profile: HartogsProfile, t: float, n_phase: int):
    """Sample the w-slice at ``n_phase`` ray angles; empty if degenerate."""
    out = []
    for phase in np.linspace(0.0, 2.0 * math.pi, n_phase, endpoint=False):
        w = slice_point(profile, t, phase)
        if w is None:
            return []
        out.append(w)
    return out


def _window_slices(profile: HartogsProfile, n_t: int, inset: float = 1e-4):
    lo, hi = profile.t_window
    pad = inset * (hi - lo)
    return np.linspace(lo + pad, hi - pad, n_t)


@lru_cache(maxsize=64)
def _cloud_cache(profile: HartogsProfile, n_t: int, n_phase: int):
    pts = []
    for t in _window_slices(profile, n_t):
        rr = math.sqrt(max(t, 0.0))
        for w in slice_curve(profile, t, n_phase):
            pts.append((rr, w.real, w.imag))
    if not pts:
        raise DomainError("profile boundary produced no slice samples")
    return np.array(pts)


def boundary_cloud(profile: HartogsProfile, n_t: int = 48,
                   n_phase: int = 24) -> np.ndarray:
    """Cached coarse sample of the reduced boundary surface, rows (r, u, v)."""
    return _cloud_cache(profile, n_t, n_phase)


# ---------------------------------------------------------------------------
# Closest-point projection
# ---------------------------------------------------------------------------

def _reduced_F(profile, y):
    """Value, gradient, Hessian of F(r,u,v) = rho(r^2, u+iv); r may be
    negative (mirror branch), the surface is even in r."""
    r, u, v = y
    jet = profile.jet(r * r, complex(u, v))
    rt, rtt = jet.d(1), jet.d(2)
    grad = np.array([2 * r * rt, jet.d(0, 1, 0), jet.d(0, 0, 1)])
    hess = np.array([
        [2 * rt + 4 * r * r * rtt, 2 * r * jet.d(1, 1, 0), 2 * r * jet.d(1, 0, 1)],
        [2 * r * jet.d(1, 1, 0), jet.d(0, 2, 0), jet.d(0, 1, 1)],
        [2 * r * jet.d(1, 0, 1), jet.d(0, 1, 1), jet.d(0, 0, 2)],
    ])
    return jet.value, grad, hess


def _newton_foot(profile, target, y0):
    """Lagrange-Newton for the closest point on {F = 0} to ``target``."""
    y = np.array(y0, dtype=float)
    fval, fgrad, _ = _reduced_F(profile, y)
    gg = float(fgrad @ fgrad)
    if gg < 1e-30:
        return None
    s = float((target - y) @ fgrad) / gg
    scale = 1.0 + float(np.linalg.norm(target))

    def residual(yv, sv):
        fv, fg, fh = _reduced_F(profile, yv)
        r1 = yv - target + sv * fg
        gn = max(float(np.linalg.norm(fg)), 1e-15)
        return np.concatenate([r1, [fv / gn]]), fv, fg, fh, gn

    res, fval, fgrad, fhess, gnorm = residual(y, s)
    best = float(np.linalg.norm(res))
    # Polish well past the convergence tolerance: the finite-difference
    # Hessian oracle divides sdist noise by h^2.
    polish_tol = 50.0 * np.finfo(float).eps * scale
    for it in range(1, PROJECTION_MAX_ITER + 1):
        if best < polish_tol:
            return y, it - 1, best
        jac = np.zeros((4, 4))
        jac[:3, :3] = np.eye(3) + s * fhess
        jac[:3, 3] = fgrad
        jac[3, :3] = fgrad / gnorm
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            break
        damp = 1.0
        improved = False
        for _ in range(30):
            y_new = y + damp * step[:3]
            s_new = s + damp * step[3]
            try:
                res_new, fval, fgrad, fhess, gnorm = residual(y_new, s_new)
            except DomainError:
                damp *= 0.5
                continue
            norm_new = float(np.linalg.norm(res_new))
            if norm_new < best:
                y, s, res, best = y_new, s_new, res_new, norm_new
                improved = True
                break
            damp *= 0.5
        if not improved:
            break
    if best < PROJECTION_TOL * scale:
        return y, PROJECTION_MAX_ITER, best
    return None


def project_to_boundary(profile: HartogsProfile, x: AmbientPoint,
                        seed: AmbientPoint | None = None) -> ProjectionResult:
    """Closest boundary point, signed distance and unit gradient at x.

    Raises OutsideCollar when the first-order distance estimate
    |rho| / |grad rho| exceeds the profile's collar halfwidth, and
    ProjectionDiverged when no Newton seed converges.
    """
    rho_x, grad_x = ambient_gradient(profile, x)
    gnorm = float(np.linalg.norm(grad_x))
    if gnorm < 1e-14:
        raise DegenerateGradient(f"gradient vanishes at {x}")
    estimate = abs(rho_x) / gnorm
    if estimate > profile.collar_halfwidth:
        raise OutsideCollar(
            f"distance estimate {estimate:.3e} exceeds collar "
            f"{profile.collar_halfwidth:.3e}")

    target = np.array([abs(x.z), x.w.real, x.w.imag])
    if seed is not None:
        seeds = [np.array([abs(seed.z), seed.w.real, seed.w.imag])]
    else:
        cloud = boundary_cloud(profile)
        d2 = np.sum((cloud - target) ** 2, axis=1)
        order = np.argsort(d2)
        seeds = [cloud[i] for i in order[:8]]

    best = None
    iterations = 0
    for y0 in seeds:
        got = _newton_foot(profile, target, y0)
        if got is None:
            continue
        y, it, _ = got
        dist = float(np.linalg.norm(y - target))
        if best is None or dist < best[1] - 1e-15:
            best = (y, dist)
            iterations = it
        if seed is not None:
            break
    if best is None:
        raise ProjectionDiverged(f"projection failed at {x}")

    y, dist = best
    phase = math.atan2(x.z.imag, x.z.real) if abs(x.z) > 0 else 0.0
    if y[0] < 0.0:
        phase += math.pi
    foot = AmbientPoint(abs(y[0]) * complex(math.cos(phase), math.sin(phase)),
                        complex(y[1], y[2]))
    sdist = math.copysign(dist, rho_x) if rho_x != 0.0 else 0.0
    _, gfoot = ambient_gradient(profile, foot)
    gn = float(np.linalg.norm(gfoot))
    if gn < 1e-10:
        raise DegenerateGradient(f"gradient vanishes at foot {foot}")
    return ProjectionResult(foot=foot, sdist=sdist, grad=gfoot / gn,
                            converged=True, iterations=iterations)


def signed_distance(profile: HartogsProfile, x: AmbientPoint,
                    seed: AmbientPoint | None = None) -> float:
    return project_to_boundary(profile, x, seed=seed).sdist


# ---------------------------------------------------------------------------
# Hessians of the signed distance
# ---------------------------------------------------------------------------

def boundary_real_hessian(profile: HartogsProfile,
                          p: AmbientPoint) -> RealHessian4:
    """Hessian of the signed distance at a boundary point: the Hessian of
    rho scaled by 1/|grad rho| and projected onto the tangent space."""
    rho, grad, hess = ambient_hessian(profile, p)
    gnorm = float(np.linalg.norm(grad))
    if gnorm < 1e-10:
        raise DegenerateGradient(f"|grad rho| = {gnorm:.3e} at {p}")
    if abs(rho) / gnorm > 1e-10:
        raise OutsideCollar(f"point {p} is not on the boundary: rho={rho:.3e}")
    n = grad / gnorm
    proj = np.eye(4) - np.outer(n, n)
    h = proj @ (hess / gnorm) @ proj
    return RealHessian4(h=0.5 * (h + h.T))


def transport_hessian(h_foot: np.ndarray, sdist: float) -> np.ndarray:
    """Exact interior transport H(x) = H (I + sdist H)^{-1} via the
    eigendecomposition of the boundary Hessian."""
    vals, vecs = np.linalg.eigh(h_foot)
    denom = 1.0 + sdist * vals
    if np.min(np.abs(denom)) < 1e-12 or (
            np.max(np.abs(denom)) / np.min(np.abs(denom))) > TRANSPORT_COND_LIMIT:
        raise SingularTransport(
            f"focal point reached at depth {sdist:.3e}; shrink the collar")
    return (vecs * (vals / denom)) @ vecs.T


def interior_real_hessian(profile: HartogsProfile, x: AmbientPoint,
                          proj: ProjectionResult | None = None) -> RealHessian4:
    """Hessian of the signed distance at a collar point by transport from
    the closest boundary point."""
    if proj is None:
        proj = project_to_boundary(profile, x)
    hb = boundary_real_hessian(profile, proj.foot).h
    return RealHessian4(h=transport_hessian(hb, proj.sdist))


def fd_real_hessian(profile: HartogsProfile, x: AmbientPoint,
                    steps=(1e-4, 5e-5)) -> RealHessian4:
    """Independent oracle: Richardson-extrapolated central differences of
    the signed distance (projection-based) on the ambient 4-space."""
    base = project_to_boundary(profile, x)
    seed = base.foot
    v0 = x.vec4()

    def sdist_at(v):
        return project_to_boundary(profile, AmbientPoint.from_vec4(v),
                                   seed=seed).sdist

    def hessian_for(h):
        hmat = np.zeros((4, 4))
        f0 = base.sdist
        for i in range(4):
            ei = np.zeros(4)
            ei[i] = h
            hmat[i, i] = (sdist_at(v0 + ei) - 2 * f0 + sdist_at(v0 - ei)) / h**2
        for i in range(4):
            for j in range(i + 1, 4):
                ei = np.zeros(4)
                ej = np.zeros(4)
                ei[i] = h
                ej[j] = h
                val = (sdist_at(v0 + ei + ej) - sdist_at(v0 + ei - ej)
                       - sdist_at(v0 - ei + ej) + sdist_at(v0 - ei - ej)) \
                    / (4 * h * h)
                hmat[i, j] = hmat[j, i] = val
        return hmat

    h1, h2 = steps
    if abs(h1 - 2.0 * h2) > 1e-12 * h1:
        raise ValueError("steps must satisfy h2 = h1/2 for Richardson")
    coarse = hessian_for(h1)
    fine = hessian_for(h2)
    return RealHessian4(h=(4.0 * fine - coarse) / 3.0)


# ---------------------------------------------------------------------------
# Collar point sampling and diagnostics
# ---------------------------------------------------------------------------

def random_boundary_point(profile: HartogsProfile, rng) -> AmbientPoint:
    """Random boundary point: random slice, random ray angle, random z-phase."""
    lo, hi = profile.t_window
    pad = 1e-3 * (hi - lo)
    for _ in range(200):
        t = rng.uniform(lo + pad, hi - pad)
        w = slice_point(profile, t, rng.uniform(0.0, 2.0 * math.pi))
        if w is None:
            continue
        phase = rng.uniform(0.0, 2.0 * math.pi)
        return AmbientPoint(math.sqrt(max(t, 0.0))
                            * complex(math.cos(phase), math.sin(phase)), w)
    raise DomainError("could not sample a boundary point")


def sample_collar_points(profile: HartogsProfile, n: int, rng,
                         depth_range=(2e-4, 2e-3), two_sided=True):
    """Random points in the collar: random boundary feet offset along the
    normal, with a random z-phase applied to exercise rotation covariance."""
    out = []
    while len(out) < n:
        foot = random_boundary_point(profile, rng)
        _, grad = ambient_gradient(profile, foot)
        nvec = grad / np.linalg.norm(grad)
        depth = math.exp(rng.uniform(math.log(depth_range[0]),
                                     math.log(depth_range[1])))
        sign = -1.0 if (not two_sided or rng.uniform() < 0.5) else 1.0
        out.append(AmbientPoint.from_vec4(foot.vec4() + sign * depth * nvec))
    return out


def dump_distance_diagnostics(profile: HartogsProfile, points, path):
    """CSV of (point, sdist, eikonal residual, Hessian residual) for triage."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["re_z", "im_z", "re_w", "im_w", "sdist",
                         "eikonal_residual", "hessian_residual"])
        for x in points:
            proj = project_to_boundary(profile, x)
            eik = abs(float(np.linalg.norm(proj.grad)) - 1.0)
            ht = interior_real_hessian(profile, x, proj).h
            hf = fd_real_hessian(profile, x).h
            writer.writerow([x.z.real, x.z.imag, x.w.real, x.w.imag,
                             proj.sdist, eik,
                             float(np.max(np.abs(ht - hf)))])
