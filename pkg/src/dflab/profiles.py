"""Hartogs domain profiles rho(t, w) with derivative jets, t = |z|^2.

A profile represents a rotationally invariant defining function on C^2
through its reduced form rho(t, w).  All benchmark constructions (ball,
worm, twist-free annulus, radius graphs) carry analytic jets; a finite
difference fallback exists for user-supplied functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .errors import ConfigError, ConstraintViolation, DomainError

# Exponential growth rate of the cutoff ODE lambda'' = RATE*lambda' + mu.
RATE = 100.0

# Multi-indices (i, j, k) for d^{i+j+k} rho / dt^i du^j dv^k, total order <= 3.
JET_KEYS = tuple(
    (i, j, k)
    for i in range(4)
    for j in range(4)
    for k in range(4)
    if i + j + k <= 3
)


class Jet3:
    """Partial derivatives of rho in (t, Re w, Im w) up to total order 3."""

    __slots__ = ("entries",)

    def __init__(self, entries: dict):
        self.entries = entries

    def d(self, i: int, j: int = 0, k: int = 0) -> float:
        return self.entries[(i, j, k)]

    @property
    def value(self) -> float:
        return self.entries[(0, 0, 0)]

    def __repr__(self):
        return f"Jet3(value={self.value:.6g})"


def _zero_jet() -> dict:
    return {key: 0.0 for key in JET_KEYS}


# ---------------------------------------------------------------------------
# Smooth cutoff lambda:  lambda'' = RATE*lambda' + mu,  lambda = lambda' = 0
# on x <= 0, with mu a smooth bump supported exactly on (0, epsilon).
# ---------------------------------------------------------------------------

def _bump(x: float, epsilon: float) -> float:
    """Unit-amplitude bump exp(4/eps^2 - 1/(x(eps-x))) on (0, eps), else 0."""
    if x <= 0.0 or x >= epsilon:
        return 0.0
    return math.exp(4.0 / epsilon**2 - 1.0 / (x * (epsilon - x)))


def _bump_deriv(x: float, epsilon: float) -> float:
    if x <= 0.0 or x >= epsilon:
        return 0.0
    g = x * (epsilon - x)
    return _bump(x, epsilon) * (epsilon - 2.0 * x) / (g * g)


@dataclass(eq=False)
class LambdaCutoff:
    """Realized cutoff with support ramp width ``epsilon`` and bump amplitude
    ``scale``; ``grid`` holds the points where the five defining conditions
    were verified at build time."""

    epsilon: float
    scale: float
    grid: np.ndarray
    _lam: CubicHermiteSpline = field(repr=False)
    _dlam: CubicHermiteSpline = field(repr=False)
    _lam_eps: float = field(repr=False)
    _dlam_eps: float = field(repr=False)

    def _tail(self, x: float):
        # mu vanishes on [epsilon, inf): exact exponential continuation.
        growth = np.exp(RATE * (x - self.epsilon))
        lam = self._lam_eps + self._dlam_eps / RATE * (growth - 1.0)
        dlam = self._dlam_eps * growth
        return lam, dlam

    def value(self, x: float) -> float:
        if x <= 0.0:
            return 0.0
        if x < self.epsilon:
            return float(self._lam(x))
        return float(self._tail(x)[0])

    def deriv1(self, x: float) -> float:
        if x <= 0.0:
            return 0.0
        if x < self.epsilon:
            return float(self._dlam(x))
        return float(self._tail(x)[1])

    def deriv2(self, x: float) -> float:
        if x <= 0.0:
            return 0.0
        return RATE * self.deriv1(x) + self.scale * _bump(x, self.epsilon)

    def deriv3(self, x: float) -> float:
        if x <= 0.0:
            return 0.0
        return RATE * self.deriv2(x) + self.scale * _bump_deriv(x, self.epsilon)

    def jet(self, x: float):
        return (self.value(x), self.deriv1(x), self.deriv2(x), self.deriv3(x))

    def crossing(self, level: float) -> float:
        """Smallest x with lambda(x) = level (lambda is increasing on x>0)."""
        hi = self.epsilon
        while self.value(hi) < level:
            hi += 0.05
            if hi > 40.0:
                raise DomainError("cutoff never reaches requested level")
        return brentq(lambda x: self.value(x) - level, 1e-12, hi, xtol=1e-14)


# Mass of the unit-amplitude bump; condition (5) needs scale*mass > RATE/2.
def _bump_mass(epsilon: float, n: int = 20001) -> float:
    x = np.linspace(0.0, epsilon, n)
    y = np.array([_bump(xi, epsilon) for xi in x])
    return float(np.trapezoid(y, x))


def min_scale(epsilon: float) -> float:
    """Smallest bump amplitude for which condition (5) can hold.

    lambda' - RATE*lambda integrates mu, so lambda'(x) = RATE*lambda(x) + M(x)
    with M the accumulated bump mass; at lambda = 1/2 condition (5) requires
    M > RATE/2.
    """
    return (RATE / 2.0) / _bump_mass(epsilon)


def default_scale(epsilon: float) -> float:
    """Amplitude with a comfortable margin over the condition-(5) threshold."""
    return 2.5 * min_scale(epsilon)


def _default_grid(epsilon: float) -> np.ndarray:
    # Strict positivity of lambda'' is only float-representable where the
    # bump exponent stays above the underflow floor, hence the eps/4 start.
    return np.unique(np.concatenate([
        np.array([-1.0, -0.5, -1e-6, 0.0]),
        np.geomspace(epsilon / 4.0, epsilon, 33),
        np.linspace(epsilon, 2.0, 129),
        np.array([1.0 + 1e-9, 1.001, 1.01, 1.1, 1.5, 2.0]),
    ]))


def build_lambda(epsilon: float, scale: float, grid=None) -> LambdaCutoff:
    """Integrate lambda'' = 100 lambda' + mu and verify the five conditions.

    Raises ConstraintViolation (scale too small) listing every failed
    condition with witness points.
    """
    if not 0.0 < epsilon <= 0.25:
        raise ConfigError(f"epsilon must be in (0, 1/4], got {epsilon}")
    if scale <= 0.0:
        raise ConfigError(f"scale must be positive, got {scale}")

    # The ODE is linear in mu: integrate at unit amplitude and rescale.
    def rhs(x, y):
        return (y[1], RATE * y[1] + _bump(x, epsilon))

    nodes = np.linspace(0.0, epsilon, 4001)
    sol = solve_ivp(rhs, (0.0, epsilon), (0.0, 0.0), method="DOP853",
                    t_eval=nodes, rtol=1e-12, atol=1e-16, dense_output=False)
    if not sol.success:  # pragma: no cover
        raise RuntimeError(f"cutoff ODE integration failed: {sol.message}")
    # The exact solution is nonnegative; integrator noise at the atol floor
    # can leave tiny negatives in the flat zone before the bump.
    lam_nodes = np.maximum(scale * sol.y[0], 0.0)
    dlam_nodes = np.maximum(scale * sol.y[1], 0.0)
    ddlam_nodes = RATE * dlam_nodes + scale * np.array(
        [_bump(x, epsilon) for x in nodes])

    cutoff = LambdaCutoff(
        epsilon=epsilon,
        scale=scale,
        grid=np.asarray(grid, dtype=float) if grid is not None
        else _default_grid(epsilon),
        _lam=CubicHermiteSpline(nodes, lam_nodes, dlam_nodes),
        _dlam=CubicHermiteSpline(nodes, dlam_nodes, ddlam_nodes),
        _lam_eps=float(lam_nodes[-1]),
        _dlam_eps=float(dlam_nodes[-1]),
    )

    failures = []
    for x in cutoff.grid:
        lam, dlam, ddlam, _ = cutoff.jet(float(x))
        if x <= 0.0 and lam != 0.0:
            failures.append(("lambda(x)=0 if x<=0", float(x), lam))
        if x > 1.0 and not lam > 1.0:
            failures.append(("lambda(x)>1 if x>1", float(x), lam))
        if ddlam < RATE * dlam - 1e-12 * max(1.0, abs(ddlam)):
            failures.append(("lambda''(x)>=100lambda'(x)", float(x), ddlam))
        if x > 0.0 and not ddlam > 0.0:
            failures.append(("lambda''(x)>0 if x>0", float(x), ddlam))
        if lam > 0.5 and not dlam > RATE:
            failures.append(("lambda'(x)>100 if lambda(x)>1/2", float(x), dlam))
    if failures:
        raise ConstraintViolation(failures)
    return cutoff


class NumericalErrorFromSolver(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WormParams:
    """Outer winding parameter of the worm family."""

    r: float

    def __post_init__(self):
        if not self.r > 1.0:
            raise ConfigError(f"worm parameter r must exceed 1, got {self.r}")


@dataclass(eq=False)
class HartogsProfile:
    """Reduced defining function rho(t, w) with a third-order jet oracle.

    ``t_window`` brackets the t-extent of the boundary (used by boundary
    samplers), ``slice_center(t)`` is a point in the interior of the w-slice
    {rho(t, .) < 0}, and ``lambda_free_band`` is the exact t-interval on
    which all cutoff terms vanish identically (None when not applicable).
    """

    name: str
    rho: Callable[[float, complex], float]
    jet: Callable[[float, complex], Jet3]
    t_window: tuple
    slice_center: Callable[[float], complex]
    collar_halfwidth: float = 1e-2
    lambda_free_band: tuple | None = None
    slice_geometry: Callable[[float], tuple] | None = None  # t -> (center, radius)
    params: dict = field(default_factory=dict)

    def with_collar(self, halfwidth: float) -> "HartogsProfile":
        return HartogsProfile(self.name, self.rho, self.jet, self.t_window,
                              self.slice_center, halfwidth,
                              self.lambda_free_band, self.slice_geometry,
                              dict(self.params))


def make_ball(collar_halfwidth: float = 0.75) -> HartogsProfile:
    """Unit sphere benchmark: rho(t, w) = t + |w|^2 - 1.

    The sphere's focal radius is 1, so a wide default collar is safe.
    """

    def rho(t, w):
        return t + abs(w) ** 2 - 1.0

    def jet(t, w):
        e = _zero_jet()
        e[(0, 0, 0)] = t + abs(w) ** 2 - 1.0
        e[(1, 0, 0)] = 1.0
        e[(0, 1, 0)] = 2.0 * w.real
        e[(0, 0, 1)] = 2.0 * w.imag
        e[(0, 2, 0)] = 2.0
        e[(0, 0, 2)] = 2.0
        return Jet3(e)

    def slice_geometry(t):
        return 0.0j, math.sqrt(max(1.0 - t, 0.0))

    return HartogsProfile("ball", rho, jet, (0.0, 1.0), lambda t: 0.0 + 0.0j,
                          collar_halfwidth, slice_geometry=slice_geometry)


def _compose_cutoff(cutoff: LambdaCutoff, x, dx1, dx2, dx3):
    """Chain rule for lambda(g(t)) given g and its first three derivatives."""
    lam, d1, d2, d3 = cutoff.jet(x)
    v = lam
    f1 = d1 * dx1
    f2 = d2 * dx1 * dx1 + d1 * dx2
    f3 = d3 * dx1 ** 3 + 3.0 * d2 * dx1 * dx2 + d1 * dx3
    return v, f1, f2, f3


def _annulus_family(name: str, params: WormParams, cutoff: LambdaCutoff,
                    twist: float, collar_halfwidth: float) -> HartogsProfile:
    """Common machinery for rho(t,w) = |w + c(t)|^2 - 1 + cutoff terms.

    The slice center curve is c(t) = e^{i.twist.log t} for twisted domains
    and c = 0 for the twist-free annulus; either way the cutoff arguments
    are 1/t - 1 and t - r^2.
    """
    r2 = params.r ** 2
    m = twist

    def center(t):
        if m == 0.0:
            return 0.0j, 0.0j, 0.0j, 0.0j
        c = complex(math.cos(m * math.log(t)), math.sin(m * math.log(t)))
        c1 = 1j * m * c / t
        c2 = (-m * m - 1j * m) * c / (t * t)
        c3 = (-m * m - 1j * m) * (1j * m - 2.0) * c / (t ** 3)
        return c, c1, c2, c3

    def cutoff_terms(t):
        # inner ramp argument 1/t - 1, outer ramp argument t - r^2
        inner = _compose_cutoff(cutoff, 1.0 / t - 1.0,
                                -1.0 / t ** 2, 2.0 / t ** 3, -6.0 / t ** 4)
        outer = _compose_cutoff(cutoff, t - r2, 1.0, 0.0, 0.0)
        return tuple(a + b for a, b in zip(inner, outer))

    def rho(t, w):
        if t <= 0.0:
            raise DomainError(f"{name} profile requires t > 0, got {t}")
        c = center(t)[0]
        return abs(w + c) ** 2 - 1.0 + cutoff_terms(t)[0]

    def jet(t, w):
        if t <= 0.0:
            raise DomainError(f"{name} profile requires t > 0, got {t}")
        c, c1, c2, c3 = center(t)
        L0, L1, L2, L3 = cutoff_terms(t)
        s = w + c
        e = _zero_jet()
        e[(0, 0, 0)] = abs(s) ** 2 - 1.0 + L0
        e[(0, 1, 0)] = 2.0 * s.real
        e[(0, 0, 1)] = 2.0 * s.imag
        e[(0, 2, 0)] = 2.0
        e[(0, 0, 2)] = 2.0
        e[(1, 0, 0)] = 2.0 * (s * c1.conjugate()).real + L1
        e[(1, 1, 0)] = 2.0 * c1.real
        e[(1, 0, 1)] = 2.0 * c1.imag
        e[(2, 0, 0)] = 2.0 * (s * c2.conjugate()).real + 2.0 * abs(c1) ** 2 + L2
        e[(2, 1, 0)] = 2.0 * c2.real
        e[(2, 0, 1)] = 2.0 * c2.imag
        e[(3, 0, 0)] = (2.0 * (s * c3.conjugate()).real
                        + 6.0 * (c1 * c2.conjugate()).real + L3)
        return Jet3(e)

    def slice_geometry(t):
        rad2 = 1.0 - (cutoff.value(1.0 / t - 1.0) + cutoff.value(t - r2))
        return -center(t)[0], math.sqrt(max(rad2, 0.0))

    x1 = cutoff.crossing(1.0)
    window = (1.0 / (1.0 + x1), r2 + x1)
    return HartogsProfile(
        name, rho, jet, window,
        slice_center=lambda t: -center(t)[0],
        collar_halfwidth=collar_halfwidth,
        lambda_free_band=(1.0, r2),
        slice_geometry=slice_geometry,
        params={"r": params.r, "twist": m, "epsilon": cutoff.epsilon,
                "scale": cutoff.scale},
    )


def make_worm(params: WormParams, cutoff: LambdaCutoff,
              collar_halfwidth: float = 1e-2) -> HartogsProfile:
    """Worm domain rho = |w + e^{i log t}|^2 - 1 + lambda(1/t-1) + lambda(t-r^2)."""
    return _annulus_family("worm", params, cutoff, 1.0, collar_halfwidth)


def make_twisted_annulus(params: WormParams, cutoff: LambdaCutoff,
                         twist: float,
                         collar_halfwidth: float = 1e-2) -> HartogsProfile:
    """Worm variant with boundary twist e^{i.twist.log t}; twist=1 is the worm."""
    return _annulus_family(f"twisted[{twist}]", params, cutoff, twist,
                           collar_halfwidth)


def make_no_twist_annulus(params: WormParams, cutoff: LambdaCutoff,
                          collar_halfwidth: float = 1e-2) -> HartogsProfile:
    """Control domain |w|^2 - 1 + cutoff terms: worm structure, zero twist."""
    return _annulus_family("no_twist", params, cutoff, 0.0, collar_halfwidth)


def make_flat_disk(cutoff: LambdaCutoff,
                   collar_halfwidth: float = 1e-2) -> HartogsProfile:
    """Domain |w|^2 - 1 + lambda(t - 1): its weak set is the disk-like set
    {t <= 1, |w| = 1}, used to exercise disk-like classification."""

    def rho(t, w):
        return abs(w) ** 2 - 1.0 + cutoff.value(t - 1.0)

    def jet(t, w):
        L0, L1, L2, L3 = _compose_cutoff(cutoff, t - 1.0, 1.0, 0.0, 0.0)
        e = _zero_jet()
        e[(0, 0, 0)] = abs(w) ** 2 - 1.0 + L0
        e[(0, 1, 0)] = 2.0 * w.real
        e[(0, 0, 1)] = 2.0 * w.imag
        e[(0, 2, 0)] = 2.0
        e[(0, 0, 2)] = 2.0
        e[(1, 0, 0)] = L1
        e[(2, 0, 0)] = L2
        e[(3, 0, 0)] = L3
        return Jet3(e)

    x1 = cutoff.crossing(1.0)
    return HartogsProfile(
        "flat_disk", rho, jet, (0.0, 1.0 + x1), lambda t: 0.0 + 0.0j,
        collar_halfwidth, lambda_free_band=(0.0, 1.0),
        slice_geometry=lambda t: (0.0j, math.sqrt(
            max(1.0 - cutoff.value(t - 1.0), 0.0))))


# ---------------------------------------------------------------------------
# Radius-graph profiles rho = t / f(w) - 1
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class RadiusProfile:
    """Boundary radius squared: the boundary is {|z|^2 = f(w)}, f > 0.

    ``jet(w)`` returns {(j, k): d^{j+k} f / du^j dv^k} for j + k <= 2;
    third-order entries are optional and filled by finite differences
    when missing.
    """

    f: Callable[[complex], float]
    jet: Callable[[complex], dict]
    fd_step: float = 1e-5

    def full_jet(self, w: complex) -> dict:
        out = dict(self.jet(w))
        h = self.fd_step
        for key in [(3, 0), (2, 1), (1, 2), (0, 3)]:
            if key in out:
                continue
            j, k = key
            if j > 0:
                lo = self.jet(w - h)[(j - 1, k)]
                hi = self.jet(w + h)[(j - 1, k)]
            else:
                lo = self.jet(w - 1j * h)[(j, k - 1)]
                hi = self.jet(w + 1j * h)[(j, k - 1)]
            out[key] = (hi - lo) / (2.0 * h)
        return out


def _reciprocal_jet(fj: dict) -> dict:
    """Jet of 1/f from the jet of f, multi-indices over (u, v), order <= 3."""
    f = fj[(0, 0)]
    q = {(0, 0): 1.0 / f}
    for a in [(1, 0), (0, 1)]:
        q[a] = -fj[a] / f ** 2
    pairs = [((2, 0), (1, 0), (1, 0)), ((1, 1), (1, 0), (0, 1)),
             ((0, 2), (0, 1), (0, 1))]
    for ab, a, b in pairs:
        q[ab] = -fj[ab] / f ** 2 + 2.0 * fj[a] * fj[b] / f ** 3
    triples = [((3, 0), [(1, 0)] * 3), ((2, 1), [(1, 0), (1, 0), (0, 1)]),
               ((1, 2), [(1, 0), (0, 1), (0, 1)]), ((0, 3), [(0, 1)] * 3)]
    for abc, (a, b, c) in triples:
        ab = (a[0] + b[0], a[1] + b[1])
        ac = (a[0] + c[0], a[1] + c[1])
        bc = (b[0] + c[0], b[1] + c[1])
        q[abc] = (-fj[abc] / f ** 2
                  + 2.0 * (fj[ab] * fj[c] + fj[ac] * fj[b] + fj[bc] * fj[a])
                  / f ** 3
                  - 6.0 * fj[a] * fj[b] * fj[c] / f ** 4)
    return q


def profile_from_radius(f: RadiusProfile, t_window: tuple | None = None,
                        slice_center: complex = 0.0j,
                        collar_halfwidth: float = 1e-2) -> HartogsProfile:
    """Graph profile rho(t, w) = t / f(w) - 1 with quotient-rule jet."""

    def rho(t, w):
        fv = f.f(w)
        if fv <= 0.0:
            raise DomainError(f"radius function must be positive, f({w}) = {fv}")
        return t / fv - 1.0

    def jet(t, w):
        fj = f.full_jet(w)
        if fj[(0, 0)] <= 0.0:
            raise DomainError("radius function must be positive")
        q = _reciprocal_jet(fj)
        e = _zero_jet()
        for (j, k), val in q.items():
            if j + k <= 2:
                e[(1, j, k)] = val      # rho is linear in t
            e[(0, j, k)] = t * val
        e[(0, 0, 0)] = t * q[(0, 0)] - 1.0
        return Jet3(e)

    window = t_window if t_window is not None else (0.0, 0.0)
    return HartogsProfile("radius", rho, jet, window,
                          lambda t: slice_center, collar_halfwidth)


def radius_profile_from_callable(fval, jet_entries=None,
                                 fd_step: float = 1e-5) -> RadiusProfile:
    """Wrap a plain callable f(w) -> positive float, differentiating by
    central differences unless analytic jet entries are supplied."""
    if jet_entries is not None:
        return RadiusProfile(fval, jet_entries, fd_step)

    def jet(w):
        h = fd_step
        out = {(0, 0): fval(w)}
        out[(1, 0)] = (fval(w + h) - fval(w - h)) / (2 * h)
        out[(0, 1)] = (fval(w + 1j * h) - fval(w - 1j * h)) / (2 * h)
        out[(2, 0)] = (fval(w + h) - 2 * fval(w) + fval(w - h)) / h ** 2
        out[(0, 2)] = (fval(w + 1j * h) - 2 * fval(w) + fval(w - 1j * h)) / h ** 2
        out[(1, 1)] = (fval(w + h + 1j * h) - fval(w + h - 1j * h)
                       - fval(w - h + 1j * h) + fval(w - h - 1j * h)) / (4 * h * h)
        return out

    return RadiusProfile(fval, jet, fd_step)


# ---------------------------------------------------------------------------
# Finite-difference jet fallback for user-supplied rho
# ---------------------------------------------------------------------------

def fd_jet(rho: Callable[[float, complex], float], t: float, w: complex,
           h: float = 1e-5) -> Jet3:
    """Central-difference jet of a black-box rho, total order <= 3."""

    def ev(offset):
        ot, ou, ov = offset
        return rho(t + ot * h, w + complex(ou * h, ov * h))

    def unit(axis, step=1):
        off = [0, 0, 0]
        off[axis] = step
        return tuple(off)

    def add(a, b):
        return (a[0] + b[0], a[1] + b[1], a[2] + b[2])

    zero = (0, 0, 0)

    def d1(axis):
        return (ev(unit(axis)) - ev(unit(axis, -1))) / (2 * h)

    def d2(axis):
        return (ev(unit(axis)) - 2 * ev(zero) + ev(unit(axis, -1))) / h ** 2

    def d2m(a, b):
        return (ev(add(unit(a), unit(b))) - ev(add(unit(a), unit(b, -1)))
                - ev(add(unit(a, -1), unit(b)))
                + ev(add(unit(a, -1), unit(b, -1)))) / (4 * h ** 2)

    def d3(axis):
        return (ev(unit(axis, 2)) - 2 * ev(unit(axis)) + 2 * ev(unit(axis, -1))
                - ev(unit(axis, -2))) / (2 * h ** 3)

    def d3m(sq, lin):
        # d^3 / d(sq)^2 d(lin): first difference of the pure second in sq
        def second_at(step):
            base = unit(lin, step)
            return (ev(add(base, unit(sq))) - 2 * ev(base)
                    + ev(add(base, unit(sq, -1)))) / h ** 2
        return (second_at(1) - second_at(-1)) / (2 * h)

    def d3tuv():
        tot = 0.0
        for st in (1, -1):
            for su in (1, -1):
                for sv in (1, -1):
                    tot += st * su * sv * ev((st, su, sv))
        return tot / (8 * h ** 3)

    e = {
        (0, 0, 0): ev(zero),
        (1, 0, 0): d1(0), (0, 1, 0): d1(1), (0, 0, 1): d1(2),
        (2, 0, 0): d2(0), (0, 2, 0): d2(1), (0, 0, 2): d2(2),
        (1, 1, 0): d2m(0, 1), (1, 0, 1): d2m(0, 2), (0, 1, 1): d2m(1, 2),
        (3, 0, 0): d3(0), (0, 3, 0): d3(1), (0, 0, 3): d3(2),
        (2, 1, 0): d3m(0, 1), (2, 0, 1): d3m(0, 2),
        (1, 2, 0): d3m(1, 0), (0, 2, 1): d3m(1, 2),
        (1, 0, 2): d3m(2, 0), (0, 1, 2): d3m(2, 1),
        (1, 1, 1): d3tuv(),
    }
    return Jet3(e)


def profile_from_callable(name: str, rho: Callable[[float, complex], float],
                          t_window: tuple, slice_center=lambda t: 0.0j,
                          collar_halfwidth: float = 1e-2,
                          fd_step: float = 1e-5) -> HartogsProfile:
    """Profile for a black-box rho(t, w) with finite-difference jets."""
    return HartogsProfile(name, rho, lambda t, w: fd_jet(rho, t, w, fd_step),
                          t_window, slice_center, collar_halfwidth)


# ---------------------------------------------------------------------------
# Plain-text configuration (key=value)
# ---------------------------------------------------------------------------

_CONFIG_KINDS = ("ball", "worm", "no_twist", "radius")


def parse_config(text: str) -> dict:
    """Parse key=value lines; '#' starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = value
    return out


def profile_from_config(cfg: dict) -> HartogsProfile:
    """Build a benchmark profile from parsed config keys.

    Recognized keys: kind in {ball, worm, no_twist, radius}, r, epsilon,
    scale, collar_halfwidth.  The radius kind uses the paraboloid cap
    f(w) = 2 - |w|^2.
    """
    kind = cfg.get("kind")
    if kind not in _CONFIG_KINDS:
        raise ConfigError(f"kind must be one of {_CONFIG_KINDS}, got {kind!r}")

    def fget(key, default):
        try:
            return float(cfg[key]) if key in cfg else default
        except ValueError as exc:
            raise ConfigError(f"bad float for {key}: {cfg[key]!r}") from exc

    collar = fget("collar_halfwidth", 1e-2)
    if kind == "ball":
        return make_ball(collar)
    if kind == "radius":
        prof = radius_profile_from_callable(
            lambda w: 2.0 - abs(w) ** 2,
            jet_entries=lambda w: {
                (0, 0): 2.0 - abs(w) ** 2, (1, 0): -2.0 * w.real,
                (0, 1): -2.0 * w.imag, (2, 0): -2.0, (0, 2): -2.0, (1, 1): 0.0,
                (3, 0): 0.0, (2, 1): 0.0, (1, 2): 0.0, (0, 3): 0.0,
            })
        return profile_from_radius(prof, t_window=(0.05, 1.95),
                                   collar_halfwidth=collar)
    r = fget("r", 2.0)
    epsilon = fget("epsilon", 0.05)
    scale = fget("scale", None)
    if scale is None:
        scale = default_scale(epsilon)
    cutoff = build_lambda(epsilon, scale)
    params = WormParams(r)
    if kind == "worm":
        return make_worm(params, cutoff, collar)
    return make_no_twist_annulus(params, cutoff, collar)
