"""Exact solutions of the four benchmark problems and their feature trajectories.

All solution functions are vectorised over ``x``; ``t`` is a scalar.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .detect import DISCONTINUITY, KINK, FeatureSet

SQRT2 = math.sqrt(2.0)


class CaseId(str, enum.Enum):
    BURGERS = "burgers"
    WAVE = "wave"
    SOD = "sod"
    ADVECTION = "advection"


@dataclass(frozen=True)
class TestCase:
    id: CaseId
    omega: tuple[float, float]
    T: float
    components: tuple[str, ...]

    __test__ = False  # not a pytest class

    @property
    def Q(self) -> int:
        return len(self.components)

    def solution(self, component: int) -> Callable[[np.ndarray, float], np.ndarray]:
        """Return ``f(x, t)`` for one solution component."""
        if not 0 <= component < self.Q:
            raise ValueError(f"{self.id.value} has no component {component}")
        if self.id is CaseId.BURGERS:
            return burgers_exact
        if self.id is CaseId.ADVECTION:
            return advection_exact
        if self.id is CaseId.WAVE:
            return lambda x, t: wave_exact(x, t)[component]
        return lambda x, t: sod_exact(x, t)[component]


CASES = {
    CaseId.BURGERS: TestCase(CaseId.BURGERS, (-0.5, 3.5), 4.0, ("u",)),
    CaseId.WAVE: TestCase(CaseId.WAVE, (-0.5, 3.5), 2.0, ("u1", "u2")),
    CaseId.SOD: TestCase(CaseId.SOD, (-0.5, 0.5), 0.2, ("rho", "v", "P")),
    CaseId.ADVECTION: TestCase(CaseId.ADVECTION, (-0.5, 3.5), 1.0, ("u",)),
}


def get_case(name: str | CaseId) -> TestCase:
    try:
        return CASES[CaseId(str(getattr(name, "value", name)).lower())]
    except ValueError:
        raise ValueError(f"unknown test case {name!r}; choose from {[c.value for c in CaseId]}") from None


def _scalar_or_array(x, out: np.ndarray):
    return float(out) if np.ndim(x) == 0 else out


# ---------------------------------------------------------------------------
# Burgers, top-hat initial data

def burgers_exact(x, t: float):
    """Entropy solution of Burgers' equation with initial data 1 on [0, 1]."""
    xa = np.asarray(x, dtype=float)
    if t <= 0.0:
        out = ((xa >= 0.0) & (xa <= 1.0)).astype(float)
    elif t < 2.0:
        out = np.where((xa >= 0.0) & (xa < t), xa / t, 0.0)
        out = np.where((xa >= t) & (xa < 1.0 + 0.5 * t), 1.0, out)
    else:
        out = np.where((xa >= 0.0) & (xa < math.sqrt(2.0 * t)), xa / t, 0.0)
    return _scalar_or_array(x, out)


# ---------------------------------------------------------------------------
# Linear wave system

def _w1(y: np.ndarray) -> np.ndarray:
    return np.where((y >= 0.0) & (y <= 1.0), (np.sin(np.pi * y) + 1.0) / SQRT2, 0.0)


def _w2(y: np.ndarray) -> np.ndarray:
    return np.where((y >= 2.0) & (y <= 3.0), (np.sin(np.pi * (y - 2.0)) + 1.0) / SQRT2, 0.0)


def wave_exact(x, t: float):
    xa = np.asarray(x, dtype=float)
    a = _w1(xa - t)
    b = _w2(xa + t)
    return _scalar_or_array(x, a + b), _scalar_or_array(x, b - a)


# ---------------------------------------------------------------------------
# Linear advection with boundary-injected pulse

ADVECTION_SPEED = 1.0


def advection_exact(x, t: float):
    xa = np.asarray(x, dtype=float)
    beta = ADVECTION_SPEED
    x_min = CASES[CaseId.ADVECTION].omega[0]
    front = x_min + beta * t
    tau = t - (xa - x_min) / beta
    inflow = ((tau >= 0.1) & (tau <= 0.5)).astype(float)
    y = xa - beta * t
    bump = np.where((y >= 0.0) & (y <= 1.0), np.sin(np.pi * y) + 1.0, 0.0)
    out = np.where((xa > x_min) & (xa <= front), inflow, bump)
    return _scalar_or_array(x, out)


# ---------------------------------------------------------------------------
# Sod shock tube

SOD_GAMMA = 5.0 / 3.0
SOD_LEFT = (1.0, 0.0, 1.0)
SOD_RIGHT = (0.125, 0.0, 0.1)


class RiemannSolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SodStarState:
    p_star: float
    v_star: float
    rho_star_L: float
    rho_star_R: float
    gamma: float
    left: tuple[float, float, float]
    right: tuple[float, float, float]

    def _sound(self, rho: float, p: float) -> float:
        return math.sqrt(self.gamma * p / rho)

    @property
    def left_is_shock(self) -> bool:
        return self.p_star > self.left[2]

    @property
    def right_is_shock(self) -> bool:
        return self.p_star > self.right[2]

    def wave_speeds(self) -> dict[str, float]:
        """Characteristic speeds of every wave edge in ``x / t``.

        Keys: ``left_head``, ``left_tail``, ``contact``, ``right_tail``,
        ``right_head``.  For a shock, head and tail coincide.
        """
        g = self.gamma
        rl, vl, pl = self.left
        rr, vr, pr = self.right
        cl, cr = self._sound(rl, pl), self._sound(rr, pr)
        if self.left_is_shock:
            s = vl - cl * math.sqrt((g + 1) / (2 * g) * self.p_star / pl + (g - 1) / (2 * g))
            lh = lt = s
        else:
            lh = vl - cl
            lt = self.v_star - self._sound(self.rho_star_L, self.p_star)
        if self.right_is_shock:
            s = vr + cr * math.sqrt((g + 1) / (2 * g) * self.p_star / pr + (g - 1) / (2 * g))
            rh = rt = s
        else:
            rh = vr + cr
            rt = self.v_star + self._sound(self.rho_star_R, self.p_star)
        return {"left_head": lh, "left_tail": lt, "contact": self.v_star, "right_tail": rt, "right_head": rh}


def _pressure_branch(p: float, rho: float, pk: float, gamma: float) -> tuple[float, float]:
    """Value and derivative of one side's pressure function."""
    c = math.sqrt(gamma * pk / rho)
    if p > pk:
        a = 2.0 / ((gamma + 1.0) * rho)
        b = (gamma - 1.0) / (gamma + 1.0) * pk
        q = math.sqrt(a / (p + b))
        return (p - pk) * q, q * (1.0 - 0.5 * (p - pk) / (b + p))
    ratio = p / pk
    f = 2.0 * c / (gamma - 1.0) * (ratio ** ((gamma - 1.0) / (2.0 * gamma)) - 1.0)
    df = ratio ** (-(gamma + 1.0) / (2.0 * gamma)) / (rho * c)
    return f, df


def _pressure_function(p, left, right, gamma):
    fl, dfl = _pressure_branch(p, left[0], left[2], gamma)
    fr, dfr = _pressure_branch(p, right[0], right[2], gamma)
    return fl + fr + (right[1] - left[1]), dfl + dfr, fl, fr


def sod_star_state(
    left: Sequence[float] = SOD_LEFT,
    right: Sequence[float] = SOD_RIGHT,
    gamma: float = SOD_GAMMA,
    tol: float = 1e-12,
    max_iter: int = 100,
) -> SodStarState:
    """Star-region state of a Riemann problem for the ideal-gas Euler equations.

    ``left`` and ``right`` are ``(rho, v, P)`` triples.  The pressure is found by
    Newton iteration on the two-wave pressure function, falling back to
    bisection whenever a Newton step leaves the current bracket.
    """
    left = tuple(map(float, left))
    right = tuple(map(float, right))
    if gamma <= 1.0:
        raise ValueError("gamma must exceed 1")
    if min(left[0], left[2], right[0], right[2]) <= 0.0:
        raise ValueError("densities and pressures must be positive")
    cl = math.sqrt(gamma * left[2] / left[0])
    cr = math.sqrt(gamma * right[2] / right[0])
    if 2.0 / (gamma - 1.0) * (cl + cr) <= right[1] - left[1]:
        raise RiemannSolverError("initial data generate vacuum")

    def phi(p):
        return _pressure_function(p, left, right, gamma)[0]

    lo, hi = 0.0, max(left[2], right[2])
    while phi(hi) < 0.0:
        hi *= 2.0
        if hi > 1e300:
            raise RiemannSolverError("could not bracket the star pressure")
    # two-rarefaction estimate as the starting guess, clipped into the bracket
    z = (gamma - 1.0) / (2.0 * gamma)
    p = ((cl + cr - 0.5 * (gamma - 1.0) * (right[1] - left[1]))
         / (cl / left[2] ** z + cr / right[2] ** z)) ** (1.0 / z)
    p = min(max(p, 1e-8 * hi), hi)

    for _ in range(max_iter):
        f, df, _, _ = _pressure_function(p, left, right, gamma)
        if f > 0.0:
            hi = p
        else:
            lo = p
        p_new = p - f / df if df > 0.0 else 0.5 * (lo + hi)
        if not lo < p_new < hi:
            p_new = 0.5 * (lo + hi)
        if abs(p_new - p) <= tol * 0.5 * (p_new + p) or f == 0.0:
            p = p_new
            break
        p = p_new
    else:
        raise RiemannSolverError(f"star pressure did not converge in {max_iter} iterations")

    _, _, fl, fr = _pressure_function(p, left, right, gamma)
    v = 0.5 * (left[1] + right[1]) + 0.5 * (fr - fl)
    rho_l = _star_density(p, left, gamma)
    rho_r = _star_density(p, right, gamma)
    return SodStarState(p, v, rho_l, rho_r, gamma, left, right)


def _star_density(p: float, state: tuple[float, float, float], gamma: float) -> float:
    rho, _, pk = state
    if p > pk:
        r = p / pk
        g = (gamma - 1.0) / (gamma + 1.0)
        return rho * (r + g) / (g * r + 1.0)
    return rho * (p / pk) ** (1.0 / gamma)


@lru_cache(maxsize=None)
def _default_star() -> SodStarState:
    return sod_star_state()


def sod_sample(star: SodStarState, xi: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sample the self-similar solution at speeds ``xi = x / t``."""
    g = star.gamma
    rl, vl, pl = star.left
    rr, vr, pr = star.right
    cl = math.sqrt(g * pl / rl)
    cr = math.sqrt(g * pr / rr)
    sp = star.wave_speeds()
    xi = np.asarray(xi, dtype=float)
    rho = np.empty_like(xi)
    v = np.empty_like(xi)
    p = np.empty_like(xi)

    left_side = xi <= sp["contact"]
    # left of the contact
    outer = left_side & (xi < sp["left_head"])
    starl = left_side & (xi > sp["left_tail"])
    fan = left_side & ~outer & ~starl
    rho[outer], v[outer], p[outer] = rl, vl, pl
    rho[starl], v[starl], p[starl] = star.rho_star_L, star.v_star, star.p_star
    if np.any(fan):
        a = 2.0 / (g + 1.0) + (g - 1.0) / ((g + 1.0) * cl) * (vl - xi[fan])
        rho[fan] = rl * a ** (2.0 / (g - 1.0))
        v[fan] = 2.0 / (g + 1.0) * (cl + 0.5 * (g - 1.0) * vl + xi[fan])
        p[fan] = pl * a ** (2.0 * g / (g - 1.0))
    # right of the contact
    right_side = ~left_side
    outer = right_side & (xi > sp["right_head"])
    starr = right_side & (xi < sp["right_tail"])
    fan = right_side & ~outer & ~starr
    rho[outer], v[outer], p[outer] = rr, vr, pr
    rho[starr], v[starr], p[starr] = star.rho_star_R, star.v_star, star.p_star
    if np.any(fan):
        a = 2.0 / (g + 1.0) - (g - 1.0) / ((g + 1.0) * cr) * (vr - xi[fan])
        rho[fan] = rr * a ** (2.0 / (g - 1.0))
        v[fan] = 2.0 / (g + 1.0) * (-cr + 0.5 * (g - 1.0) * vr + xi[fan])
        p[fan] = pr * a ** (2.0 * g / (g - 1.0))
    return rho, v, p


def sod_exact(x, t: float, star: SodStarState | None = None):
    """Density, velocity and pressure of the shock tube at ``(x, t)``."""
    star = star or _default_star()
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if t <= 0.0:
        left = xa <= 0.0
        out = tuple(np.where(left, star.left[q], star.right[q]) for q in range(3))
    else:
        out = sod_sample(star, xa / t)
    if np.ndim(x) == 0:
        return tuple(float(o[0]) for o in out)
    return tuple(o.reshape(np.shape(x)) for o in out)


# ---------------------------------------------------------------------------
# Ground-truth feature trajectories

def _feature_set(case: TestCase, pts: list[tuple[float, int]]) -> FeatureSet:
    x_min, x_max = case.omega
    pts = sorted(p for p in pts if x_min < p[0] < x_max)
    return FeatureSet.from_interior(x_min, x_max, [p[0] for p in pts], [p[1] for p in pts])


def exact_feature_trajectories(case: TestCase | str, t: float, component: int = 0) -> FeatureSet:
    """True feature locations and identifiers of ``case`` at time ``t``."""
    case = get_case(case) if not isinstance(case, TestCase) else case
    if not 0.0 <= t <= case.T:
        raise ValueError(f"t={t} outside [0, {case.T}]")
    if case.id is CaseId.BURGERS:
        if t == 0.0:
            pts = [(0.0, DISCONTINUITY), (1.0, DISCONTINUITY)]
        elif t < 2.0:
            pts = [(0.0, KINK), (t, KINK), (1.0 + 0.5 * t, DISCONTINUITY)]
        else:
            pts = [(0.0, KINK), (math.sqrt(2.0 * t), DISCONTINUITY)]
        return _feature_set(case, pts)

    if case.id is CaseId.ADVECTION:
        x_min = case.omega[0]
        pts = [(t, DISCONTINUITY), (1.0 + t, DISCONTINUITY)]
        for start in (0.1, 0.5):
            if t > start:
                pts.append((x_min + ADVECTION_SPEED * (t - start), DISCONTINUITY))
        return _feature_set(case, pts)

    if case.id is CaseId.WAVE:
        # bump edges with the signed jump each contributes to u1 and u2
        h = 1.0 / SQRT2
        edges = [(t, h, -h), (1.0 + t, -h, h), (2.0 - t, h, h), (3.0 - t, -h, -h)]
        merged: dict[float, float] = {}
        for x, j1, j2 in edges:
            key = round(x, 12)
            merged[key] = merged.get(key, 0.0) + (j1 if component == 0 else j2)
        pts = [(x, DISCONTINUITY) for x, jump in merged.items() if abs(jump) > 1e-12]
        return _feature_set(case, pts)

    star = _default_star()
    if t == 0.0:
        return _feature_set(case, [(0.0, DISCONTINUITY)])
    sp = star.wave_speeds()
    pts = [(sp["left_head"] * t, KINK), (sp["left_tail"] * t, KINK), (sp["right_head"] * t, DISCONTINUITY)]
    if component == 0:
        pts.append((sp["contact"] * t, DISCONTINUITY))
    return _feature_set(case, pts)


def write_trajectories_csv(path: str | Path, case: TestCase, times: Sequence[float], component: int = 0) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "feature_index", "location", "identifier"])
    for t in times:
        fs = exact_feature_trajectories(case, float(t), component)
        for j, (z, g) in enumerate(zip(fs.interior, fs.identifiers), start=1):
            w.writerow([repr(float(t)), j, repr(float(z)), int(g)])
    Path(path).write_text(buf.getvalue())
