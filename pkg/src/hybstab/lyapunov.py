"""Lyapunov machinery for the benchmark plant.

Covers the quadratic local Lyapunov function and its certified sublevel
constant, the scalar sub-system certificate used by the global design,
and the compact target set reached by the global controller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import ThetaOutOfRange

# Quadratic form of the local Lyapunov function in sheared coordinates
# w = (x1 - theta*x2, x2).
P_LOCAL = np.array([[2.5, 1.0], [1.0, 0.5]])

# Linear gain of the scalar stabilizer phi1 and slope of the comparison
# function alpha; the decrease identity below ties the two together.
PHI1_LINEAR_GAIN = 2.7456
ALPHA_SLOPE = 3.4912

EPS_DEFAULT = 0.89
M_DEFAULT = 0.02


def w_coords(theta: float, x) -> np.ndarray:
    """Sheared coordinates in which the local Lyapunov form is static."""
    x = np.asarray(x, dtype=float)
    w1 = x[..., 0] - theta * x[..., 1]
    w2 = x[..., 1]
    return np.stack([w1, w2], axis=-1)


def v_local(theta: float, x):
    """Local Lyapunov value w^T P w.  Accepts a single state or a batch."""
    x = np.asarray(x, dtype=float)
    w1 = x[..., 0] - theta * x[..., 1]
    w2 = x[..., 1]
    val = 2.5 * w1 * w1 + 2.0 * w1 * w2 + 0.5 * w2 * w2
    return float(val) if val.ndim == 0 else val


def v_local_gradient(theta: float, x):
    """Gradient of v_local with respect to x.  Accepts batches."""
    x = np.asarray(x, dtype=float)
    w1 = x[..., 0] - theta * x[..., 1]
    w2 = x[..., 1]
    g1 = 2.0 * (2.5 * w1 + w2)
    g2 = 2.0 * (w1 + 0.5 * w2) - theta * g1
    return np.stack([g1, g2], axis=-1)


def p1(theta: float) -> float:
    return -396.0 + theta * (2308.0 + theta * (9768.0 + theta * 1440.0))


def p2(theta: float) -> float:
    return 792.0 + theta * (7000.0 + theta * (20856.0 + theta * (21672.0 + theta * 2160.0)))


def xi(theta: float) -> float:
    """Sign function whose first positive root bounds the admissible theta."""
    return -2.0 + theta * p1(theta)


@lru_cache(maxsize=1)
def theta1() -> float:
    """Smallest positive root of xi, computed once by bisection.

    The bracket narrows to 1e-14 so the residual xi(theta1()) stays below
    1e-9 despite the steep slope of xi at the root.
    """
    lo = hi = None
    for k in range(1, 501):
        t = 1e-3 * k
        if xi(t) > 0.0:
            lo, hi = t - 1e-3, t
            break
    if hi is None:
        raise RuntimeError("failed to bracket the root of xi")
    while hi - lo > 1e-14:
        mid = 0.5 * (lo + hi)
        if xi(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def c_local(theta: float) -> float:
    """Certified sublevel constant of v_local for the local feedback loop.

    Defined for 0 < theta < theta1(); the numerator degenerates to zero as
    theta approaches theta1 from below.
    """
    if not 0.0 < theta < theta1():
        raise ThetaOutOfRange(
            f"theta={theta} outside the admissible interval (0, {theta1():.6f})")
    num = 2.0 - theta * p1(theta)
    den = theta * p2(theta)
    return (num / den) ** 2


class LocalLyapunov:
    """Bundle of the quadratic form, the coordinate shear and the level."""

    def __init__(self, theta: float):
        if not theta > 0.0:
            raise ValueError("theta must be positive")
        self.theta = float(theta)
        self.P = P_LOCAL.copy()
        self.theta_max = theta1()

    def w(self, x):
        return w_coords(self.theta, x)

    def value(self, x):
        return v_local(self.theta, x)

    def gradient(self, x):
        return v_local_gradient(self.theta, x)

    def level(self) -> float:
        return c_local(self.theta)


def v_sub(x1):
    """Sub-system Lyapunov value x1**2 / 2 (elementwise on arrays)."""
    x1 = np.asarray(x1, dtype=float)
    val = 0.5 * x1 * x1
    return float(val) if val.ndim == 0 else val


def alpha(s):
    """Linear comparison function used by the sub-system certificate."""
    s = np.asarray(s, dtype=float)
    val = ALPHA_SLOPE * s
    return float(val) if val.ndim == 0 else val


def phi_sub(theta: float, x1):
    """Stabilizing virtual input for the scalar x1 sub-system."""
    x1 = np.asarray(x1, dtype=float)
    val = -PHI1_LINEAR_GAIN * x1 - theta * x1 * x1
    return float(val) if val.ndim == 0 else val


@dataclass(frozen=True)
class BacksteppingData:
    """Certificate data for the x1 sub-system used by the global design.

    The callables take x1 as an array of shape (n-1,) (psi also takes x2);
    v1 and phi1 return floats.  dv1 and dphi1 are optional gradients used
    by the generic global controller; central finite differences are used
    when they are None.  eps in (0,1) and m > 0 shape the practical
    attractivity margin.
    """

    v1: Callable
    phi1: Callable
    alpha: Callable
    psi: Callable
    eps: float = EPS_DEFAULT
    m: float = M_DEFAULT
    dv1: Optional[Callable] = None
    dphi1: Optional[Callable] = None

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise ValueError("eps must lie in (0, 1)")
        if not self.m > 0.0:
            raise ValueError("m must be positive")


def example_backstepping_data(theta: float) -> BacksteppingData:
    """Certificate instance for the benchmark plant."""
    th = float(theta)

    def v1(x1):
        return float(0.5 * np.dot(x1, x1))

    def phi1(x1):
        return float(-PHI1_LINEAR_GAIN * x1[0] - th * x1[0] * x1[0])

    def psi(x1, x2):
        return float(th * (1.0 + np.linalg.norm(x1)))

    def dv1(x1):
        return np.asarray(x1, dtype=float).copy()

    def dphi1(x1):
        return np.array([-PHI1_LINEAR_GAIN - 2.0 * th * x1[0]])

    return BacksteppingData(v1=v1, phi1=phi1, alpha=alpha, psi=psi,
                            dv1=dv1, dphi1=dphi1)


@dataclass(frozen=True)
class SetA:
    """Compact target curve {v_sub(x1) <= m, x2 = phi_sub(x1)}."""

    theta: float
    m: float = M_DEFAULT

    @property
    def x1_bound(self) -> float:
        return math.sqrt(2.0 * self.m)

    def contains(self, x, tol: float = 1e-12) -> bool:
        # tol also pads the level test so the exact endpoints stay members
        x1, x2 = float(x[0]), float(x[1])
        return (v_sub(x1) <= self.m + tol
                and abs(x2 - phi_sub(self.theta, x1)) <= tol)

    def curve(self, num: int = 401) -> np.ndarray:
        """Polyline sampling of the set, endpoints included."""
        x1 = np.linspace(-self.x1_bound, self.x1_bound, num)
        return np.stack([x1, phi_sub(self.theta, x1)], axis=-1)


def _golden_max(f, lo: float, hi: float, tol: float) -> float:
    """Golden-section search for a maximizer of f on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def max_v_on_A(theta: float, grid_points: int = 20001) -> tuple[float, float]:
    """Maximum of v_local over the target curve, with its maximizer.

    Dense grid scan over the admissible x1 range followed by a
    golden-section refinement around the best grid point.  The returned
    value is never below the raw grid maximum.
    """
    if not 0.0 < theta < theta1():
        raise ThetaOutOfRange(
            f"theta={theta} outside the admissible interval (0, {theta1():.6f})")
    bound = math.sqrt(2.0 * M_DEFAULT)
    x1 = np.linspace(-bound, bound, grid_points)
    vals = v_local(theta, np.stack([x1, phi_sub(theta, x1)], axis=-1))
    i = int(np.argmax(vals))

    def g(t):
        return v_local(theta, [t, phi_sub(theta, t)])

    lo = float(x1[max(i - 1, 0)])
    hi = float(x1[min(i + 1, grid_points - 1)])
    x_ref = _golden_max(g, lo, hi, tol=1e-12)
    v_ref = g(x_ref)
    if v_ref >= vals[i]:
        return float(v_ref), float(x_ref)
    return float(vals[i]), float(x1[i])
