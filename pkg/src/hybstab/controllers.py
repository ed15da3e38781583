"""Feedback laws: the near-origin linear controller, the globally
practically-stabilizing controller (closed form for the benchmark plant
and a generic quadrature-based form), and the hysteresis supervisor that
switches between them.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import F2Zero
from .lyapunov import (BacksteppingData, PHI1_LINEAR_GAIN, c_local, phi_sub,
                       v_local)
from .plant import F2_MIN, PlantModel, split_state

log = logging.getLogger(__name__)


def closed_loop_linearization(theta: float, k1: float, k2: float) -> np.ndarray:
    """Jacobian at the origin of the benchmark plant under u = -k1*x1 + k2*x2
    (sin(u) linearized)."""
    return np.array([
        [1.0 - theta * k1, 1.0 + theta * k2],
        [-k1, k2],
    ])


class LocalController:
    """Linear state feedback for the near-origin mode."""

    def __init__(self, theta: float):
        if not theta > 0.0:
            raise ValueError("theta must be positive")
        self.theta = th = float(theta)
        self.k1 = 7.0 + th
        self.k2 = -4.0 + 4.0 * th + th * (1.0 + th)
        eigs = np.linalg.eigvals(closed_loop_linearization(th, self.k1, self.k2))
        if float(np.max(eigs.real)) >= 0.0:
            raise ValueError(f"local gains fail to stabilize at theta={theta}")


def phi_local(ctrl: LocalController, x):
    """Local feedback -k1*x1 + k2*x2.  Accepts batches."""
    x = np.asarray(x, dtype=float)
    val = -ctrl.k1 * x[..., 0] + ctrl.k2 * x[..., 1]
    return float(val) if val.ndim == 0 else val


@dataclass(frozen=True)
class GlobalControllerParams:
    """Tuning constants of the global controller.

    k_v is the curvature bound 2*(m + a)/a**2 of the saturated Lyapunov
    reshaping; c is the damping gain.
    """

    c: float = 10.0
    a: float = 10.0
    m: float = 0.02

    def __post_init__(self):
        if not (self.c > 0.0 and self.a > 0.0 and self.m > 0.0):
            raise ValueError("c, a and m must be positive")

    @property
    def k_v(self) -> float:
        return 2.0 * (self.m + self.a) / (self.a * self.a)


def global_gain_delta(theta: float, params: GlobalControllerParams, x1, x2=None):
    """Gain-shaping factor of the benchmark global controller (closed form)."""
    x1 = np.asarray(x1, dtype=float)
    kv = params.k_v
    val = theta * kv * (1.0 + np.abs(x1)) * (
        np.abs(x1) / kv + 1.0 + np.abs(PHI1_LINEAR_GAIN + 2.0 * theta * x1))
    return float(val) if val.ndim == 0 else val


def phi_global(theta: float, params: GlobalControllerParams, x):
    """Global feedback for the benchmark plant, closed form.  Accepts batches."""
    x = np.asarray(x, dtype=float)
    x1 = x[..., 0]
    x2 = x[..., 1]
    kv = params.k_v
    c = params.c
    d = global_gain_delta(theta, params, x1)
    off = x2 - phi_sub(theta, x1)
    val = (-(PHI1_LINEAR_GAIN + 2.0 * theta * x1) * (x1 + x2 + theta * x1 * x1)
           - x1 / (2.0 * kv)
           - (off / kv) * (c + 0.25 * c * d * d))
    return float(val) if val.ndim == 0 else val


# Gauss-Legendre nodes/weights of order 16 mapped onto [0, 1]; fixed once so
# repeated evaluations are deterministic.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
_GL01_X = 0.5 * (_GL_X + 1.0)
_GL01_W = 0.5 * _GL_W


def _fd_step(v: float) -> float:
    return 1e-6 * (1.0 + abs(v))


def phi_global_generic(plant: PlantModel, bd: BacksteppingData,
                       params: GlobalControllerParams, x):
    """Global feedback assembled from a plant and its sub-system certificate.

    The x2-dependence of f1 enters through an order-16 Gauss-Legendre
    quadrature along the segment from phi1(x1) to x2; missing derivative
    maps (plant.df1_dx2, bd.dv1, bd.dphi1) fall back to central finite
    differences with step 1e-6*(1+|.|).
    """
    x1, x2 = split_state(plant, x)
    f2v = float(plant.f2(x1, x2))
    if abs(f2v) < F2_MIN:
        raise F2Zero(f"f2={f2v!r} at x={x!r}; the model requires f2 != 0")
    kv = params.k_v
    c = params.c

    phi1v = float(bd.phi1(x1))
    if bd.dv1 is not None:
        dv1 = np.asarray(bd.dv1(x1), dtype=float)
    else:
        dv1 = _fd_gradient(bd.v1, x1)
    if bd.dphi1 is not None:
        dphi1 = np.asarray(bd.dphi1(x1), dtype=float)
    else:
        dphi1 = _fd_gradient(bd.phi1, x1)

    if plant.df1_dx2 is not None:
        df1 = lambda s: np.asarray(plant.df1_dx2(x1, s), dtype=float)
    else:
        def df1(s):
            d = _fd_step(s)
            lo = np.asarray(plant.f1(x1, s - d), dtype=float)
            hi = np.asarray(plant.f1(x1, s + d), dtype=float)
            return (hi - lo) / (2.0 * d)

    def eta(s):
        return s * x2 + (1.0 - s) * phi1v

    int_df1 = np.zeros_like(x1)
    int_psi = 0.0
    for s, wgt in zip(_GL01_X, _GL01_W):
        e = eta(s)
        int_df1 = int_df1 + wgt * df1(e)
        int_psi += wgt * float(bd.psi(x1, e))

    f1v = np.asarray(plant.f1(x1, x2), dtype=float)
    lf1_phi1 = float(np.dot(dphi1, f1v))
    delta = (float(np.linalg.norm(dv1)) * int_psi
             + float(bd.psi(x1, x2)) * kv * (1.0 + float(np.linalg.norm(dphi1))))
    bracket = (kv * lf1_phi1
               - float(np.dot(dv1, int_df1))
               - (x2 - phi1v) * (c + 0.25 * c * delta * delta))
    return bracket / (kv * f2v)


def _fd_gradient(f, x1: np.ndarray) -> np.ndarray:
    grad = np.empty_like(x1)
    for i in range(x1.size):
        d = _fd_step(x1[i])
        hi = x1.copy(); hi[i] += d
        lo = x1.copy(); lo[i] -= d
        grad[i] = (float(f(hi)) - float(f(lo))) / (2.0 * d)
    return grad


def compare_global_forms(theta: float, xs, params: GlobalControllerParams | None = None):
    """Probe the closed-form and generic global laws on a batch of states.

    Logs and returns the largest absolute discrepancy.  The two printed
    forms are not identical (they differ in the coefficient of the dV1
    term), so this is diagnostic only; nothing is asserted here.
    """
    from .lyapunov import example_backstepping_data
    from .plant import ExampleSystem

    params = params or GlobalControllerParams()
    plant = ExampleSystem(theta).plant()
    bd = example_backstepping_data(theta)
    xs = np.asarray(xs, dtype=float)
    worst = 0.0
    for x in xs:
        a = phi_global(theta, params, x)
        b = phi_global_generic(plant, bd, params, x)
        worst = max(worst, abs(a - b))
    log.info("global-law forms differ by at most %.6g over %d probe states",
             worst, len(xs))
    return worst


class HybridController:
    """Two-mode hysteresis supervisor over a scalar level function.

    Mode 1 applies the local feedback while the level stays at or below
    c_ell; mode 2 applies the global feedback while the level stays at or
    above c_tilde < c_ell.  Jump sets are the closed complements of the
    flow sets, and switching always toggles the mode.
    """

    MODES = (1, 2)

    def __init__(self, level: Callable, feedback_local: Callable,
                 feedback_global: Callable, c_ell: float, c_tilde: float):
        if not 0.0 < c_tilde < c_ell:
            raise ValueError("thresholds must satisfy 0 < c_tilde < c_ell")
        self.level = level
        self.c_ell = float(c_ell)
        self.c_tilde = float(c_tilde)
        self._feedback = {1: feedback_local, 2: feedback_global}

    def feedback(self, q: int, x):
        return self._feedback[q](x)

    def in_flow_set(self, q: int, x) -> bool:
        v = self.level(x)
        return v <= self.c_ell if q == 1 else v >= self.c_tilde

    def in_jump_set(self, q: int, x) -> bool:
        v = self.level(x)
        return v >= self.c_ell if q == 1 else v <= self.c_tilde

    @staticmethod
    def switch_target(q: int) -> int:
        return 3 - q


def example_hybrid_controller(theta: float, c_tilde_factor: float = 0.5,
                              params: GlobalControllerParams | None = None) -> HybridController:
    """Supervisor for the benchmark plant with thresholds derived from theta."""
    if not 0.0 < c_tilde_factor < 1.0:
        raise ValueError("c_tilde_factor must lie in (0, 1)")
    params = params or GlobalControllerParams()
    c_ell = c_local(theta)
    ctrl = LocalController(theta)
    return HybridController(
        level=lambda x: v_local(theta, x),
        feedback_local=lambda x: phi_local(ctrl, x),
        feedback_global=lambda x: phi_global(theta, params, x),
        c_ell=c_ell,
        c_tilde=c_tilde_factor * c_ell,
    )


@dataclass(frozen=True)
class Flow:
    """Continue flowing in the current mode with input u."""
    u: float


@dataclass(frozen=True)
class Jump:
    """Switch to the given mode without moving the state."""
    target: int


def _jump_tolerance(v: float) -> float:
    return 1e-12 * (1.0 + v)


def guard_violated(K: HybridController, q: int, x) -> bool:
    """True when x has left mode q's flow set by more than the roundoff
    tolerance; flow keeps priority on the exact level set."""
    v = K.level(x)
    tol = _jump_tolerance(v)
    if q == 1:
        return v > K.c_ell + tol
    return v < K.c_tilde - tol


def hybrid_step_logic(K: HybridController, x, q: int):
    """Supervisor decision at (x, q): Flow with the active feedback, or
    Jump to the other mode on strict guard violation."""
    if q not in K.MODES:
        raise ValueError(f"q must be one of {K.MODES}, got {q!r}")
    if guard_violated(K, q, x):
        return Jump(K.switch_target(q))
    return Flow(float(K.feedback(q, x)))
