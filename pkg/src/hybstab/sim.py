"""Closed-loop hybrid simulation.

Alternates supervisor decisions with continuous flow in the active mode.
Flow is integrated with an explicit embedded Fehlberg 4(5) pair under
proportional step control; guard crossings are bracketed on the accepted
step by linear interpolation of the state and resolved by bisection on
time.  Trace output is sampled on a fixed time grid decoupled from the
integration steps (cubic Hermite inside accepted steps), plus the initial
point, every jump, every located crossing, and the final point.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .controllers import HybridController, Jump, guard_violated, hybrid_step_logic
from .errors import NonFiniteOutput
from .plant import PlantModel, flow_field


class Termination(enum.Enum):
    CONVERGED = "Converged"
    T_MAX_REACHED = "TMaxReached"
    J_MAX_REACHED = "JMaxReached"
    INTEGRATOR_FAILURE = "IntegratorFailure"


@dataclass(frozen=True)
class HybridTimePoint:
    """One sample of a hybrid arc: continuous time t, jump counter j,
    active mode q, state x, applied input u, and the two Lyapunov values."""

    t: float
    j: int
    q: int
    x: np.ndarray
    u: float
    v_ell: float
    v_1: float


@dataclass
class SolutionTrace:
    points: list[HybridTimePoint]
    termination: Termination

    def column(self, name: str) -> np.ndarray:
        if name == "x1":
            return np.array([p.x[0] for p in self.points])
        if name == "x2":
            return np.array([p.x[-1] for p in self.points])
        return np.array([getattr(p, name) for p in self.points])

    @property
    def jump_count(self) -> int:
        return self.points[-1].j

    def jump_times(self) -> list[float]:
        pts = self.points
        return [pts[i].t for i in range(1, len(pts)) if pts[i].j != pts[i - 1].j]

    def segments(self):
        """Maximal runs of constant j, as (j, q, list-of-points)."""
        out = []
        run = [self.points[0]]
        for p in self.points[1:]:
            if p.j == run[-1].j:
                run.append(p)
            else:
                out.append((run[0].j, run[0].q, run))
                run = [p]
        out.append((run[0].j, run[0].q, run))
        return out


@dataclass(frozen=True)
class SimOptions:
    t_max: float = 50.0
    j_max: int = 20
    conv_radius: float = 1e-6
    rtol: float = 1e-9
    atol: float = 1e-12
    max_step: float = 0.01
    guard_tol: float = 1e-10
    output_interval: float = 1e-3

    def validate(self):
        for name in ("t_max", "conv_radius", "rtol", "atol", "max_step",
                     "guard_tol", "output_interval"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        if int(self.j_max) != self.j_max or self.j_max < 1:
            raise ValueError("j_max must be a positive integer")


# Fehlberg 4(5) tableau.  _B4 propagates the fourth-order solution; _E are
# the fifth-minus-fourth weights used for the error estimate.
_A = (
    (),
    (0.25,),
    (3.0 / 32.0, 9.0 / 32.0),
    (1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0),
    (439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0),
    (-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0),
)
_B4 = (25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -0.2, 0.0)
_E = (1.0 / 360.0, 0.0, -128.0 / 4275.0, -2197.0 / 75240.0, 0.02, 2.0 / 55.0)

_MAX_REJECTS = 60


def _rk_step(rhs, y, f0, h):
    """One embedded step from y with precomputed slope f0 = rhs(y)."""
    k = [f0]
    for row in _A[1:]:
        acc = row[0] * k[0]
        for a, ki in zip(row[1:], k[1:]):
            acc = acc + a * ki
        k.append(rhs(y + h * acc))
    y1 = y + h * (_B4[0] * k[0] + _B4[2] * k[2] + _B4[3] * k[3] + _B4[4] * k[4])
    err = h * (_E[0] * k[0] + _E[2] * k[2] + _E[3] * k[3] + _E[4] * k[4] + _E[5] * k[5])
    return y1, err


def _hermite(y0, f0, y1, f1, h, s):
    """Cubic Hermite interpolant on the accepted step, s in [0, 1]."""
    s2 = s * s
    s3 = s2 * s
    return ((2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * h * f0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * h * f1)


class _Run:
    """Mutable bookkeeping for one simulate() call."""

    def __init__(self, plant: PlantModel, K: HybridController, opts: SimOptions):
        self.plant = plant
        self.K = K
        self.opts = opts
        self.points: list[HybridTimePoint] = []
        self.k_next = 1            # index of the next output-grid sample
        self.below_since = None    # entry time of the convergence ball

    def record(self, t, j, q, x):
        if self.points and self.points[-1].t == t and self.points[-1].j == j:
            return
        x = np.array(x, dtype=float)
        u = float(self.K.feedback(q, x))
        x1 = x[:-1]
        self.points.append(HybridTimePoint(
            t=float(t), j=int(j), q=int(q), x=x, u=u,
            v_ell=float(self.K.level(x)),
            v_1=float(0.5 * np.dot(x1, x1)),
        ))

    def conv_hit(self, t, x) -> bool:
        """Track residence in the convergence ball; True once the state has
        stayed inside for a full output interval."""
        if float(np.linalg.norm(x)) <= self.opts.conv_radius:
            if self.below_since is None:
                self.below_since = t
            elif t - self.below_since >= self.opts.output_interval * (1.0 - 1e-9):
                return True
        else:
            self.below_since = None
        return False

    def emit_samples(self, t0, y0, f0, y1, f1, h, j, q, limit=None):
        """Write output-grid samples falling inside the accepted step.

        Samples beyond `limit` (an event time) are withheld.  Returns the
        (t, x) of a convergence hit, else None.
        """
        delta = self.opts.output_interval
        t1 = t0 + h
        while True:
            ts = self.k_next * delta
            if ts > t1 + 1e-12 * max(1.0, t1):
                return None
            if limit is not None and ts >= limit:
                return None
            self.k_next += 1
            if ts <= t0:
                continue
            s = (ts - t0) / h
            xs = _hermite(y0, f0, y1, f1, h, s)
            self.record(ts, j, q, xs)
            if self.conv_hit(ts, xs):
                return ts, xs

    def flow(self, t, j, q, x):
        """Integrate mode q's closed loop from (t, x) until a guard crossing
        or a termination condition.

        Returns (status, t, x) where status is None on a located crossing
        (the caller re-enters the supervisor) or a Termination.
        """
        opts = self.opts
        K = self.K

        def rhs(xx):
            return flow_field(self.plant, xx, float(K.feedback(q, xx)))

        f0 = rhs(x)
        h = min(opts.max_step, opts.output_interval)
        rejects = 0
        while True:
            if t >= opts.t_max * (1.0 - 1e-15):
                self.record(t, j, q, x)
                return Termination.T_MAX_REACHED, t, x
            h = min(h, opts.max_step, opts.t_max - t)
            if h < 1e-14 * max(1.0, abs(t)):
                self.record(t, j, q, x)
                return Termination.INTEGRATOR_FAILURE, t, x
            try:
                with np.errstate(all="ignore"):
                    y1, err = _rk_step(rhs, x, f0, h)
                    bad = not (np.all(np.isfinite(y1)) and np.all(np.isfinite(err)))
                    if not bad:
                        scale = opts.atol + opts.rtol * np.maximum(np.abs(x), np.abs(y1))
                        enorm = float(np.sqrt(np.mean((err / scale) ** 2)))
                        bad = not math.isfinite(enorm)
            except NonFiniteOutput:
                bad = True
            if bad:
                rejects += 1
                if rejects > _MAX_REJECTS:
                    self.record(t, j, q, x)
                    return Termination.INTEGRATOR_FAILURE, t, x
                h *= 0.5
                continue
            if enorm > 1.0:
                rejects += 1
                if rejects > _MAX_REJECTS:
                    self.record(t, j, q, x)
                    return Termination.INTEGRATOR_FAILURE, t, x
                h *= max(0.2, 0.9 * enorm ** -0.2)
                continue
            rejects = 0
            try:
                f1 = rhs(y1)
            except NonFiniteOutput:
                h *= 0.5
                continue
            t1 = t + h

            if guard_violated(K, q, y1):
                # Bracket the crossing on [t, t1] by bisection over the
                # linearly interpolated state, to guard_tol in time.
                a, b = 0.0, 1.0
                dy = y1 - x
                while (b - a) * h > opts.guard_tol:
                    m = 0.5 * (a + b)
                    if guard_violated(K, q, x + m * dy):
                        b = m
                    else:
                        a = m
                te = t + b * h
                xe = x + b * dy
                self.emit_samples(t, x, f0, y1, f1, h, j, q, limit=te)
                self.record(te, j, q, xe)
                return None, te, xe

            hit = self.emit_samples(t, x, f0, y1, f1, h, j, q)
            if hit is not None:
                return Termination.CONVERGED, hit[0], hit[1]
            if self.conv_hit(t1, y1):
                self.record(t1, j, q, y1)
                return Termination.CONVERGED, t1, y1
            t, x, f0 = t1, y1, f1
            if enorm > 0.0:
                h *= min(5.0, max(0.2, 0.9 * enorm ** -0.2))
            else:
                h *= 5.0


def simulate(plant: PlantModel, K: HybridController, x0, q0: int,
             opts: SimOptions | None = None) -> SolutionTrace:
    """Run the switched closed loop from (x0, q0).

    Terminates once the state has stayed inside the convergence ball for a
    full output interval (Converged), at the time horizon (TMaxReached),
    when a jump would exceed the jump budget (JMaxReached), or when the
    integrator breaks down (IntegratorFailure).
    """
    opts = opts or SimOptions()
    opts.validate()
    if q0 not in HybridController.MODES:
        raise ValueError(f"q0 must be one of {HybridController.MODES}, got {q0!r}")
    x = np.asarray(x0, dtype=float).copy()
    if x.shape != (plant.n,):
        raise ValueError(f"x0 must have shape ({plant.n},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("x0 must be finite")

    run = _Run(plant, K, opts)
    t, j, q = 0.0, 0, int(q0)
    run.record(t, j, q, x)
    if float(np.linalg.norm(x)) <= opts.conv_radius:
        return SolutionTrace(run.points, Termination.CONVERGED)

    while True:
        decision = hybrid_step_logic(K, x, q)
        if isinstance(decision, Jump):
            if j >= opts.j_max:
                term = Termination.J_MAX_REACHED
                break
            j += 1
            q = decision.target
            run.record(t, j, q, x)
            continue
        status, t, x = run.flow(t, j, q, x)
        if status is None:
            continue
        term = status
        break
    return SolutionTrace(run.points, term)


def run_ball_of_initial_conditions(plant: PlantModel, K: HybridController,
                                   radius: float, count: int,
                                   opts: SimOptions | None = None,
                                   q0: int = 1) -> list[SolutionTrace]:
    """Simulate from `count` equally spaced initial states on the circle of
    the given radius (angles start at 0).  Per-trace integrator failures
    are reported through the trace termination, never raised."""
    if plant.n != 2:
        raise ValueError("circle of initial conditions requires a planar plant")
    if radius < 0.0:
        raise ValueError("radius must be nonnegative")
    if count < 1:
        raise ValueError("count must be at least 1")
    traces = []
    for k in range(count):
        ang = 2.0 * math.pi * k / count
        x0 = np.array([radius * math.cos(ang), radius * math.sin(ang)])
        traces.append(simulate(plant, K, x0, q0, opts))
    return traces


TRACE_HEADER = "t,j,q,x1,x2,u,V_ell,V_1"


def trace_to_csv(trace: SolutionTrace, path) -> None:
    """Write a trace as CSV with full round-trip precision.

    The column layout is fixed for planar states; reruns of the same
    deterministic simulation produce byte-identical files.
    """
    if trace.points and trace.points[0].x.shape != (2,):
        raise ValueError("trace CSV layout is defined for planar states")
    lines = [TRACE_HEADER]
    for p in trace.points:
        lines.append(f"{p.t:.17g},{p.j},{p.q},{p.x[0]:.17g},{p.x[1]:.17g},"
                     f"{p.u:.17g},{p.v_ell:.17g},{p.v_1:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")
