"""Sampled certification of the three standing design conditions for the
benchmark plant, and location of the admissibility threshold.

The three checks are: (1) decrease of the local Lyapunov function on its
certified sublevel set under the local feedback, (2) the bounds on the
input-dependent terms that the global design needs, (3) inclusion of the
target curve inside the certified sublevel set.  Sampling uses scrambled
Halton sequences with explicit seeds, so reports are reproducible.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import qmc

from .controllers import LocalController, phi_local
from .errors import DegenerateRegion, NoBracket
from .lyapunov import (EPS_DEFAULT, M_DEFAULT, alpha, c_local, max_v_on_A,
                       phi_sub, v_local_gradient, v_sub)

# Samples closer to the origin than this are discarded when probing the
# sublevel set; the Lie derivative degenerates quadratically there.
EXCLUSION_RADIUS = 1e-4

BOX_HALF_WIDTH = 50.0


def closed_loop_lie(theta: float, x1, x2):
    """Lie derivative of the local Lyapunov function along the benchmark
    closed loop under the local feedback (vectorized)."""
    ctrl = LocalController(theta)
    xs = np.stack([np.asarray(x1, float), np.asarray(x2, float)], axis=-1)
    u = phi_local(ctrl, xs)
    dx1 = x1 + x2 + theta * x1 * x1 + theta * (1.0 + x1) * np.sin(u)
    g = v_local_gradient(theta, xs)
    return g[..., 0] * dx1 + g[..., 1] * u


def _sublevel_samples(theta: float, samples: int, seed: int):
    """Halton samples of the certified sublevel set, drawn in (level, angle)
    coordinates over the sheared plane and mapped back to x."""
    c = c_local(theta)
    eng = qmc.Halton(d=2, scramble=True, seed=seed)
    pts = eng.random(samples)
    level = pts[:, 0] * c
    ang = 2.0 * np.pi * pts[:, 1]
    cs = np.cos(ang)
    sn = np.sin(ang)
    qform = 2.5 * cs * cs + 2.0 * cs * sn + 0.5 * sn * sn
    r = np.sqrt(level / qform)
    w1 = r * cs
    w2 = r * sn
    x2 = w2
    x1 = w1 + theta * w2
    keep = x1 * x1 + x2 * x2 >= EXCLUSION_RADIUS ** 2
    return x1[keep], x2[keep]


def _check_h1_detail(theta: float, samples: int, seed: int):
    x1, x2 = _sublevel_samples(theta, samples, seed)
    if x1.size == 0:
        raise DegenerateRegion(
            f"no admissible samples at theta={theta}: the certified sublevel "
            f"set lies inside the exclusion ball of radius {EXCLUSION_RADIUS}")
    lie = closed_loop_lie(theta, x1, x2)
    worst = float(np.min(-lie))
    return worst > 0.0, worst, int(x1.size)


def check_h1(theta: float, samples: int = 100000, seed: int = 0):
    """Sampled decrease of the local Lyapunov function on the certified
    sublevel set (origin ball excluded).

    Returns (passed, worst_margin) where the margin is the minimum of the
    negated Lie derivative over the sample set.
    """
    passed, worst, _ = _check_h1_detail(theta, samples, seed)
    return passed, worst


def check_h2(theta: float, samples: int = 100000, seed: int = 0):
    """Sampled verification of the four input-term conditions used by the
    global design, with the supremum over u taken analytically (|sin u|<=1).

    Returns a dict with one entry per condition; each entry carries `pass`
    and the binding strict `margin`.  Condition b additionally reports the
    exact-by-construction bound margin (`h1_bound_margin`, zero for x1 >= 0)
    and the same Lie inequality scanned off the virtual-control curve
    (`full_box_margin`; identical here since h1 does not depend on x2).
    """
    eng = qmc.Halton(d=2, scramble=True, seed=seed)
    pts = eng.random(samples)
    x1 = BOX_HALF_WIDTH * (2.0 * pts[:, 0] - 1.0)

    # a) decrease identity of the sub-system under its virtual control;
    # exact up to roundoff, so the margin is tolerance slack minus residual.
    drift = x1 + phi_sub(theta, x1) + theta * x1 * x1
    resid = np.abs(x1 * drift + alpha(v_sub(x1)))
    tol_a = 1e-12 * (1.0 + x1 * x1)
    a_margin = float(np.min(tol_a - resid))
    a_pass = bool(np.all(resid <= tol_a))

    # b) the input term stays below psi, and its Lie derivative along the
    # virtual-control curve stays below the practical-decrease budget.
    psi = theta * (1.0 + np.abs(x1))
    h1_sup = theta * np.abs(1.0 + x1)
    b1_margin = float(np.min(psi - h1_sup))
    lie_sup = np.abs(x1) * psi
    budget = (1.0 - EPS_DEFAULT) * alpha(v_sub(x1)) + EPS_DEFAULT * alpha(M_DEFAULT)
    b2_margin = float(np.min(budget - lie_sup))
    b_pass = b1_margin >= 0.0 and b2_margin >= 0.0

    # c) and d): the x2-derivative of the input term and the second-channel
    # perturbation vanish identically for this plant, so both margins are
    # psi itself.
    c_margin = float(np.min(psi))
    d_margin = c_margin

    return {
        "a": {"pass": a_pass, "margin": a_margin},
        "b": {"pass": b_pass, "margin": b2_margin,
              "h1_bound_margin": b1_margin, "full_box_margin": b2_margin},
        "c": {"pass": c_margin >= 0.0, "margin": c_margin},
        "d": {"pass": d_margin >= 0.0, "margin": d_margin},
    }


def check_h3(theta: float):
    """Inclusion of the target curve inside the certified sublevel set.

    Returns (passed, max_on_curve, c_ell)."""
    max_a, _ = max_v_on_A(theta)
    c = c_local(theta)
    return max_a < c, max_a, c


def find_theta_star(lo: float, hi: float, tol: float = 1e-5) -> float:
    """Bisect the sign change of c_local(theta) - max_v_on_A(theta).

    The inclusion check must pass at lo and fail at hi, else NoBracket."""
    if not lo < hi:
        raise NoBracket(f"need lo < hi, got ({lo}, {hi})")

    def gap(th):
        return c_local(th) - max_v_on_A(th)[0]

    if not (gap(lo) > 0.0 and gap(hi) <= 0.0):
        raise NoBracket(
            f"inclusion must pass at lo={lo} and fail at hi={hi}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def hypothesis_report(theta: float, samples: int = 100000, seed: int = 0,
                      theta_star_bracket: tuple[float, float] | None = None) -> dict:
    """Assemble the full certification report as a JSON-ready dict."""
    h1_pass, h1_margin, used = _check_h1_detail(theta, samples, seed)
    h2 = check_h2(theta, samples, seed)
    h3_pass, max_a, c = check_h3(theta)
    report = {
        "theta": float(theta),
        "h1": {"pass": h1_pass, "margin": h1_margin,
               "samples": int(samples), "used": used},
        "h2": h2,
        "h3": {"pass": h3_pass, "maxA": float(max_a), "c_ell": float(c)},
        "seed": int(seed),
    }
    if theta_star_bracket is not None:
        report["theta_star"] = find_theta_star(*theta_star_bracket)
    return report
