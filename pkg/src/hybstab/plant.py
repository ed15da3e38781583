"""Two-block control-affine plant models.

The state x splits into a driven block x1 of dimension n-1 and a scalar
block x2 that carries the input:

    dx1/dt = f1(x1, x2) + h1(x1, x2, u)
    dx2/dt = f2(x1, x2) * u + h2(x1, x2, u)

f2 must not vanish anywhere, and the origin is an equilibrium for u = 0.
The h-terms may depend on the input u itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import F2Zero, NonFiniteOutput

Array = np.ndarray

# |f2| below this is treated as a model violation in decompose().
F2_MIN = 1e-12


@dataclass(frozen=True)
class PlantModel:
    """Vector field split into drift blocks and input-dependent terms.

    All maps receive x1 as an array of shape (n-1,) and x2 as a float.
    f1 and h1 return arrays of shape (n-1,); f2 and h2 return floats; the
    h-maps take the input u as third argument.  df1_dx2 and dh1_dx2 are
    optional analytic partial derivatives with respect to x2; consumers
    fall back to central finite differences when they are None.
    """

    n: int
    f1: Callable[[Array, float], Array]
    f2: Callable[[Array, float], float]
    h1: Callable[[Array, float, float], Array]
    h2: Callable[[Array, float, float], float]
    df1_dx2: Optional[Callable[[Array, float], Array]] = None
    dh1_dx2: Optional[Callable[[Array, float, float], Array]] = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("state dimension n must be at least 2")


def split_state(plant: PlantModel, x) -> tuple[Array, float]:
    """Split a full state vector into (x1, x2)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (plant.n,):
        raise ValueError(f"state must have shape ({plant.n},), got {x.shape}")
    return x[:-1], float(x[-1])


def _blocks(plant: PlantModel, x, u: float):
    x1, x2 = split_state(plant, x)
    f1v = np.asarray(plant.f1(x1, x2), dtype=float)
    f2v = float(plant.f2(x1, x2))
    h1v = np.asarray(plant.h1(x1, x2, u), dtype=float)
    h2v = float(plant.h2(x1, x2, u))
    if f1v.shape != (plant.n - 1,) or h1v.shape != (plant.n - 1,):
        raise ValueError("f1/h1 must return arrays of shape (n-1,)")
    return f1v, f2v, h1v, h2v


def flow_field(plant: PlantModel, x, u: float) -> Array:
    """Time derivative of the full state under input u."""
    f1v, f2v, h1v, h2v = _blocks(plant, x, u)
    out = np.empty(plant.n)
    out[:-1] = f1v + h1v
    out[-1] = f2v * u + h2v
    if not np.all(np.isfinite(out)):
        raise NonFiniteOutput(f"non-finite derivative at x={x!r}, u={u!r}")
    return out


def decompose(plant: PlantModel, x, u: float):
    """Return the four blocks (f1, f2, h1, h2) evaluated at (x, u).

    Recomposing them as (f1 + h1, f2*u + h2) reproduces flow_field exactly,
    since both paths evaluate the same maps once.
    """
    f1v, f2v, h1v, h2v = _blocks(plant, x, u)
    if abs(f2v) < F2_MIN:
        raise F2Zero(f"f2={f2v!r} at x={x!r}; the model requires f2 != 0")
    return f1v, f2v, h1v, h2v


@dataclass(frozen=True)
class ExampleSystem:
    """Planar benchmark plant with a sinusoidal input-dependent coupling.

        dx1/dt = x1 + x2 + theta*x1**2 + theta*(1 + x1)*sin(u)
        dx2/dt = u

    theta > 0 scales both the quadratic drift term and the perturbation.
    """

    theta: float

    def __post_init__(self):
        if not self.theta > 0.0:
            raise ValueError("theta must be positive")

    def plant(self) -> PlantModel:
        th = self.theta

        def f1(x1, x2):
            return x1 + x2 + th * x1 * x1

        def f2(x1, x2):
            return 1.0

        def h1(x1, x2, u):
            return th * (1.0 + x1) * math.sin(u)

        def h2(x1, x2, u):
            return 0.0

        def df1_dx2(x1, x2):
            return np.ones_like(x1)

        def dh1_dx2(x1, x2, u):
            return np.zeros_like(x1)

        return PlantModel(n=2, f1=f1, f2=f2, h1=h1, h2=h2,
                          df1_dx2=df1_dx2, dh1_dx2=dh1_dx2)


def example_plant(theta: float) -> PlantModel:
    """Convenience constructor for the benchmark plant."""
    return ExampleSystem(theta).plant()
