import math

import numpy as np
import pytest

from hybstab.errors import F2Zero, NonFiniteOutput
from hybstab.plant import (
    ExampleSystem,
    PlantModel,
    decompose,
    example_plant,
    flow_field,
    split_state,
)

THETA = 0.06


def test_example_plant_hand_values():
    plant = example_plant(THETA)
    np.testing.assert_allclose(flow_field(plant, [0.0, 0.0], 0.0), [0.0, 0.0],
                               atol=0.0)
    np.testing.assert_allclose(flow_field(plant, [1.0, 0.0], 0.0),
                               [1.06, 0.0], rtol=1e-15)
    np.testing.assert_allclose(flow_field(plant, [0.0, 0.0], math.pi / 2.0),
                               [0.06, math.pi / 2.0], rtol=1e-15)


def test_decompose_hand_values():
    plant = example_plant(THETA)
    f1v, f2v, h1v, h2v = decompose(plant, [1.0, 2.0], 0.0)
    np.testing.assert_allclose(f1v, [3.06], rtol=1e-15)
    assert f2v == 1.0
    np.testing.assert_allclose(h1v, [0.0], atol=0.0)
    assert h2v == 0.0


def test_equilibrium_across_theta_sweep():
    for theta in np.linspace(0.005, 0.11, 22):
        plant = example_plant(float(theta))
        np.testing.assert_allclose(flow_field(plant, [0.0, 0.0], 0.0),
                                   [0.0, 0.0], atol=0.0)


def test_recomposition_matches_flow_field_exactly():
    plant = example_plant(THETA)
    rng = np.random.default_rng(11)
    for _ in range(10000):
        x = rng.uniform(-10.0, 10.0, size=2)
        u = rng.uniform(-30.0, 30.0)
        f1v, f2v, h1v, h2v = decompose(plant, x, u)
        recomposed = np.concatenate([f1v + h1v, [f2v * u + h2v]])
        field = flow_field(plant, x, u)
        # both paths evaluate the same maps, so equality is exact
        assert np.array_equal(recomposed, field)


def test_h1_bound_realization():
    plant = example_plant(THETA)
    rng = np.random.default_rng(12)
    for _ in range(5000):
        x = rng.uniform(-20.0, 20.0, size=2)
        u = rng.uniform(-100.0, 100.0)
        _, _, h1v, _ = decompose(plant, x, u)
        assert np.linalg.norm(h1v) <= THETA * (1.0 + abs(x[0])) + 1e-15


def test_split_state_ordering():
    plant = example_plant(THETA)
    x1, x2 = split_state(plant, [3.0, -4.0])
    np.testing.assert_allclose(x1, [3.0])
    assert x2 == -4.0


def test_f2zero_raises():
    plant = PlantModel(n=2,
                       f1=lambda x1, x2: np.zeros(1),
                       f2=lambda x1, x2: float(x2),
                       h1=lambda x1, x2, u: np.zeros(1),
                       h2=lambda x1, x2, u: 0.0)
    with pytest.raises(F2Zero):
        decompose(plant, [1.0, 0.0], 1.0)
    # fine away from the zero of f2
    decompose(plant, [1.0, 2.0], 1.0)


def test_non_finite_output_raises():
    plant = PlantModel(n=2,
                       f1=lambda x1, x2: np.full(1, np.nan),
                       f2=lambda x1, x2: 1.0,
                       h1=lambda x1, x2, u: np.zeros(1),
                       h2=lambda x1, x2, u: 0.0)
    with pytest.raises(NonFiniteOutput):
        flow_field(plant, [1.0, 1.0], 0.0)


def test_shape_validation():
    plant = example_plant(THETA)
    with pytest.raises(ValueError):
        flow_field(plant, [1.0, 2.0, 3.0], 0.0)


def test_example_system_rejects_nonpositive_theta():
    with pytest.raises(ValueError):
        ExampleSystem(0.0)
    with pytest.raises(ValueError):
        ExampleSystem(-0.1)
