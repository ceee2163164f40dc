import numpy as np
import pytest

from pesg.optim import AdagradState, adagrad_step
from pesg.params import ModelParams


def single(value, grad):
    params = ModelParams()
    t = params.add("w", np.array([value], dtype=float))
    t.grad = np.array([grad], dtype=float)
    return params, t


class TestAdagrad:
    def test_gradient_is_clipped_before_accumulation(self):
        params, t = single(0.0, 10.0)
        state = AdagradState.for_params(params, lr=1.0, eps=0.0)
        adagrad_step(params, state, (-5.0, 5.0))
        assert state.accumulators["w"][0] == 25.0
        assert t.data[0] == pytest.approx(-1.0)

    def test_zero_gradient_leaves_parameter(self):
        params, t = single(0.7, 0.0)
        state = AdagradState.for_params(params, lr=1.0, eps=0.0)
        adagrad_step(params, state)
        assert t.data[0] == 0.7

    def test_first_step_magnitude_is_lr(self):
        params, t = single(2.0, 3.0)
        state = AdagradState.for_params(params, lr=1.0, eps=0.0)
        adagrad_step(params, state)
        assert t.data[0] == pytest.approx(1.0, abs=1e-15)

    def test_grads_reset_after_step(self):
        params, t = single(0.0, 1.0)
        adagrad_step(params, AdagradState.for_params(params))
        assert t.grad[0] == 0.0

    def test_accumulators_never_decrease(self):
        rng = np.random.default_rng(0)
        params = ModelParams()
        t = params.add("w", rng.normal(size=(3, 2)))
        state = AdagradState.for_params(params, initial_accumulator=0.1)
        prev = state.accumulators["w"].copy()
        for _ in range(20):
            t.grad = rng.normal(scale=4.0, size=(3, 2))
            adagrad_step(params, state)
            assert (state.accumulators["w"] >= prev).all()
            prev = state.accumulators["w"].copy()

    def test_clip_is_identity_inside_range(self):
        rng = np.random.default_rng(1)
        g = rng.uniform(-5, 5, size=(4,))
        runs = []
        for clip in ((-5.0, 5.0), None):
            params = ModelParams()
            t = params.add("w", np.zeros(4))
            t.grad = g.copy()
            adagrad_step(params, AdagradState.for_params(params), clip)
            runs.append(t.data.copy())
        np.testing.assert_array_equal(*runs)
