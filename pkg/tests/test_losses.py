import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from holofocus import tensor as T
from holofocus.losses import (LOSS_FLOOR, CandidateSet, hologram_loss, predicted_index,
                              reverse_attention_loss, reverse_attention_weights)
from holofocus.tensor import Tensor

from gradcheck import check

positive_losses = st.lists(st.floats(1e-3, 1e3, allow_nan=False), min_size=1, max_size=30)


def test_candidate_set_default_grid():
    z = CandidateSet.from_range(4500e-6, 5500e-6, 100e-6, true_distance=5000e-6)
    assert len(z) == 11
    assert z.true_index == 5
    assert z.distances[0] == pytest.approx(4500e-6)
    assert z.distances[-1] == pytest.approx(5500e-6)


def test_candidate_set_validation():
    with pytest.raises(ValueError):
        CandidateSet((2.0, 1.0))
    with pytest.raises(ValueError):
        CandidateSet(())
    with pytest.raises(ValueError):
        CandidateSet((1.0, 2.0), true_index=2)
    assert CandidateSet.from_range(1.0, 2.0, 0.5, true_distance=1.2).true_index is None


def test_hologram_loss_values():
    h = Tensor(np.random.default_rng(0).random((4, 4)))
    assert hologram_loss(h, h).item() == 0.0
    assert hologram_loss(T.add(h, 0.1), h).item() == pytest.approx(0.01)


def test_hologram_loss_gradient():
    rng = np.random.default_rng(1)
    pred, target = rng.random((3, 5)), rng.random((3, 5))
    p = Tensor(pred, requires_grad=True)
    hologram_loss(p, Tensor(target)).backward()
    np.testing.assert_allclose(p.grad, 2 * (pred - target) / pred.size, rtol=1e-12)
    assert check(lambda a, b: hologram_loss(a, b), [pred, target]) < 1e-4


def test_hologram_loss_shape_mismatch():
    with pytest.raises(T.ShapeError):
        hologram_loss(Tensor(np.zeros((2, 2))), Tensor(np.zeros((3, 2))))


def test_weights_uniform_for_equal_losses():
    np.testing.assert_allclose(reverse_attention_weights([0.3] * 7), np.full(7, 1 / 7), rtol=1e-14)


def test_weights_two_candidates():
    # direct evaluation of the softmax over 1/L
    w1 = math.exp(10) / (math.exp(10) + math.exp(5))
    w = reverse_attention_weights([0.1, 0.2])
    assert w[0] == pytest.approx(w1, rel=1e-12)
    assert w[0] == pytest.approx(0.99331, abs=5e-6)
    assert w[1] == pytest.approx(0.00669, abs=5e-6)


def test_weights_limit_to_one_as_loss_vanishes():
    for small in (1e-2, 1e-3, 1e-6):
        w = reverse_attention_weights([small, 0.5, 2.0, 0.3])
        assert w[0] == pytest.approx(1.0, abs=1e-12)
    w = reverse_attention_weights([0.0, 0.5, 2.0])
    np.testing.assert_array_equal(w, [1.0, 0.0, 0.0])


def test_weights_floor_ties_split():
    w = reverse_attention_weights([0.0, 1.0, LOSS_FLOOR / 2])
    np.testing.assert_array_equal(w, [0.5, 0.0, 0.5])


def test_weights_nan_raises():
    with pytest.raises(ValueError, match="NaN"):
        reverse_attention_weights([0.1, float("nan")])


def test_weights_survive_tiny_losses():
    w = reverse_attention_weights([1e-5, 2e-5, 1e-4])
    assert np.all(np.isfinite(w))
    assert w[0] == pytest.approx(1.0)


@settings(max_examples=300, deadline=None)
@given(positive_losses)
def test_weights_on_simplex(losses):
    w = reverse_attention_weights(losses)
    assert np.all(w >= 0)
    assert abs(w.sum() - 1.0) <= 1e-9


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(0.05, 1e3), min_size=2, max_size=30))
def test_weights_match_naive_form_when_no_overflow(losses):
    inv = 1.0 / np.array(losses)
    assume(inv.max() < 700)
    naive = np.exp(inv) / np.exp(inv).sum()
    np.testing.assert_allclose(reverse_attention_weights(losses), naive, rtol=0, atol=1e-12)


def test_weights_not_scale_invariant():
    a = reverse_attention_weights([0.1, 0.2])
    b = reverse_attention_weights([1.0, 2.0])
    assert a[0] > b[0] + 0.1


def test_predicted_index_ties_low():
    assert predicted_index([0.4, 0.4, 0.2]) == 0
    assert predicted_index([0.1, 0.3, 0.6]) == 2


# -- combined loss ---------------------------------------------------------------------

def _candidate_losses(p, targets):
    return [T.mean(T.square(T.sub(p, Tensor(t)))) for t in targets]


def test_single_candidate_equals_plain_loss():
    rng = np.random.default_rng(2)
    p0, t0 = rng.normal(size=6), rng.normal(size=6)
    p = Tensor(p0, requires_grad=True)
    total, report = reverse_attention_loss(_candidate_losses(p, [t0]))
    total.backward()
    q = Tensor(p0, requires_grad=True)
    plain = _candidate_losses(q, [t0])[0]
    plain.backward()
    assert total.item() == plain.item()
    np.testing.assert_array_equal(p.grad, q.grad)
    assert report.weights.tolist() == [1.0]


def test_equal_losses_average_gradients():
    p0 = np.zeros(3)
    targets = [np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), np.array([0, 0, 1.0])]
    p = Tensor(p0, requires_grad=True)
    total, report = reverse_attention_loss(_candidate_losses(p, targets))
    total.backward()
    np.testing.assert_allclose(report.weights, 1 / 3)
    np.testing.assert_allclose(p.grad, np.full(3, -2 / 9), rtol=1e-12)


def test_gradient_is_weighted_sum_of_candidate_gradients():
    rng = np.random.default_rng(3)
    p0 = rng.normal(size=8)
    targets = [rng.normal(scale=s, size=8) for s in (0.3, 0.6, 1.0, 1.5)]
    p = Tensor(p0, requires_grad=True)
    total, report = reverse_attention_loss(_candidate_losses(p, targets))
    total.backward()
    manual = np.zeros(8)
    for w, t in zip(report.weights, targets):
        q = Tensor(p0, requires_grad=True)
        _candidate_losses(q, [t])[0].backward()
        manual += w * q.grad
    np.testing.assert_allclose(p.grad, manual, rtol=1e-6)


@settings(max_examples=100, deadline=None)
@given(positive_losses)
def test_report_invariants(values):
    losses = [Tensor(v) for v in values]
    total, report = reverse_attention_loss(losses, epoch=3)
    assert report.epoch == 3
    assert np.all(report.weights >= 0)
    assert abs(report.weights.sum() - 1) <= 1e-9
    assert report.total == pytest.approx(float(report.weights @ np.array(values)), abs=1e-9, rel=1e-12)
    assert total.item() == pytest.approx(report.total, rel=1e-12)
    assert min(values) - 1e-9 <= report.total <= max(values) + 1e-9


def test_optimum_preservation():
    losses = [Tensor(v) for v in (1e-13, 0.4, 0.9, 3.0)]
    total, report = reverse_attention_loss(losses)
    assert report.weights[0] == 1.0
    assert total.item() == pytest.approx(1e-13, abs=LOSS_FLOOR)


def test_report_rows_schema():
    _, report = reverse_attention_loss([Tensor(0.1), Tensor(0.2)], epoch=4)
    rows = list(report.rows([1e-3, 2e-3]))
    assert [r["z"] for r in rows] == [1e-3, 2e-3]
    assert set(rows[0]) == {"epoch", "z", "loss", "weight", "total"}
