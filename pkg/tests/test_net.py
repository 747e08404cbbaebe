import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dmetric.net import (
    Activation,
    DomainError,
    NetworkParams,
    ShapeError,
    euclidean_distance,
    flatten,
    forward,
    param_count,
    predict,
    toy_network,
    unflatten,
)

KINDS = [Activation("identity"), Activation("tanh"), Activation("logistic"), Activation("leaky_relu", 0.1), Activation("softplus")]


def random_params(rng, dims, activation=Activation()):
    weights = [rng.normal(size=(dims[l], dims[l - 1])) for l in range(1, len(dims))]
    biases = [rng.normal(size=dims[l]) for l in range(1, len(dims))]
    return NetworkParams(tuple(dims), tuple(weights), tuple(biases), activation)


class TestActivation:
    @pytest.mark.parametrize("act", KINDS, ids=lambda a: a.kind)
    def test_strictly_increasing(self, act, rng):
        a = rng.uniform(-8, 8, 1000)
        b = a + rng.uniform(1e-3, 4, 1000)
        assert np.all(act(a) < act(b))

    def test_plain_rectifier_rejected(self):
        with pytest.raises(ValueError):
            Activation("leaky_relu", 0.0)
        with pytest.raises(ValueError):
            Activation("relu")


class TestForward:
    def test_all_one_symmetric_outputs(self, all_one):
        out = forward(all_one, [0.0, 0.0])
        assert out[0] == out[1] == 1.0

    def test_hand_evaluated_scores(self, w1):
        np.testing.assert_allclose(forward(w1, [0.0, 0.0]), [0.9, 1.0])

    def test_zero_net(self):
        net = unflatten((3, 4, 2), Activation(), np.zeros(param_count((3, 4, 2))))
        np.testing.assert_array_equal(forward(net, [1.0, -2.0, 5.0]), [0.0, 0.0])

    def test_batch_matches_pointwise(self, rng):
        net = random_params(rng, (3, 5, 4), Activation("tanh"))
        x = rng.normal(size=(20, 3))
        batch = forward(net, x)
        for i in range(20):
            np.testing.assert_allclose(batch[i], forward(net, x[i]))

    def test_shape_error(self, w1):
        with pytest.raises(ShapeError):
            forward(w1, [1.0, 2.0, 3.0])

    def test_domain_error(self, w1):
        with pytest.raises(DomainError):
            forward(w1, [np.nan, 0.0])


class TestPredict:
    def test_all_one_ties(self, all_one):
        p = predict(all_one, [0.3, -1.2])
        assert p.labels == {1, 2} and p.is_tie

    def test_w1_left_of_boundary(self, w1):
        p = predict(w1, [-1.0, 0.0])
        assert p.labels == {1} and not p.is_tie

    def test_w1_origin(self, w1):
        assert predict(w1, [0.0, 0.0]).labels == {2}

    def test_tie_tolerance_widens(self, w1):
        # scores 0.9 and 1.0 at the origin
        assert predict(w1, [0.0, 0.0], tie_tol=0.1).labels == {1, 2}

    def test_negative_tolerance(self, w1):
        with pytest.raises(ValueError):
            predict(w1, [0.0, 0.0], tie_tol=-1)

    @pytest.mark.parametrize("act", KINDS[1:], ids=lambda a: a.kind)
    def test_label_invariance_under_output_activation(self, act, rng):
        # identity-weight output layer: outputs are act(z) for pre-activations z
        for _ in range(200):
            z = rng.integers(-3, 4, size=4).astype(float)
            net = NetworkParams((4, 4), (np.eye(4),), (np.zeros(4),), act)
            ident = NetworkParams((4, 4), (np.eye(4),), (np.zeros(4),), Activation())
            assert predict(net, z).labels == predict(ident, z).labels


class TestFlatten:
    def test_column_stacking(self):
        net = toy_network(1, 2, 3, 4, 5, 6)
        np.testing.assert_array_equal(flatten(net), [1, 3, 2, 4, 5, 6])

    def test_toy_count(self):
        assert param_count((2, 2)) == 6

    def test_ones_give_all_one(self, all_one):
        assert unflatten((2, 2), Activation(), np.ones(6)) == all_one

    def test_wrong_length(self):
        with pytest.raises(ShapeError):
            unflatten((2, 2), Activation(), np.ones(5))

    @settings(max_examples=50, deadline=None)
    @given(dims=st.lists(st.integers(1, 5), min_size=2, max_size=5), seed=st.integers(0, 2**32 - 1))
    def test_round_trip(self, dims, seed):
        rng = np.random.default_rng(seed)
        net = random_params(rng, dims)
        flat = flatten(net)
        assert flat.size == param_count(dims)
        assert unflatten(dims, net.activation, flat) == net
        v = rng.normal(size=flat.size)
        np.testing.assert_array_equal(flatten(unflatten(dims, net.activation, v)), v)

    def test_json_round_trip(self, rng):
        net = random_params(rng, (3, 2, 4), Activation("leaky_relu", 0.2))
        doc = json.loads(net.to_json())
        assert set(doc) == {"layer_dims", "activation", "weights", "biases"}
        assert doc["activation"] == {"kind": "leaky_relu", "slope": 0.2}
        # row-major nested lists
        assert doc["weights"][0] == net.weights[0].tolist()
        assert NetworkParams.from_json(net.to_json()) == net

    def test_immutable(self, w1):
        with pytest.raises(ValueError):
            w1.weights[0][0, 0] = 5.0


class TestEuclidean:
    def test_table_values(self, w1, w2, w3):
        assert euclidean_distance(flatten(w1), flatten(w2)) == pytest.approx(0.283, abs=5e-4)
        d13 = euclidean_distance(flatten(w1), flatten(w3))
        assert d13 == pytest.approx(2.8 * np.sqrt(2), rel=1e-15)
        # the published 3.959 is this value truncated, not rounded
        assert np.floor(d13 * 1000) / 1000 == 3.959
        assert euclidean_distance(flatten(w2), flatten(w3)) == pytest.approx(4.243, abs=5e-4)

    def test_self(self, w1):
        assert euclidean_distance(flatten(w1), flatten(w1)) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            euclidean_distance(np.zeros(3), np.zeros(4))

    def test_metric_properties(self, rng):
        for _ in range(200):
            a, b, c = rng.normal(size=(3, 6))
            assert euclidean_distance(a, b) == euclidean_distance(b, a)
            assert euclidean_distance(a, b) <= euclidean_distance(a, c) + euclidean_distance(c, b) + 1e-12
