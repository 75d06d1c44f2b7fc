import numpy as np
import pytest

from gradcheck import numeric_grad, rel_error
from neucgc.encoder import (
    EncoderPair,
    backward,
    encode,
    forward,
    fuse,
    init_encoders,
    load_checkpoint,
    preprocess,
    save_checkpoint,
)


def test_deterministic_init():
    a, b = init_encoders(5, 4, 2, seed=3), init_encoders(5, 4, 2, seed=3)
    for x, y in zip(a.parameters(), b.parameters()):
        assert np.array_equal(x, y)


def test_views_have_disjoint_parameters():
    enc = init_encoders(5, 4, seed=0)
    assert not np.array_equal(enc.view1[0][0], enc.view2[0][0])
    assert not np.shares_memory(enc.view1[0][0], enc.view2[0][0])


def test_init_bounds():
    enc = init_encoders(16, 8, 2, seed=1)
    assert np.abs(enc.view1[0][0]).max() <= 0.25
    assert np.abs(enc.view1[1][0]).max() <= 1 / np.sqrt(8)


def test_identity_map_without_final_activation():
    w = np.eye(3)
    b = np.zeros(3)
    enc = EncoderPair([(w, b)], [(w.copy(), b.copy())], 3, 3, 1, final_activation=False)
    emb = encode(enc, np.array([[1.0, 0, 0], [0, 2.0, 0]]))
    np.testing.assert_array_equal(emb.z_view1, [[1, 0, 0], [0, 2, 0]])


def test_output_shape_and_range(rng):
    enc = init_encoders(6, 5, 3, seed=0)
    emb = encode(enc, rng.standard_normal((4, 6)))
    assert emb.z_view1.shape == emb.z_view2.shape == (4, 5)
    assert np.abs(emb.z_view1).max() < 1
    assert emb.fused.shape == (4, 10)


def test_zero_rows_are_nudged():
    w, b = np.zeros((2, 3)), np.zeros(3)
    enc = EncoderPair([(w, b)], [(w, b)], 2, 3, 1)
    z = encode(enc, np.ones((2, 2))).z_view1
    assert np.all(np.linalg.norm(z, axis=1) > 0)


def test_wrong_input_width(rng):
    with pytest.raises(ValueError, match="encoder expects"):
        encode(init_encoders(3, 2), rng.standard_normal((4, 5)))


def test_fuse_order():
    out = fuse(np.ones((2, 3)), np.zeros((2, 3)))
    np.testing.assert_array_equal(out, np.hstack([np.ones((2, 3)), np.zeros((2, 3))]))


def test_fuse_mismatch():
    with pytest.raises(ValueError):
        fuse(np.ones((2, 3)), np.ones((3, 3)))


@pytest.mark.parametrize("depth,final", [(1, True), (2, True), (3, False)])
def test_backward(rng, depth, final):
    enc = init_encoders(4, 3, depth, seed=5, final_activation=final)
    x = rng.standard_normal((5, 4))
    c1, c2 = rng.standard_normal((2, 5, 3))

    def f():
        emb = encode(enc, x)
        return float(np.sum(c1 * emb.z_view1) + np.sum(c2 * emb.z_view2 ** 2))

    emb, tape = forward(enc, x)
    grads = backward(enc, tape, c1, 2 * c2 * emb.z_view2)
    for p, g in zip(enc.parameters(), grads):
        assert rel_error(g, numeric_grad(f, p)) < 1e-7


class TestPreprocess:
    def test_row_l2(self):
        out = preprocess(np.array([[3.0, 4.0], [0.0, 0.0]]), "row-l2")
        np.testing.assert_allclose(out, [[0.6, 0.8], [0, 0]])

    def test_standardize(self, rng):
        out = preprocess(rng.standard_normal((20, 3)) * 5 + 2, "standardize")
        np.testing.assert_allclose(out.mean(axis=0), 0, atol=1e-12)
        np.testing.assert_allclose(out.std(axis=0), 1, atol=1e-12)

    def test_unknown(self):
        with pytest.raises(ValueError):
            preprocess(np.eye(2), "tfidf")


class TestCheckpoint:
    def test_round_trip(self, tmp_path, rng):
        enc = init_encoders(4, 3, 2, seed=9, final_activation=False)
        loaded = load_checkpoint(save_checkpoint(enc, tmp_path / "enc.npz"))
        assert (loaded.depth, loaded.final_activation, loaded.seed) == (2, False, 9)
        for a, b in zip(enc.parameters(), loaded.parameters()):
            assert np.array_equal(a, b)
        x = rng.standard_normal((3, 4))
        assert np.array_equal(encode(enc, x).fused, encode(loaded, x).fused)

    def test_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "other.npz"
        np.savez(path, header=np.array('{"format": "other"}'))
        with pytest.raises(ValueError, match="not an encoder checkpoint"):
            load_checkpoint(path)

    def test_rejects_newer_version(self, tmp_path):
        path = tmp_path / "new.npz"
        np.savez(path, header=np.array('{"format": "neucgc-encoder", "version": 99}'))
        with pytest.raises(ValueError, match="newer"):
            load_checkpoint(path)
