"""Pseudo-Siamese encoders: two MLPs with disjoint parameters over the same
node attributes, plus the column-wise fusion of their outputs."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

CHECKPOINT_FORMAT = "neucgc-encoder"
CHECKPOINT_VERSION = 1
ZERO_ROW_EPS = 1e-12
PREPROCESSING = ("none", "row-l2", "standardize")


@dataclass
class EncoderPair:
    """Two parameter lists ``[(W, b), ...]``, one per view.

    Every layer maps to ``latent_dim`` columns; ``tanh`` is applied after every
    layer except possibly the last (``final_activation``).
    """

    view1: list
    view2: list
    input_dim: int
    latent_dim: int
    depth: int
    final_activation: bool = True
    seed: int | None = None

    def parameters(self) -> list[np.ndarray]:
        """Flat list of all arrays, view 1 first; order matches gradients."""
        out = []
        for view in (self.view1, self.view2):
            for w, b in view:
                out.extend([w, b])
        return out

    def copy(self) -> "EncoderPair":
        return EncoderPair(
            [(w.copy(), b.copy()) for w, b in self.view1],
            [(w.copy(), b.copy()) for w, b in self.view2],
            self.input_dim, self.latent_dim, self.depth,
            self.final_activation, self.seed,
        )


@dataclass
class EmbeddingPair:
    z_view1: np.ndarray
    z_view2: np.ndarray

    @property
    def fused(self) -> np.ndarray:
        return fuse(self.z_view1, self.z_view2)


def _init_view(rng, input_dim, latent_dim, depth):
    layers = []
    fan_in = input_dim
    for _ in range(depth):
        bound = 1.0 / np.sqrt(fan_in)
        w = rng.uniform(-bound, bound, size=(fan_in, latent_dim))
        b = rng.uniform(-bound, bound, size=latent_dim)
        layers.append((w, b))
        fan_in = latent_dim
    return layers


def init_encoders(
    input_dim: int,
    latent_dim: int,
    depth: int = 1,
    seed: int = 0,
    final_activation: bool = True,
) -> EncoderPair:
    if input_dim < 1 or latent_dim < 1:
        raise ValueError("input_dim and latent_dim must be >= 1")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    rng1, rng2 = (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(2))
    return EncoderPair(
        _init_view(rng1, input_dim, latent_dim, depth),
        _init_view(rng2, input_dim, latent_dim, depth),
        input_dim, latent_dim, depth, final_activation, seed,
    )


def preprocess(x: np.ndarray, mode: str = "none") -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if mode == "none":
        return x
    if mode == "row-l2":
        norms = np.linalg.norm(x, axis=1, keepdims=True)
        return x / np.where(norms > 0, norms, 1.0)
    if mode == "standardize":
        std = x.std(axis=0)
        return (x - x.mean(axis=0)) / np.where(std > 0, std, 1.0)
    raise ValueError(f"unknown preprocessing {mode!r}; expected one of {PREPROCESSING}")


def _guard_zero_rows(z):
    zero = ~z.any(axis=1)
    if zero.any():
        z = z.copy()
        z[zero, 0] += ZERO_ROW_EPS
    return z


def _forward_view(layers, x, final_activation):
    inputs, outputs = [], []
    h = x
    for i, (w, b) in enumerate(layers):
        inputs.append(h)
        h = h @ w + b
        if i < len(layers) - 1 or final_activation:
            h = np.tanh(h)
            outputs.append(h)
        else:
            outputs.append(None)
    return h, (inputs, outputs)


def _backward_view(layers, tape, grad):
    inputs, outputs = tape
    grads = [None] * len(layers)
    for i in reversed(range(len(layers))):
        if outputs[i] is not None:
            grad = grad * (1.0 - outputs[i] ** 2)
        w = layers[i][0]
        grads[i] = (inputs[i].T @ grad, grad.sum(axis=0))
        if i:
            grad = grad @ w.T
    return grads


def _check_input(enc, x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != enc.input_dim:
        raise ValueError(
            f"attribute matrix has shape {x.shape}; encoder expects (N, {enc.input_dim})"
        )
    return x


def forward(enc: EncoderPair, x: np.ndarray):
    """Encode both views and return ``(EmbeddingPair, tape)``; the tape feeds
    :func:`backward`."""
    x = _check_input(enc, x)
    z1, tape1 = _forward_view(enc.view1, x, enc.final_activation)
    z2, tape2 = _forward_view(enc.view2, x, enc.final_activation)
    return EmbeddingPair(_guard_zero_rows(z1), _guard_zero_rows(z2)), (tape1, tape2)


def encode(enc: EncoderPair, x: np.ndarray) -> EmbeddingPair:
    return forward(enc, x)[0]


def backward(enc: EncoderPair, tape, grad_z1, grad_z2) -> list[np.ndarray]:
    """Gradients for :meth:`EncoderPair.parameters` given upstream
    gradients with respect to each view's output."""
    out = []
    for layers, t, g in ((enc.view1, tape[0], grad_z1), (enc.view2, tape[1], grad_z2)):
        for gw, gb in _backward_view(layers, t, g):
            out.extend([gw, gb])
    return out


def fuse(z1: np.ndarray, z2: np.ndarray) -> np.ndarray:
    z1 = np.asarray(z1)
    z2 = np.asarray(z2)
    if z1.ndim != 2 or z2.ndim != 2 or z1.shape[0] != z2.shape[0]:
        raise ValueError(f"cannot fuse views of shapes {z1.shape} and {z2.shape}")
    return np.concatenate([z1, z2], axis=1)


def save_checkpoint(enc: EncoderPair, path) -> Path:
    """Write an ``.npz`` archive with parameters and a JSON header."""
    path = Path(path)
    header = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "input_dim": enc.input_dim,
        "latent_dim": enc.latent_dim,
        "depth": enc.depth,
        "final_activation": enc.final_activation,
        "seed": enc.seed,
    }
    arrays = {"header": np.array(json.dumps(header))}
    for v, view in ((1, enc.view1), (2, enc.view2)):
        for i, (w, b) in enumerate(view):
            arrays[f"view{v}_w{i}"] = w
            arrays[f"view{v}_b{i}"] = b
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)
    return path


def load_checkpoint(path) -> EncoderPair:
    with np.load(path, allow_pickle=False) as data:
        header = json.loads(str(data["header"]))
        if header.get("format") != CHECKPOINT_FORMAT:
            raise ValueError(f"{path}: not an encoder checkpoint")
        if header["version"] > CHECKPOINT_VERSION:
            raise ValueError(
                f"{path}: checkpoint version {header['version']} is newer than "
                f"supported version {CHECKPOINT_VERSION}"
            )
        views = [
            [(data[f"view{v}_w{i}"].copy(), data[f"view{v}_b{i}"].copy())
             for i in range(header["depth"])]
            for v in (1, 2)
        ]
    return EncoderPair(
        views[0], views[1], header["input_dim"], header["latent_dim"],
        header["depth"], header["final_activation"], header["seed"],
    )
