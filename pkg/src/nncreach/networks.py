"""Feed-forward network controllers and their JSON on-disk format.

A network is a chain of affine layers, each followed by an activation;
the final layer is always affine (identity activation).  The JSON schema::

    {"input_dim": n,
     "layers": [{"weights": [[...row...], ...],
                 "bias": [...],
                 "activation": "relu" | "tanh" | "identity"}, ...]}

``weights`` is a list of rows (one per output neuron).  Extra top-level
keys such as ``description`` are preserved on load but otherwise ignored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["Layer", "MLPNetwork", "ACTIVATIONS"]

ACTIVATIONS = ("relu", "tanh", "identity")


def _apply_activation(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "tanh":
        return np.tanh(z)
    if name == "identity":
        return z
    raise ValueError(f"unknown activation {name!r}")


@dataclass(frozen=True)
class Layer:
    weights: np.ndarray  # (m_out, m_in)
    bias: np.ndarray     # (m_out,)
    activation: str

    def __post_init__(self):
        W = np.asarray(self.weights, dtype=float)
        b = np.asarray(self.bias, dtype=float)
        if W.ndim != 2:
            raise ValueError("layer weights must be a matrix")
        if b.ndim != 1 or b.shape[0] != W.shape[0]:
            raise ValueError("bias length must match the number of output neurons")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unsupported activation {self.activation!r}")
        W.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weights", W)
        object.__setattr__(self, "bias", b)

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


class MLPNetwork:
    """Immutable fully connected network ``x -> W_k s(... s(W_1 x + b_1)) + b_k``."""

    def __init__(self, layers, description: str = ""):
        layers = [l if isinstance(l, Layer) else Layer(*l) for l in layers]
        if not layers:
            raise ValueError("a network needs at least one layer")
        for prev, nxt in zip(layers, layers[1:]):
            if prev.out_dim != nxt.in_dim:
                raise ValueError(
                    f"layer dimensions do not chain: {prev.out_dim} -> {nxt.in_dim}"
                )
        if layers[-1].activation != "identity":
            raise ValueError("the final layer must have identity activation")
        self.layers = tuple(layers)
        self.description = description

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    def __call__(self, x) -> np.ndarray:
        """Evaluate the network; accepts a single point or a batch ``(m, n)``."""
        a = np.asarray(x, dtype=float)
        single = a.ndim == 1
        if single:
            a = a[None, :]
        if a.shape[-1] != self.input_dim:
            raise ValueError(
                f"input has dimension {a.shape[-1]}, network expects {self.input_dim}"
            )
        for layer in self.layers:
            a = _apply_activation(layer.activation, a @ layer.weights.T + layer.bias)
        return a[0] if single else a

    # -- persistence --------------------------------------------------------

    def to_dict(self) -> dict:
        out = {
            "input_dim": self.input_dim,
            "layers": [
                {
                    "weights": l.weights.tolist(),
                    "bias": l.bias.tolist(),
                    "activation": l.activation,
                }
                for l in self.layers
            ],
        }
        if self.description:
            out["description"] = self.description
        return out

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def from_dict(cls, data: dict) -> "MLPNetwork":
        try:
            input_dim = int(data["input_dim"])
            raw_layers = data["layers"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed network description: missing {exc}") from exc
        layers = []
        expect = input_dim
        for idx, spec in enumerate(raw_layers):
            try:
                layer = Layer(np.array(spec["weights"], dtype=float),
                              np.array(spec["bias"], dtype=float),
                              spec.get("activation", "relu"))
            except (KeyError, ValueError) as exc:
                raise ValueError(f"layer {idx}: {exc}") from exc
            if layer.in_dim != expect:
                raise ValueError(
                    f"layer {idx} expects inputs of dimension {layer.in_dim}, "
                    f"previous layer produces {expect}"
                )
            expect = layer.out_dim
            layers.append(layer)
        return cls(layers, description=str(data.get("description", "")))

    @classmethod
    def load(cls, path) -> "MLPNetwork":
        with open(path) as fh:
            data = json.load(fh)
        return cls.from_dict(data)
