"""Generate the stand-in benchmark controllers.

The original benchmark controllers are not redistributable, so this
script trains replacements of identical architecture (vehicle:
4x100x100x2 ReLU, double integrator: 2x10x5x1 ReLU) against simple
hand-written policies.  Training is plain numpy Adam with fixed seeds;
the resulting JSON files are committed under networks/ and clearly
labeled as stand-ins.

Run from the repository root:

    python scripts/make_standin_networks.py
"""

import json
import math
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "networks"


# ---------------------------------------------------------------------------
# Minimal MLP training (MSE + Adam).

def init_params(dims, rng):
    params = []
    for m_in, m_out in zip(dims, dims[1:]):
        W = rng.normal(0.0, math.sqrt(2.0 / m_in), size=(m_out, m_in))
        b = np.zeros(m_out)
        params.append([W, b])
    return params


def forward(params, x):
    acts = [x]
    pre = []
    a = x
    for i, (W, b) in enumerate(params):
        z = a @ W.T + b
        pre.append(z)
        a = np.maximum(z, 0.0) if i < len(params) - 1 else z
        acts.append(a)
    return acts, pre


def train(dims, xs, ys, rng, steps=4000, batch=256, lr=2e-3):
    params = init_params(dims, rng)
    m = [[np.zeros_like(W), np.zeros_like(b)] for W, b in params]
    v = [[np.zeros_like(W), np.zeros_like(b)] for W, b in params]
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    for step in range(1, steps + 1):
        idx = rng.integers(0, xs.shape[0], size=batch)
        xb, yb = xs[idx], ys[idx]
        acts, pre = forward(params, xb)
        grad_a = 2.0 * (acts[-1] - yb) / batch
        grads = [None] * len(params)
        for i in range(len(params) - 1, -1, -1):
            grad_z = grad_a if i == len(params) - 1 else grad_a * (pre[i] > 0)
            W, b = params[i]
            grads[i] = [grad_z.T @ acts[i], grad_z.sum(axis=0)]
            grad_a = grad_z @ W
        for i, (W, b) in enumerate(params):
            for k, g in enumerate(grads[i]):
                m[i][k] = beta1 * m[i][k] + (1 - beta1) * g
                v[i][k] = beta2 * v[i][k] + (1 - beta2) * g * g
                mhat = m[i][k] / (1 - beta1 ** step)
                vhat = v[i][k] / (1 - beta2 ** step)
                params[i][k] -= lr * mhat / (np.sqrt(vhat) + eps)
        if step % 1000 == 0:
            loss = float(np.mean((forward(params, xs)[0][-1] - ys) ** 2))
            print(f"  step {step}: mse={loss:.6f}")
    return params


def save(params, path, description):
    layers = []
    for i, (W, b) in enumerate(params):
        layers.append({
            "weights": [[float(v) for v in row] for row in W],
            "bias": [float(v) for v in b],
            "activation": "relu" if i < len(params) - 1 else "identity",
        })
    doc = {
        "input_dim": params[0][0].shape[1],
        "description": description,
        "layers": layers,
    }
    path.write_text(json.dumps(doc) + "\n")
    print(f"wrote {path}")


# ---------------------------------------------------------------------------
# Target policies.

def vehicle_policy(x):
    """Steer toward the origin with cross-track shaping.

    Both the heading target and the speed schedule depend on the lateral
    offset px - py, so nearby initial states fan out noticeably over the
    benchmark horizon while strong tracking keeps each gain channel well
    conditioned.
    """
    px, py, phi, v = x[:, 0], x[:, 1], x[:, 2], x[:, 3]
    dist = np.hypot(px, py)
    lateral = px - py
    heading_des = np.arctan2(-py, -px) + 0.5 * np.tanh(2.5 * lateral)
    v_des = np.clip(0.7 * dist, 0.0, 3.8) + 0.8 * np.tanh(1.5 * lateral)
    u1 = np.clip(3.0 * (v_des - v), -9.0, 9.0)
    u2 = 0.6 * np.tanh(4.0 * (heading_des - phi))
    return np.stack([u1, u2], axis=1)


def dare_gain(A, B, Q, R, iters=1000):
    P = Q.copy()
    for _ in range(iters):
        BtPB = B.T @ P @ B + R
        K = np.linalg.solve(BtPB, B.T @ P @ A)
        P = Q + A.T @ P @ (A - B @ K)
    return K


def main():
    OUT.mkdir(exist_ok=True)

    print("vehicle controller (4x100x100x2 ReLU)")
    rng = np.random.default_rng(7)
    lo = np.array([3.0, 3.0, -3.4, 0.6])
    hi = np.array([9.5, 9.5, -0.6, 4.4])
    xs = rng.uniform(lo, hi, size=(20000, 4))
    ys = vehicle_policy(xs)
    params = train([4, 100, 100, 2], xs, ys, rng, steps=3500)
    save(params, OUT / "vehicle_standin.json",
         "Stand-in vehicle controller (4x100x100x2 ReLU), trained offline by "
         "scripts/make_standin_networks.py (seed 7) to imitate a go-to-origin "
         "policy. Not the original benchmark controller.")

    print("double-integrator controller (2x10x5x1 ReLU)")
    rng = np.random.default_rng(11)
    A = np.array([[1.0, 1.0], [0.0, 1.0]])
    B = np.array([[0.5], [1.0]])
    K = dare_gain(A, B, np.eye(2), np.eye(1))
    print(f"  regulator gain: {K.ravel()}")
    lo = np.array([-6.0, -6.0])
    hi = np.array([6.0, 6.0])
    xs = rng.uniform(lo, hi, size=(20000, 2))
    ys = np.clip(-(xs @ K.T), -1.0, 1.0)
    params = train([2, 10, 5, 1], xs, ys, rng, steps=6000)
    save(params, OUT / "double_integrator_standin.json",
         "Stand-in double-integrator controller (2x10x5x1 ReLU), trained "
         "offline by scripts/make_standin_networks.py (seed 11) to imitate a "
         "saturated LQR policy. Not the original benchmark controller.")


if __name__ == "__main__":
    main()
