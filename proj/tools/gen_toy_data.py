#!/usr/bin/env python3
"""Regenerates the bundled toy classifier, attack images, and logistic dataset.

The classifier is a frozen linear multi-class model on 16-D inputs whose
class-discriminative directions live in the first two coordinates; the
remaining fourteen carry only small nuisance variation. Images are all
sampled near the class-1 mean, so a single perturbation along the second
coordinate flips every one of them to class 2.
"""
import json
import os
import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "data")

D = 16
N_CLASSES = 3

def main():
    rng = np.random.default_rng(20240817)
    os.makedirs(DATA, exist_ok=True)

    weights = np.zeros((N_CLASSES, D))
    weights[0, 0] = 2.0
    weights[1, :2] = [-1.0, 1.7]
    weights[2, :2] = [-1.0, -1.7]
    bias = np.zeros(N_CLASSES)

    with open(os.path.join(DATA, "classifier_toy.json"), "w") as f:
        json.dump({
            "n_classes": N_CLASSES,
            "input_dim": D,
            "weights": weights.flatten().tolist(),
            "bias": bias.tolist(),
        }, f, indent=2)
        f.write("\n")

    rows = []
    for i in range(10):
        label = 1
        x = np.zeros(D)
        x[:2] = np.array([-1.0, 1.7]) + rng.normal(0, 0.15, size=2)
        x[2:] = rng.normal(0, 0.1, size=D - 2)
        logits = weights @ x + bias
        assert int(np.argmax(logits)) == label, (i, logits)
        rows.append((label, x))

    with open(os.path.join(DATA, "toy_images.csv"), "w") as f:
        f.write("label," + ",".join(f"f{j}" for j in range(D)) + "\n")
        for label, x in rows:
            f.write(f"{label}," + ",".join(f"{v:.10g}" for v in x) + "\n")

    # Small binary logistic regression dataset (5 features, +-1 labels).
    n, d = 40, 5
    w_true = rng.normal(0, 1, size=d)
    feats = rng.normal(0, 1, size=(n, d))
    labels = np.where(feats @ w_true + rng.normal(0, 0.5, size=n) > 0, 1, -1)
    with open(os.path.join(DATA, "logistic_toy.csv"), "w") as f:
        f.write("label," + ",".join(f"f{j}" for j in range(d)) + "\n")
        for i in range(n):
            f.write(f"{labels[i]}," + ",".join(f"{v:.10g}" for v in feats[i]) + "\n")

    print("wrote", DATA)

if __name__ == "__main__":
    main()
