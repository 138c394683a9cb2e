#!/usr/bin/env python3
"""Generate the bundled data fixtures from the raw MNIST files.

Produces:
    data/mnist_test.bin      all 10000 test samples, preprocessed+packed
    data/mnist_test_100.bin  the first 100 of those (fast acceptance fixture)
    models/mnist_bnn.json    only with --provisional-model: a seeded random
                             BNN stand-in used until a trained export lands
    models/mnist_snn.json    converted form of the model

The .bin files are the golden preprocessing reference: the trainer's
exported dataset must match them byte-for-byte.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from esam.convert import (  # noqa: E402
    BnnLayer, BnnModel, bnn_to_snn, preprocess_image, save_model,
)
from esam.dataset import (  # noqa: E402
    read_idx_images, read_idx_labels, save_dataset,
)

TOPOLOGY = (768, 256, 256, 256, 10)


def bnn_accuracy(model: BnnModel, samples: np.ndarray, labels: np.ndarray) -> float:
    """Count-domain BNN forward pass (the deployment decision rule)."""
    spikes = samples.astype(np.float64)
    for layer in model.layers[:-1]:
        x = 2.0 * spikes - 1.0
        spikes = ((x @ layer.weights + layer.biases) >= 0).astype(np.float64)
    w = model.layers[-1].weights.astype(np.float64)
    scores = (2.0 * spikes - 1.0) @ w + w.sum(axis=0)
    return float((scores.argmax(axis=1) == labels).mean())


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--mnist-dir", default=REPO / "data" / "mnist")
    parser.add_argument("--provisional-model", action="store_true",
                        help="also write a seeded random BNN stand-in")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    mnist = Path(args.mnist_dir)
    images = read_idx_images(mnist / "t10k-images-idx3-ubyte.gz")
    labels = read_idx_labels(mnist / "t10k-labels-idx1-ubyte.gz")

    samples = np.stack([preprocess_image(img / 255.0) for img in images])
    save_dataset(REPO / "data" / "mnist_test.bin", samples, labels)
    save_dataset(REPO / "data" / "mnist_test_100.bin", samples[:100], labels[:100])
    print(f"wrote {samples.shape[0]} samples "
          f"(mean spike density {samples.mean():.3f})")

    if args.provisional_model:
        rng = np.random.default_rng(args.seed)
        layers = [
            BnnLayer(rng.choice((-1, 1), size=(r, c)).astype(np.int8),
                     rng.normal(0.0, 2.0, size=c))
            for r, c in zip(TOPOLOGY[:-1], TOPOLOGY[1:])
        ]
        bnn = BnnModel(tuple(layers), {})
        acc = bnn_accuracy(bnn, samples, labels)
        bnn = BnnModel(bnn.layers, {
            "source": "provisional random stand-in (untrained)",
            "trainer_seed": args.seed,
            "recorded_accuracy": acc,
        })
        save_model(bnn, REPO / "models" / "mnist_bnn.json")
        save_model(bnn_to_snn(bnn), REPO / "models" / "mnist_snn.json")
        print(f"wrote provisional model (accuracy {acc:.4f})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
