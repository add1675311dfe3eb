#!/usr/bin/env python3
"""Writes a 28x28 stand-in digit dataset in MNIST IDX format.

Upsamples the scikit-learn 8x8 digits (1797 samples) to 28x28 and splits
them into stratified train/test IDX files with the standard MNIST names.
Used when the real MNIST files are unavailable.

Usage: make_surrogate_digits.py <output-dir> [test-fraction]
"""

import struct
import sys
from pathlib import Path

import numpy as np
from sklearn.datasets import load_digits
from sklearn.model_selection import train_test_split


def upsample(images8: np.ndarray) -> np.ndarray:
    # Nearest-neighbour 8x8 -> 28x28; pixel values 0..16 -> 0..255.
    idx = (np.arange(28) * 8) // 28
    out = images8[:, idx][:, :, idx]
    return np.round(out * (255.0 / 16.0)).astype(np.uint8)


def write_idx(images: np.ndarray, labels: np.ndarray, images_path: Path,
              labels_path: Path) -> None:
    n, rows, cols = images.shape
    with open(images_path, "wb") as f:
        f.write(struct.pack(">iiii", 2051, n, rows, cols))
        f.write(images.tobytes())
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">ii", 2049, n))
        f.write(labels.astype(np.uint8).tobytes())


def main() -> None:
    out_dir = Path(sys.argv[1])
    test_fraction = float(sys.argv[2]) if len(sys.argv) > 2 else 0.25
    out_dir.mkdir(parents=True, exist_ok=True)

    digits = load_digits()
    images = upsample(digits.images)
    x_tr, x_te, y_tr, y_te = train_test_split(
        images, digits.target, test_size=test_fraction, stratify=digits.target,
        random_state=0)

    write_idx(x_tr, y_tr, out_dir / "train-images-idx3-ubyte",
              out_dir / "train-labels-idx1-ubyte")
    write_idx(x_te, y_te, out_dir / "t10k-images-idx3-ubyte",
              out_dir / "t10k-labels-idx1-ubyte")
    print(f"wrote {len(y_tr)} train / {len(y_te)} test images to {out_dir}")


if __name__ == "__main__":
    main()
