#!/usr/bin/env python3
"""Build IDX files from the 10,000-digit MNIST sample bundled in the npm `mnist` package.

The full MNIST distribution is not reachable from every build machine. The npm
package ships 10,000 real MNIST digits as JSON arrays of pixel/255 rounded to
three decimals; rounding back to the nearest byte recovers the original pixels.

Usage:
    npm pack mnist            # produces mnist-<ver>.tgz
    tar xzf mnist-*.tgz
    python3 tools/make_mnist_subset.py package/src/digits data/mnist

Writes train-images-idx3-ubyte / train-labels-idx1-ubyte (8,000 digits) and
t10k-images-idx3-ubyte / t10k-labels-idx1-ubyte (2,000 digits). The split is a
seeded shuffle, so rerunning produces identical files.
"""

import argparse
import json
import pathlib
import random
import struct

ROWS = COLS = 28


def load_digits(src: pathlib.Path):
    samples = []
    for label in range(10):
        flat = json.loads((src / f"{label}.json").read_text())["data"]
        if len(flat) % (ROWS * COLS):
            raise SystemExit(f"{label}.json: pixel count not a multiple of 784")
        pixels = bytes(min(255, max(0, round(v * 255))) for v in flat)
        for i in range(0, len(pixels), ROWS * COLS):
            samples.append((pixels[i:i + ROWS * COLS], label))
    return samples


def write_idx(out: pathlib.Path, prefix: str, samples):
    with open(out / f"{prefix}-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(samples), ROWS, COLS))
        for pixels, _ in samples:
            f.write(pixels)
    with open(out / f"{prefix}-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(samples)))
        f.write(bytes(label for _, label in samples))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("digits_dir", type=pathlib.Path)
    ap.add_argument("out_dir", type=pathlib.Path)
    ap.add_argument("--train", type=int, default=8000)
    ap.add_argument("--seed", type=int, default=2019)
    args = ap.parse_args()

    samples = load_digits(args.digits_dir)
    random.Random(args.seed).shuffle(samples)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    write_idx(args.out_dir, "train", samples[:args.train])
    write_idx(args.out_dir, "t10k", samples[args.train:])
    print(f"wrote {args.train} train / {len(samples) - args.train} test digits to {args.out_dir}")


if __name__ == "__main__":
    main()
