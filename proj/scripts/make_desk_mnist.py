#!/usr/bin/env python3
"""Build the desk-scale MNIST subset used by the acceptance suite.

Reads the 10k digits bundled with the npm `mnist` package (src/digits/<d>.json,
values quantized to three decimals of byte/255), recovers the original bytes and
writes gzip-compressed IDX files: train-images/labels and test-images/labels.
"""
import argparse
import gzip
import json
import random
import struct
from pathlib import Path


def write_idx(path, magic, dims, payload):
    header = struct.pack(">I", magic) + b"".join(struct.pack(">I", d) for d in dims)
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(header + bytes(payload))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("package_dir", type=Path, help="unpacked npm mnist package")
    parser.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data")
    parser.add_argument("--test-fraction", type=float, default=0.2)
    parser.add_argument("--seed", type=int, default=20240601)
    args = parser.parse_args()

    train, test = [], []
    for digit in range(10):
        blob = json.loads((args.package_dir / "src" / "digits" / f"{digit}.json").read_text())
        values = blob["data"]
        assert len(values) % 784 == 0
        images = []
        for i in range(len(values) // 784):
            raw = values[i * 784:(i + 1) * 784]
            images.append(bytes(min(255, max(0, round(v * 255))) for v in raw))
        n_test = int(round(len(images) * args.test_fraction))
        test += [(img, digit) for img in images[:n_test]]
        train += [(img, digit) for img in images[n_test:]]

    rng = random.Random(args.seed)
    rng.shuffle(train)
    rng.shuffle(test)
    args.out.mkdir(parents=True, exist_ok=True)
    for name, split in (("train", train), ("test", test)):
        write_idx(args.out / f"{name}-images-idx3-ubyte.gz", 0x00000803, (len(split), 28, 28),
                  b"".join(img for img, _ in split))
        write_idx(args.out / f"{name}-labels-idx1-ubyte.gz", 0x00000801, (len(split),),
                  bytes(label for _, label in split))
        print(f"{name}: {len(split)} images")


if __name__ == "__main__":
    main()
