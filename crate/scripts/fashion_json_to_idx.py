"""Convert the per-class JSON bundle of the `fashion-mnist` npm package to IDX files.

The bundle holds 7000 images per class with no official train/test split.
The first 6000 valid images of each class become the training set and the
next 1000 the test set, interleaved round-robin by class.

usage: python3 fashion_json_to_idx.py <clothes-json-dir> <out-dir>
"""
import json
import os
import struct
import sys


def write(out_dir, prefix, items):
    with open(os.path.join(out_dir, f"{prefix}-images-idx3-ubyte"), "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(items), 28, 28))
        for img, _ in items:
            f.write(bytes(img))
    with open(os.path.join(out_dir, f"{prefix}-labels-idx1-ubyte"), "wb") as f:
        f.write(struct.pack(">II", 0x801, len(items)))
        f.write(bytes(c for _, c in items))


def main(src, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    per_class = []
    for c in range(10):
        with open(os.path.join(src, f"{c}.json")) as f:
            data = [img for img in json.load(f)["data"] if len(img) == 784]
        per_class.append(data)
    train = [(per_class[c][i], c) for i in range(6000) for c in range(10)]
    test = [(per_class[c][6000 + i], c) for i in range(1000) for c in range(10)]
    write(out_dir, "train", train)
    write(out_dir, "t10k", test)


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
