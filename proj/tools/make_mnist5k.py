#!/usr/bin/env python3
"""Convert the 5,000-digit MNIST subset shipped with mlxtend to IDX files.

Usage: make_mnist5k.py <mlxtend wheel or mnist_5k.csv.gz> <output dir>

The CSV holds one digit per row: 784 pixel values (0-255, row-major 28x28)
followed by the label.
"""
import gzip
import io
import struct
import sys
import zipfile
from pathlib import Path

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def read_rows(source: Path):
    if source.suffix == ".whl":
        with zipfile.ZipFile(source) as whl:
            raw = whl.read(MEMBER)
    else:
        raw = source.read_bytes()
    text = gzip.decompress(raw).decode("ascii")
    for line in io.StringIO(text):
        line = line.strip()
        if line:
            yield [int(float(v)) for v in line.split(",")]


def main() -> int:
    if len(sys.argv) != 3:
        print(__doc__, file=sys.stderr)
        return 2
    source, out_dir = Path(sys.argv[1]), Path(sys.argv[2])
    rows = list(read_rows(source))
    if any(len(r) != 785 for r in rows):
        print("unexpected row length", file=sys.stderr)
        return 1
    out_dir.mkdir(parents=True, exist_ok=True)
    images = bytearray(struct.pack(">IIII", 2051, len(rows), 28, 28))
    labels = bytearray(struct.pack(">II", 2049, len(rows)))
    for r in rows:
        images.extend(bytes(r[:784]))
        labels.append(r[784])
    (out_dir / "images-idx3-ubyte").write_bytes(images)
    (out_dir / "labels-idx1-ubyte").write_bytes(labels)
    print(f"wrote {len(rows)} digits to {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
