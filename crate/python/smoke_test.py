"""Smoke test for the gdpack extension module.

Build and run from the repository root:

    cargo build --release -p gdpack-python
    cp target/release/libgdpack.so python/gdpack.so
    python3 python/smoke_test.py
"""

import math
import random

import gdpack


def main():
    rng = random.Random(7)
    centers = [(0.0, 0.0), (8.0, 8.0), (-8.0, 6.0)]
    xs, ys, truth = [], [], []
    for _ in range(6000):
        z = rng.randrange(3)
        truth.append(z)
        xs.append(round(centers[z][0] + rng.gauss(0, 1), 2))
        ys.append(round(centers[z][1] + rng.gauss(0, 1), 2))
    table = {"x": xs, "y": ys, "id": list(range(6000))}

    archive, report = gdpack.compress(table, m_max=200)
    assert report["n"] == 6000 and report["d"] == 3
    assert report["cr"] < 1.0, report
    assert gdpack.decompress(archive) == table

    reopened = gdpack.Archive.from_bytes(archive.to_bytes())
    assert reopened.size_bits == archive.size_bits
    assert sum(reopened.layout()[k] for k in
               ("header", "params", "bases", "ids", "deviations", "weights", "condensed")) == len(reopened)

    samples, weights, read = gdpack.extract_condensed(archive.to_bytes())
    assert sum(weights) == 6000 and len(samples) == archive.m
    assert read < len(archive)
    # weighted sample means equal full-data means up to the quantum
    for c, col in enumerate((xs, ys)):
        mean = sum(w * s[c] for s, w in zip(samples, weights)) / 6000
        assert abs(mean - sum(col) / 6000) < 0.005, (mean, sum(col) / 6000)

    centroids, counts = gdpack.base_centroids(archive)
    assert sum(counts) == 6000 and len(centroids) == len(counts)

    pts = [[x, y] for x, y in zip(xs, ys)]
    full = gdpack.weighted_kmeans(pts, [1.0] * len(pts), 3, inits=5, seed=1)
    assert gdpack.adjusted_mutual_information(full["labels"], truth) > 0.9
    assert -1.0 <= gdpack.silhouette(pts, full["labels"], sample_size=1000, seed=2) <= 1.0
    assert abs(gdpack.binary_entropy(0.25) - 0.8112781244591328) < 1e-12

    metrics = gdpack.analyze(archive, table, k=3, repeats=1)
    assert metrics["ar"] < 1.05 and metrics["ami"] > 0.9, metrics

    corrupt = bytearray(archive.to_bytes())
    corrupt[len(corrupt) // 2] ^= 1
    try:
        gdpack.decompress(gdpack.Archive.from_bytes(bytes(corrupt)))
    except gdpack.IntegrityError:
        pass
    else:
        raise AssertionError("corruption not detected")

    print(f"ok: {archive!r}, CR {report['cr']:.4f}, AR {metrics['ar']:.4f}, AMI {metrics['ami']:.4f}")
    assert not math.isnan(report["configuration_time"])


if __name__ == "__main__":
    main()
