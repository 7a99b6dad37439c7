"""Smoke test for the `cds` extension module.

Build and install the module first:

    pip install maturin
    maturin build --release -m crates/py/Cargo.toml -o dist
    pip install dist/cds-*.whl

then run `python python/smoke_test.py` (or `pytest python/`).
"""

import json
import os
import tempfile

import cds

SIZE = 96


def disk_ppm():
    """Binary PPM of a dark-red disk on a light-gray background, plus its truth."""
    pixels = bytearray()
    truth = []
    for y in range(SIZE):
        row = []
        for x in range(SIZE):
            inside = (x - 48) ** 2 + (y - 48) ** 2 <= 24**2
            row.append(inside)
            pixels += bytes((170, 30, 40) if inside else (210, 210, 205))
        truth.append(row)
    header = b"P6\n%d %d\n255\n" % (SIZE, SIZE)
    return header + bytes(pixels), cds.Mask(truth)


def test_graph_oracles():
    g = cds.example_graph()
    assert g.n == 8 and g.edge_count() == 9
    assert sorted(cds.maximal_cliques(g)) == [[0, 1], [1, 2], [3, 4], [4, 5, 6, 7]]
    assert cds.is_dominant_set(g, [4, 5, 6, 7])
    assert not cds.is_dominant_set(g, [5, 6, 7])
    singleton = cds.AffinityMatrix([[0.0]])
    assert cds.is_dominant_set(singleton, [0])


def test_extract():
    g = cds.example_graph()
    result = cds.extract(g, [4])
    assert result.union == [3, 4, 5, 6, 7]
    assert result.leftover == []
    for cluster in result.clusters:
        assert cluster.converged
        assert cluster.kkt_residual < 1e-6
        assert abs(sum(cluster.vector) - 1.0) < 1e-12
    assert cds.extract(g, [4], dynamics="pairwise").union == result.union
    try:
        cds.extract(g, [8])
    except ValueError:
        pass
    else:
        raise AssertionError("out-of-range seed accepted")


def test_segment_and_metrics():
    image, truth = disk_ppm()
    scribble = {
        "kind": "scribble-foreground",
        "strokes": [{"tag": "fg", "points": [[36, 48], [60, 48]]}, {"tag": "fg", "points": [[48, 36], [48, 60]]}],
    }
    seg = cds.segment(image, json.dumps(scribble), superpixels=100)
    assert (seg.mask.width, seg.mask.height) == (SIZE, SIZE)
    j = cds.jaccard(seg.mask, truth)
    assert j >= 0.9, j
    assert abs(cds.dsc(seg.mask, truth) - 2 * j / (1 + j)) < 1e-12
    assert cds.error_rate(seg.mask, truth, (19, 19, 58, 58)) < 0.05
    diagnostics = json.loads(seg.diagnostics)
    assert diagnostics["foreground_pixels"] == seg.mask.count()

    assert cds.Mask.from_rle(SIZE, SIZE, seg.mask.to_rle()) == seg.mask
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "mask.png")
        seg.save_mask(path)
        assert cds.Mask.load(path) == seg.mask

        ppm = os.path.join(tmp, "disk.ppm")
        with open(ppm, "wb") as f:
            f.write(image)
        again = cds.segment(ppm, json.dumps(scribble), superpixels=100)
        assert again.mask == seg.mask and again.diagnostics == seg.diagnostics


def test_bad_annotation():
    image, _ = disk_ppm()
    try:
        cds.segment(image, json.dumps({"kind": "bounding-box", "box": [10, 10, 0, 5]}))
    except ValueError:
        pass
    else:
        raise AssertionError("zero-width box accepted")


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_"):
            fn()
            print(f"ok  {name}")
