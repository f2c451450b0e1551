import numpy as np
import pytest
from PIL import Image

from postpick import image_io


def test_constant_png(tmp_path):
    path = tmp_path / "c.png"
    Image.fromarray(np.full((64, 64), 100, dtype=np.uint8), mode="L").save(path)
    img = image_io.load_image(path)
    assert img.shape == (64, 64)
    assert np.all(img == 100.0)


def test_stack_round_trip_checkerboard(tmp_path):
    y, x = np.mgrid[0:128, 0:128]
    board = ((y + x) % 2).astype(np.float64)
    images = np.stack([board, board * 2 + 1, 1 - board])
    path = tmp_path / "s.ppk"
    image_io.write_stack(path, images)
    back = image_io.read_stack(path)
    assert back.shape == (3, 128, 128)
    np.testing.assert_array_equal(back, images)
    for i in range(3):
        np.testing.assert_array_equal(image_io.read_stack_member(path, i), images[i])
        np.testing.assert_array_equal(image_io.load_image(f"{path}#{i}"), images[i])


def test_truncated_stack(tmp_path):
    path = tmp_path / "t.ppk"
    image_io.write_stack(path, np.zeros((2, 16, 16)))
    raw = path.read_bytes()
    path.write_bytes(raw[:-100])
    with pytest.raises(image_io.ImageDataError):
        image_io.read_stack(path)
    with pytest.raises(image_io.ImageDataError):
        image_io.read_stack_member(path, 1)


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.ppk"
    path.write_bytes(b"NOPE" + b"\0" * 64)
    with pytest.raises(image_io.ImageFormatError):
        image_io.read_stack(path)


def test_stack_index_out_of_range(tmp_path):
    path = tmp_path / "s.ppk"
    image_io.write_stack(path, np.zeros((2, 16, 16)))
    with pytest.raises(image_io.ImageDataError):
        image_io.read_stack_member(path, 2)


def test_too_small_image(tmp_path):
    path = tmp_path / "tiny.png"
    Image.fromarray(np.zeros((4, 4), dtype=np.uint8), mode="L").save(path)
    with pytest.raises(image_io.ImageSizeError):
        image_io.load_image(path)


def test_normalize_constant():
    assert np.all(image_io.normalize(np.full((16, 16), 7.0)) == 0.0)


def test_normalize_two_point():
    img = np.zeros((8, 8))
    img[:, 4:] = 2.0
    out = image_io.normalize(img)
    assert set(np.unique(out)) == {-1.0, 1.0}


def test_normalize_moments():
    rng = np.random.default_rng(0)
    out = image_io.normalize(rng.uniform(size=(32, 32)) * 50 + 3)
    assert abs(out.mean()) < 1e-9
    assert abs(out.std() - 1.0) < 1e-9


def test_manifest_round_trip(tmp_path):
    entries = [
        image_io.ManifestEntry("a.ppk#0", "particle", "hand"),
        image_io.ManifestEntry("a.ppk#1", "non_particle", "simulator"),
        image_io.ManifestEntry("a.ppk#2", "unlabeled", "prediction"),
    ]
    path = tmp_path / "m.jsonl"
    image_io.write_manifest(path, entries)
    assert image_io.read_manifest(path) == entries


def test_manifest_duplicate_path(tmp_path):
    path = tmp_path / "m.jsonl"
    path.write_text(
        '{"path": "x", "label": "particle", "source": "hand"}\n'
        '{"path": "x", "label": "particle", "source": "hand"}\n'
    )
    with pytest.raises(ValueError):
        image_io.read_manifest(path)


def test_manifest_bad_label():
    with pytest.raises(ValueError):
        image_io.ManifestEntry("x", "maybe", "hand")
    with pytest.raises(ValueError):
        image_io.ManifestEntry("x", "particle", "oracle")
