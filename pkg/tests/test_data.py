"""Data sources: polynomial tasks, IDX image files, rotations, streams and sampling."""

import csv
import os
from collections import Counter
from pathlib import Path

import numpy as np
import pytest

from lib.config.base import ConfigError, FormatError, InvalidInputError
from lib.config.enums import PolyKind, TaskKind
from lib.data.idx import IMAGES_MAGIC, LABELS_MAGIC, load_idx, make_idx, parse_idx, save_idx
from lib.data.images import ImageSet, rotate
from lib.data.poly import INTERVALS, gen_poly, poly_target, write_poly_csv
from lib.data.sampling import sample_plan, subsample_per_class
from lib.data.stream import episode_angles, make_rotated_stream
from lib.utils.encoding import make_int

MNIST_DIR = os.environ.get("REBASIN_MNIST_DIR")


def _images(count: int = 4, rows: int = 3, cols: int = 5, seed: int = 0) -> ImageSet:
    rng = np.random.default_rng(seed)
    pixels = rng.integers(0, 256, size=(count, rows, cols)) / 255.0
    return ImageSet(images=pixels, labels=rng.integers(0, 10, size=count))


class TestPoly:
    @pytest.mark.parametrize("kind", [PolyKind.POL1, PolyKind.POL3])
    def test_noiseless_samples_follow_target(self, kind):
        data = gen_poly(kind, 200, noise_sd=0.0, seed=1)
        low, high = INTERVALS[kind]
        assert data.task == TaskKind.REGRESSION
        assert np.all((data.inputs >= low) & (data.inputs <= high))
        np.testing.assert_array_equal(data.targets, poly_target(kind, data.inputs))

    def test_known_values(self):
        np.testing.assert_array_equal(poly_target(PolyKind.POL1, np.array([[-3.0]])), [[0.0]])
        np.testing.assert_array_equal(poly_target(PolyKind.POL3, np.array([[4.0]])), [[1.0]])

    def test_noise_statistics(self):
        data = gen_poly(PolyKind.POL1, 100_000, seed=2)
        residual = data.targets - poly_target(PolyKind.POL1, data.inputs)
        assert abs(float(residual.mean())) < 1e-3
        np.testing.assert_allclose(float(residual.std()), 0.05, rtol=0.02)

    def test_seeded(self):
        a = gen_poly(PolyKind.POL3, 10, seed=4)
        b = gen_poly(PolyKind.POL3, 10, seed=4)
        np.testing.assert_array_equal(a.inputs, b.inputs)
        np.testing.assert_array_equal(a.targets, b.targets)

    def test_size_checked(self):
        with pytest.raises(ConfigError):
            _ = gen_poly(PolyKind.POL1, 0)

    def test_csv(self, tmp_path):
        path = tmp_path / "pol1.csv"
        data = gen_poly(PolyKind.POL1, 3, seed=0)
        write_poly_csv(path, data)
        with path.open() as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["x", "y"]
        assert float(rows[1][0]) == data.inputs[0, 0]
        assert float(rows[3][1]) == data.targets[2, 0]


class TestIdx:
    def test_header_layout(self):
        payload = make_idx(np.zeros((2, 3, 4), dtype=np.uint8), IMAGES_MAGIC)
        assert payload[:4] == bytes([0, 0, 8, 3])
        assert payload[4:16] == make_int(2) + make_int(3) + make_int(4)
        assert len(payload) == 16 + 24

    @pytest.mark.parametrize("suffix", ["", ".gz"])
    def test_save_and_load(self, tmp_path, suffix):
        images = _images()
        images_path = tmp_path / f"images-idx3-ubyte{suffix}"
        labels_path = tmp_path / f"labels-idx1-ubyte{suffix}"
        save_idx(images_path, labels_path, images)
        loaded = load_idx(images_path, labels_path)
        np.testing.assert_allclose(loaded.images, images.images, atol=1e-12)
        np.testing.assert_array_equal(loaded.labels, images.labels)

    def test_saved_files_are_reproducible(self, tmp_path):
        contents = []
        for name in ("a", "b"):
            directory = tmp_path / name
            directory.mkdir()
            save_idx(directory / "images.gz", directory / "labels.gz", _images())
            contents.append((directory / "images.gz").read_bytes())
        assert contents[0] == contents[1]

    def test_wrong_magic(self):
        labels = make_idx(np.zeros(3, dtype=np.uint8), LABELS_MAGIC)
        with pytest.raises(FormatError) as e:
            _ = parse_idx(labels, IMAGES_MAGIC)
        assert e.value.field == "magic"

    def test_empty_file(self):
        with pytest.raises(FormatError) as e:
            _ = parse_idx(b"", IMAGES_MAGIC)
        assert e.value.field == "magic"

    def test_truncated_header(self):
        with pytest.raises(FormatError) as e:
            _ = parse_idx(make_int(IMAGES_MAGIC) + make_int(1), IMAGES_MAGIC)
        assert e.value.field == "dimensions"

    def test_truncated_and_trailing_payload(self):
        payload = make_idx(np.zeros((2, 2, 2), dtype=np.uint8), IMAGES_MAGIC)
        with pytest.raises(FormatError) as e:
            _ = parse_idx(payload[:-1], IMAGES_MAGIC)
        assert e.value.field == "data"
        with pytest.raises(FormatError):
            _ = parse_idx(payload + b"\x00", IMAGES_MAGIC)

    def test_count_mismatch(self, tmp_path):
        images_path = tmp_path / "images"
        labels_path = tmp_path / "labels"
        _ = images_path.write_bytes(make_idx(np.zeros((3, 2, 2), dtype=np.uint8), IMAGES_MAGIC))
        _ = labels_path.write_bytes(make_idx(np.zeros(2, dtype=np.uint8), LABELS_MAGIC))
        with pytest.raises(FormatError) as e:
            _ = load_idx(images_path, labels_path)
        assert e.value.field == "count"

    @pytest.mark.skipif(MNIST_DIR is None, reason="REBASIN_MNIST_DIR is not set")
    def test_mnist_training_files(self):
        from lib.cli.experiments import load_mnist

        train = load_mnist(Path(str(MNIST_DIR)), "train")
        assert train.size == 60_000
        assert (train.rows, train.cols) == (28, 28)
        assert set(np.unique(train.labels)) == set(range(10))


class TestImages:
    def test_validation(self):
        with pytest.raises(InvalidInputError):
            _ = ImageSet(images=np.full((1, 2, 2), 1.5), labels=np.array([0]))
        with pytest.raises(InvalidInputError):
            _ = ImageSet(images=np.zeros((1, 2, 2)), labels=np.array([10]))

    def test_to_dataset(self):
        data = _images().to_dataset()
        assert data.task == TaskKind.CLASSIFICATION
        assert (data.in_dim, data.out_dim) == (15, 10)

    def test_zero_rotation_is_exact(self):
        images = _images()
        np.testing.assert_array_equal(rotate(images, 0.0).images, images.images)

    def test_full_turn(self):
        images = _images(rows=7, cols=7)
        np.testing.assert_allclose(rotate(images, 360.0).images, images.images, atol=1e-9)

    @pytest.mark.parametrize("angle", [360.0, -360.0, 720.0])
    def test_whole_turns_keep_border(self, angle):
        rng = np.random.default_rng(42)
        images = ImageSet(images=rng.uniform(size=(4, 28, 28)), labels=np.arange(4))
        rotated = rotate(images, angle).images
        np.testing.assert_allclose(rotated, images.images, atol=1e-6)
        np.testing.assert_allclose(rotated[:, 0, :], images.images[:, 0, :], atol=1e-6)
        np.testing.assert_allclose(rotated[:, :, -1], images.images[:, :, -1], atol=1e-6)

    def test_quarter_turn_moves_pixel_clockwise(self):
        pixels = np.zeros((1, 5, 5))
        pixels[0, 1, 0] = 1.0
        rotated = rotate(ImageSet(images=pixels, labels=np.array([0])), 90.0).images[0]
        expected = np.zeros((5, 5))
        expected[0, 3] = 1.0
        np.testing.assert_allclose(rotated, expected, atol=1e-9)

    def test_rotation_there_and_back(self):
        grid = np.arange(28.0) - 13.5
        blob = np.exp(-(grid[:, None] ** 2 + grid[None, :] ** 2) / (2.0 * 5.0**2))
        images = ImageSet(images=blob[None], labels=np.array([3]))
        back = rotate(rotate(images, 37.0), -37.0).images[0]
        np.testing.assert_allclose(back[6:22, 6:22], blob[6:22, 6:22], atol=5e-2)

    def test_labels_preserved(self):
        images = _images()
        np.testing.assert_array_equal(rotate(images, 45.0).labels, images.labels)


class TestStream:
    def test_angles(self):
        assert episode_angles(1) == [0.0]
        assert episode_angles(3) == [0.0, 90.0, 180.0]
        angles = episode_angles(20)
        np.testing.assert_allclose(np.diff(angles), 180.0 / 19.0)
        assert angles[-1] == pytest.approx(180.0)

    def test_rotated_stream(self):
        base = _images(count=40, rows=6, cols=6)
        stream = make_rotated_stream(base, 3, 10, 5, seed=1)
        assert [episode.id for episode in stream] == [0, 1, 2]
        for episode in stream:
            assert episode.train.size == 10
            assert episode.test.size == 5
            assert episode.train.in_dim == 36

    def test_unrotated_episode_uses_base_pixels(self):
        base = _images(count=20, rows=4, cols=4)
        first = make_rotated_stream(base, 2, 6, 3, seed=0)[0]
        rows = {tuple(row) for row in base.images.reshape(20, -1)}
        assert all(tuple(row) in rows for row in first.train.inputs)

    def test_seeded(self):
        base = _images(count=30, rows=4, cols=4)
        a = make_rotated_stream(base, 3, 5, 5, seed=7)
        b = make_rotated_stream(base, 3, 5, 5, seed=7)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x.train.inputs, y.train.inputs)

    def test_oversubscribed(self):
        with pytest.raises(InvalidInputError):
            _ = make_rotated_stream(_images(count=10), 2, 8, 5, seed=0)


class TestSampling:
    def test_width_one(self):
        plan = sample_plan([1, 1], 0)
        assert all(np.array_equal(mat, [[1.0]]) for mat in plan.mats)

    def test_seeded(self):
        a, b = sample_plan([6, 4], 3), sample_plan([6, 4], 3)
        assert all(np.array_equal(x, y) for x, y in zip(a.mats, b.mats))

    @pytest.mark.slow
    def test_uniform_over_permutations(self):
        counts = Counter(
            tuple(int(i) for i in np.argmax(sample_plan([3], seed).mats[0], axis=1)) for seed in range(60_000)
        )
        assert len(counts) == 6
        assert all(abs(count - 10_000) < 500 for count in counts.values())

    def test_subsample_per_class(self, classification_data):
        picked = subsample_per_class(classification_data, 5, seed=0)
        assert picked.size == 15
        assert sorted(Counter(picked.labels().tolist()).values()) == [5, 5, 5]
        assert subsample_per_class(classification_data, 100, seed=0).size == classification_data.size

    def test_subsample_checks(self, classification_data, regression_data):
        with pytest.raises(ConfigError):
            _ = subsample_per_class(regression_data, 2, seed=0)
        with pytest.raises(ConfigError):
            _ = subsample_per_class(classification_data, 0, seed=0)
