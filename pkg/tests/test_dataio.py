"""Tests for dataset ingestion, standardization, and subsampling."""

import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as npst

from clusterlab.dataio import (
    LabeledDataset,
    load_csv,
    load_har,
    load_idx,
    standardize,
    subsample,
    write_csv,
)
from clusterlab.errors import FormatError, InvalidInput
from clusterlab.rng import Rng

from _idxio import serialize_idx_images, serialize_idx_labels


@pytest.fixture
def idx_pair(tmp_path):
    images = np.arange(8, dtype=np.uint8).reshape(2, 2, 2) * 20
    labels = np.array([3, 7], dtype=np.uint8)
    img_path = tmp_path / "imgs.idx"
    lab_path = tmp_path / "labs.idx"
    img_path.write_bytes(serialize_idx_images(images))
    lab_path.write_bytes(serialize_idx_labels(labels))
    return img_path, lab_path, images, labels


class TestLoadIdx:
    def test_fixture_shape_and_values(self, idx_pair):
        img_path, lab_path, images, labels = idx_pair
        ds = load_idx(img_path, lab_path, name="fix")
        assert ds.data.shape == (2, 4)
        assert np.array_equal(ds.data, images.reshape(2, 4).astype(float))
        # labels {3, 7} remap to {0, 1}
        assert ds.labels.tolist() == [0, 1]
        assert ds.name == "fix"

    def test_roundtrip_bytes_exact(self, idx_pair):
        img_path, lab_path, images, labels = idx_pair
        ds = load_idx(img_path, lab_path)
        rebuilt = serialize_idx_images(ds.data.astype(np.uint8).reshape(2, 2, 2))
        assert rebuilt == img_path.read_bytes()
        # label bytes carry the original (pre-remap) ids
        assert serialize_idx_labels(labels) == lab_path.read_bytes()

    def test_bad_image_magic(self, tmp_path, idx_pair):
        _, lab_path, _, _ = idx_pair
        bad = tmp_path / "bad.idx"
        bad.write_bytes(struct.pack(">IIII", 0x00000802, 1, 2, 2) + bytes(4))
        with pytest.raises(FormatError):
            load_idx(bad, lab_path)

    def test_bad_label_magic(self, tmp_path, idx_pair):
        img_path, _, _, _ = idx_pair
        bad = tmp_path / "bad.idx"
        bad.write_bytes(struct.pack(">II", 0x00000802, 2) + bytes(2))
        with pytest.raises(FormatError):
            load_idx(img_path, bad)

    def test_truncated_images(self, tmp_path, idx_pair):
        img_path, lab_path, _, _ = idx_pair
        cut = tmp_path / "cut.idx"
        cut.write_bytes(img_path.read_bytes()[:-3])
        with pytest.raises(FormatError):
            load_idx(cut, lab_path)

    def test_truncated_header(self, tmp_path, idx_pair):
        _, lab_path, _, _ = idx_pair
        cut = tmp_path / "hdr.idx"
        cut.write_bytes(struct.pack(">II", 0x00000803, 1))
        with pytest.raises(FormatError):
            load_idx(cut, lab_path)

    def test_count_mismatch(self, tmp_path, idx_pair):
        img_path, _, _, _ = idx_pair
        three = tmp_path / "three.idx"
        three.write_bytes(serialize_idx_labels([1, 2, 3]))
        with pytest.raises(InvalidInput):
            load_idx(img_path, three)


class TestLoadHar:
    def _write(self, tmp_path, n_cols=561, n_rows=3, labels=(1, 4, 6)):
        feats = tmp_path / "X.txt"
        labs = tmp_path / "y.txt"
        rng = Rng(1)
        lines = []
        for _ in range(n_rows):
            vals = rng.uniforms(n_cols)
            lines.append(" ".join(f"{v: .7e}" for v in vals))
        feats.write_text("\n".join(lines) + "\n")
        labs.write_text("\n".join(str(v) for v in labels) + "\n")
        return feats, labs

    def test_fixture(self, tmp_path):
        feats, labs = self._write(tmp_path)
        ds = load_har(feats, labs)
        assert ds.data.shape == (3, 561)
        assert ds.labels.tolist() == [0, 1, 2]  # {1,4,6} remapped

    def test_ragged_row(self, tmp_path):
        feats, labs = self._write(tmp_path)
        content = feats.read_text().splitlines()
        content[1] = " ".join(content[1].split()[:-1])  # drop one token
        feats.write_text("\n".join(content) + "\n")
        with pytest.raises(FormatError):
            load_har(feats, labs)

    def test_non_numeric(self, tmp_path):
        feats, labs = self._write(tmp_path)
        content = feats.read_text().replace("e-01", "x-01", 1)
        feats.write_text(content)
        with pytest.raises(FormatError):
            load_har(feats, labs)

    def test_non_integer_label(self, tmp_path):
        feats, labs = self._write(tmp_path)
        labs.write_text("1\nfoo\n3\n")
        with pytest.raises(FormatError):
            load_har(feats, labs)

    def test_row_count_mismatch(self, tmp_path):
        feats, labs = self._write(tmp_path, labels=(1, 2))
        with pytest.raises(InvalidInput):
            load_har(feats, labs)

    def test_crlf_accepted(self, tmp_path):
        feats, labs = self._write(tmp_path, n_cols=4)
        feats.write_bytes(feats.read_text().replace("\n", "\r\n").encode("ascii"))
        ds = load_har(feats, labs, expected_cols=4)
        assert ds.data.shape == (3, 4)


class TestCsvRoundTrip:
    def test_roundtrip_exact(self, tmp_path):
        X = Rng(9).normals(40).reshape(10, 4) * 1e3
        ds = LabeledDataset(data=X, labels=np.arange(10) % 3, name="rt")
        path = tmp_path / "ds.csv"
        write_csv(ds, path)
        back = load_csv(path, name="rt")
        assert np.array_equal(back.data, ds.data)
        assert np.array_equal(back.labels, ds.labels)

    def test_ragged_csv(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1.0,2.0,0\n1.0,1\n")
        with pytest.raises(FormatError):
            load_csv(path)

    def test_non_integer_label_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1.0,2.0,0.5\n")
        with pytest.raises(FormatError):
            load_csv(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(FormatError):
            load_csv(path)


class TestStandardize:
    def test_two_point_column(self):
        Z, params = standardize([[1.0], [3.0]])
        assert Z[:, 0].tolist() == [-1.0, 1.0]
        assert params.means[0] == 2.0
        assert params.stds[0] == 1.0

    def test_constant_column_zeroed(self):
        Z, params = standardize([[5.0, 1.0], [5.0, 2.0], [5.0, 3.0]])
        assert np.all(Z[:, 0] == 0.0)
        assert params.stds[0] == 0.0

    def test_inexact_constant_column(self):
        # mean of repeated 0.1 is not exactly 0.1 in floats; still zeroed
        Z, params = standardize(np.full((7, 1), 0.1))
        assert np.all(Z == 0.0)
        assert params.stds[0] == 0.0

    def test_random_moments(self):
        X = Rng(77).normals(1000).reshape(100, 10) * 3.0 + 7.0
        Z, _ = standardize(X)
        assert np.all(np.abs(Z.mean(axis=0)) < 1e-9)
        assert np.all(np.abs(Z.std(axis=0) - 1.0) < 1e-9)

    @given(
        X=npst.arrays(
            np.float64,
            st.tuples(st.integers(2, 30), st.integers(1, 5)),
            elements=st.floats(-1e8, 1e8, allow_nan=False, allow_infinity=False),
        )
    )
    @settings(max_examples=60, deadline=None)
    def test_idempotent(self, X):
        Z1, _ = standardize(X)
        Z2, _ = standardize(Z1)
        assert np.all(np.abs(Z2 - Z1) <= 1e-9)


class TestSubsample:
    def _dataset(self, counts):
        labels = np.concatenate([np.full(c, i) for i, c in enumerate(counts)])
        X = Rng(5).normals(labels.size * 3).reshape(labels.size, 3)
        return LabeledDataset(data=X, labels=labels, name="sub")

    def test_full_sample_identity(self):
        ds = self._dataset([10, 20])
        out = subsample(ds, 30, seed=99)
        assert np.array_equal(out.data, ds.data)
        assert np.array_equal(out.labels, ds.labels)

    def test_balanced_within_one(self):
        ds = self._dataset([600] * 10)
        out = subsample(ds, 500, seed=4)
        counts = np.bincount(out.labels, minlength=10)
        assert np.all(np.abs(counts - 50) <= 1)
        assert counts.sum() == 500

    def test_proportions_within_one(self):
        ds = self._dataset([800, 100, 100])
        out = subsample(ds, 333, seed=12)
        counts = np.bincount(out.labels, minlength=3)
        expected = 333 * np.array([800, 100, 100]) / 1000.0
        assert np.all(np.abs(counts - expected) <= 1.0)
        assert counts.sum() == 333

    def test_deterministic(self):
        ds = self._dataset([50, 70, 30])
        a = subsample(ds, 60, seed=1)
        b = subsample(ds, 60, seed=1)
        assert np.array_equal(a.data, b.data)
        assert np.array_equal(a.labels, b.labels)
        c = subsample(ds, 60, seed=2)
        assert not np.array_equal(a.data, c.data)

    def test_sub_multiset(self):
        ds = self._dataset([13, 29, 7])
        out = subsample(ds, 17, seed=3)
        orig = np.bincount(ds.labels)
        got = np.bincount(out.labels, minlength=orig.size)
        assert np.all(got <= orig)

    def test_rows_come_from_original(self):
        ds = self._dataset([40, 40])
        out = subsample(ds, 20, seed=8)
        source = {tuple(row) for row in ds.data}
        assert all(tuple(row) in source for row in out.data)

    def test_out_of_range(self):
        ds = self._dataset([5, 5])
        with pytest.raises(InvalidInput):
            subsample(ds, 0, seed=1)
        with pytest.raises(InvalidInput):
            subsample(ds, 11, seed=1)


class TestLabeledDataset:
    def test_length_mismatch(self):
        with pytest.raises(InvalidInput):
            LabeledDataset(data=np.ones((3, 2)), labels=np.array([0, 1]), name="x")

    def test_negative_labels_rejected(self):
        with pytest.raises(InvalidInput):
            LabeledDataset(data=np.ones((2, 2)), labels=np.array([0, -1]), name="x")
