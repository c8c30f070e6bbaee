"""Data model, file format, distances, and seeded sampling."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from genmetrics import (
    DimensionError,
    FeatureSet,
    FormatError,
    InsufficientSamplesError,
    SeededRng,
    TruncationError,
    ValidationError,
    load_feature_file,
    mix_sets,
    pairwise_distances,
    seeded_split,
    write_feature_file,
)


def make_set(rows, tag="feature", dtype=np.float64):
    return FeatureSet(np.asarray(rows, dtype=dtype), tag)


class TestFeatureSetValidation:
    def test_basic_construction(self):
        s = make_set([[1.0, 2.0], [3.0, 4.0]])
        assert s.n == 2 and s.d == 2
        assert s.space_tag == "feature"

    def test_rejects_empty(self):
        with pytest.raises(ValidationError):
            FeatureSet(np.zeros((0, 3)))
        with pytest.raises(ValidationError):
            FeatureSet(np.zeros((3, 0)))

    def test_rejects_non_2d(self):
        with pytest.raises(ValidationError):
            FeatureSet(np.zeros(5))

    def test_rejects_nan_inf(self):
        with pytest.raises(ValidationError):
            make_set([[np.nan, 0.0]])
        with pytest.raises(ValidationError):
            make_set([[np.inf, 0.0]])

    def test_rejects_unknown_tag(self):
        with pytest.raises(ValidationError):
            make_set([[0.0]], tag="embedding")

    def test_softmax_row_sums_checked(self):
        make_set([[0.25, 0.75]], tag="softmax")  # fine
        with pytest.raises(ValidationError):
            make_set([[0.6, 0.6]], tag="softmax")
        with pytest.raises(ValidationError):
            make_set([[-0.1, 1.1]], tag="softmax")

    def test_softmax_tolerates_float32_rounding(self):
        g = np.random.Generator(np.random.PCG64(7))
        logits = g.standard_normal((50, 1000))
        p = np.exp(logits - logits.max(axis=1, keepdims=True))
        p /= p.sum(axis=1, keepdims=True)
        s = FeatureSet(p.astype(np.float32), "softmax")
        assert s.n == 50

    def test_caller_array_not_aliased(self):
        src = np.ones((2, 2))
        s = FeatureSet(src)
        src[0, 0] = 99.0
        assert s.data[0, 0] == 1.0

    def test_payload_read_only(self):
        s = make_set([[1.0, 2.0]])
        with pytest.raises(ValueError):
            s.data[0, 0] = 0.0

    def test_equality_ignores_name(self):
        a = FeatureSet(np.ones((2, 2)), "feature", name="a")
        b = FeatureSet(np.ones((2, 2)), "feature", name="b")
        assert a == b
        assert a != FeatureSet(np.ones((2, 2)), "pixel")


class TestFileFormat:
    def test_round_trip_small(self, tmp_path):
        s = make_set([[1.5, -2.25], [0.0, 8.0]], dtype=np.float32)
        p = tmp_path / "small.fset"
        write_feature_file(s, p)
        back = load_feature_file(p)
        assert back == s
        assert back.data.dtype == np.float32

    def test_round_trip_large_random(self, tmp_path):
        g = np.random.Generator(np.random.PCG64(123))
        data = g.standard_normal((2000, 512)).astype(np.float32)
        s = FeatureSet(data, "feature")
        p = tmp_path / "big.fset"
        write_feature_file(s, p)
        back = load_feature_file(p)
        assert np.array_equal(back.data, data)
        assert back.space_tag == "feature"

    def test_single_point_file_size(self, tmp_path):
        s = make_set([[3.0]], dtype=np.float32)
        p = tmp_path / "one.fset"
        write_feature_file(s, p)
        assert p.stat().st_size == 24 + 4

    def test_header_layout_exact(self, tmp_path):
        s = FeatureSet(np.array([[0.25, 0.25, 0.5]], dtype=np.float32), "softmax")
        p = tmp_path / "hdr.fset"
        write_feature_file(s, p)
        raw = p.read_bytes()
        assert raw[0:4] == b"FSET"
        assert raw[4] == 1
        assert raw[5] == 2  # softmax tag code
        assert raw[6:8] == b"\x00\x00"
        assert int.from_bytes(raw[8:16], "little") == 1
        assert int.from_bytes(raw[16:24], "little") == 3
        assert np.frombuffer(raw, dtype="<f4", offset=24).tolist() == [0.25, 0.25, 0.5]

    def test_space_tag_codes_round_trip(self, tmp_path):
        for code, tag in enumerate(("pixel", "feature", "softmax")):
            data = np.full((2, 2), 0.5, dtype=np.float32)
            s = FeatureSet(data, tag)
            p = tmp_path / f"{tag}.fset"
            write_feature_file(s, p)
            assert p.read_bytes()[5] == code
            assert load_feature_file(p).space_tag == tag

    def test_handcrafted_bytes_load(self, tmp_path):
        payload = np.array([1.0, -1.0], dtype="<f4").tobytes()
        raw = b"FSET" + bytes([1, 0, 0, 0]) + (2).to_bytes(8, "little") + (1).to_bytes(8, "little") + payload
        p = tmp_path / "hand.fset"
        p.write_bytes(raw)
        s = load_feature_file(p)
        assert s.space_tag == "pixel"
        assert s.data.tolist() == [[1.0], [-1.0]]

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "bad.fset"
        p.write_bytes(b"JUNK" + bytes(24))
        with pytest.raises(FormatError):
            load_feature_file(p)

    def test_bad_version(self, tmp_path):
        raw = b"FSET" + bytes([9, 1, 0, 0]) + (1).to_bytes(8, "little") + (1).to_bytes(8, "little") + bytes(4)
        p = tmp_path / "v9.fset"
        p.write_bytes(raw)
        with pytest.raises(FormatError):
            load_feature_file(p)

    def test_truncated_payload(self, tmp_path):
        s = FeatureSet(np.zeros((4, 4), dtype=np.float32))
        p = tmp_path / "trunc.fset"
        write_feature_file(s, p)
        raw = p.read_bytes()
        p.write_bytes(raw[:-8])
        with pytest.raises(TruncationError):
            load_feature_file(p)

    def test_oversized_payload(self, tmp_path):
        s = FeatureSet(np.zeros((4, 4), dtype=np.float32))
        p = tmp_path / "extra.fset"
        write_feature_file(s, p)
        p.write_bytes(p.read_bytes() + b"\x00\x00\x00\x00")
        with pytest.raises(TruncationError):
            load_feature_file(p)

    def test_truncated_header(self, tmp_path):
        p = tmp_path / "tiny.fset"
        p.write_bytes(b"FSET\x01")
        with pytest.raises(TruncationError):
            load_feature_file(p)

    def test_nan_payload_rejected_on_load(self, tmp_path):
        payload = np.array([np.nan], dtype="<f4").tobytes()
        raw = b"FSET" + bytes([1, 1, 0, 0]) + (1).to_bytes(8, "little") + (1).to_bytes(8, "little") + payload
        p = tmp_path / "nan.fset"
        p.write_bytes(raw)
        with pytest.raises(ValidationError):
            load_feature_file(p)

    def test_mutated_set_refused_no_file_written(self, tmp_path):
        s = FeatureSet(np.ones((2, 2), dtype=np.float32))
        s.data.setflags(write=True)
        s.data[0, 0] = np.nan
        p = tmp_path / "corrupt.fset"
        with pytest.raises(ValidationError):
            write_feature_file(s, p)
        assert not p.exists()

    def test_csv_load(self, tmp_path):
        p = tmp_path / "pts.csv"
        p.write_text("1.0,2.0\n3.0,4.0\n")
        s = load_feature_file(p)
        assert s.space_tag == "feature"
        assert s.data.tolist() == [[1.0, 2.0], [3.0, 4.0]]

    def test_csv_malformed(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("1.0,oops\n")
        with pytest.raises(FormatError):
            load_feature_file(p)

    def test_missing_file(self):
        with pytest.raises(OSError):
            load_feature_file("/nonexistent/never.fset")

    @given(
        data=arrays(
            np.float32,
            st.tuples(st.integers(1, 8), st.integers(1, 5)),
            elements=st.floats(-1e6, 1e6, width=32),
        )
    )
    @settings(max_examples=40, deadline=None)
    def test_round_trip_property(self, data, tmp_path_factory):
        s = FeatureSet(data, "feature")
        p = tmp_path_factory.mktemp("rt") / "s.fset"
        write_feature_file(s, p)
        assert load_feature_file(p) == s


class TestPairwiseDistances:
    def test_single_pair_zero(self):
        a = make_set([[1.0, 2.0, 3.0]])
        dm = pairwise_distances(a, a)
        assert dm.values.shape == (1, 1)
        assert dm.values[0, 0] == 0.0

    def test_three_four_five(self):
        a = make_set([[0.0, 0.0]])
        b = make_set([[3.0, 4.0]])
        assert pairwise_distances(a, b).values[0, 0] == 5.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            pairwise_distances(make_set([[0.0]]), make_set([[0.0, 1.0]]))

    def test_swap_transposes_exactly(self):
        g = np.random.Generator(np.random.PCG64(5))
        a = FeatureSet(g.standard_normal((13, 7)))
        b = FeatureSet(g.standard_normal((9, 7)))
        ab = pairwise_distances(a, b).values
        ba = pairwise_distances(b, a).values
        assert np.array_equal(ab, ba.T)

    def test_self_distances_zero_diagonal_symmetric(self):
        g = np.random.Generator(np.random.PCG64(6))
        a = FeatureSet(g.standard_normal((40, 12)))
        dm = pairwise_distances(a, a).values
        assert np.all(np.diag(dm) == 0.0)
        assert np.array_equal(dm, dm.T)

    def test_identical_rows_exact_zero(self):
        row = np.array([0.1, 0.2, 0.7], dtype=np.float32)
        a = FeatureSet(np.stack([row, row * 2]))
        b = FeatureSet(np.stack([row, row * 3]))
        assert pairwise_distances(a, b).values[0, 0] == 0.0

    @given(st.integers(0, 2**32))
    @settings(max_examples=25, deadline=None)
    def test_triangle_inequality(self, seed):
        g = np.random.Generator(np.random.PCG64(seed))
        pts = FeatureSet(g.standard_normal((12, 4)) * g.uniform(0.1, 10))
        dm = pairwise_distances(pts, pts).values
        n = pts.n
        idx = g.integers(0, n, size=(30, 3))
        for i, j, k in idx:
            assert dm[i, k] <= dm[i, j] + dm[j, k] + 1e-6


class TestSeededSplit:
    def test_sizes_and_disjointness(self):
        data = np.arange(20, dtype=np.float64).reshape(20, 1)
        s = FeatureSet(data)
        parts = seeded_split(s, [8, 7, 5], SeededRng(42))
        assert [p.n for p in parts] == [8, 7, 5]
        seen = np.concatenate([p.data.ravel() for p in parts])
        assert sorted(seen.tolist()) == list(range(20))

    def test_full_split_is_permutation(self):
        data = np.arange(10, dtype=np.float64).reshape(10, 1)
        parts = seeded_split(FeatureSet(data), [10], SeededRng(0))
        assert sorted(parts[0].data.ravel().tolist()) == list(range(10))

    def test_deterministic(self):
        s = FeatureSet(np.arange(30, dtype=np.float64).reshape(30, 1))
        a = seeded_split(s, [10, 10], SeededRng(9))
        b = seeded_split(s, [10, 10], SeededRng(9))
        assert a[0] == b[0] and a[1] == b[1]
        c = seeded_split(s, [10, 10], SeededRng(10))
        assert c[0] != a[0]

    def test_oversubscription(self):
        s = FeatureSet(np.zeros((5, 1)))
        with pytest.raises(InsufficientSamplesError):
            seeded_split(s, [3, 3], SeededRng(1))

    def test_bad_sizes(self):
        s = FeatureSet(np.zeros((5, 1)))
        with pytest.raises(ValidationError):
            seeded_split(s, [], SeededRng(1))
        with pytest.raises(ValidationError):
            seeded_split(s, [0, 2], SeededRng(1))


class TestMixSets:
    def setup_method(self):
        # disjoint value ranges so provenance of each row is recoverable
        self.real = FeatureSet(np.arange(0, 100, dtype=np.float64).reshape(100, 1))
        self.other = FeatureSet(np.arange(1000, 1100, dtype=np.float64).reshape(100, 1))

    def count_other(self, mixed):
        return int((mixed.data >= 1000).sum())

    def test_t_zero_all_real(self):
        m = mix_sets(self.real, self.other, 0.0, 50, SeededRng(3))
        assert m.n == 50
        assert self.count_other(m) == 0

    def test_t_one_all_other(self):
        m = mix_sets(self.real, self.other, 1.0, 50, SeededRng(3))
        assert self.count_other(m) == 50

    def test_counts_follow_round_half_even(self):
        for t in np.linspace(0.0, 1.0, 11):
            m = mix_sets(self.real, self.other, float(t), 30, SeededRng(8))
            assert self.count_other(m) == int(np.rint(t * 30))
        # explicit half case: 0.5 * 25 = 12.5 rounds to 12 (even)
        m = mix_sets(self.real, self.other, 0.5, 25, SeededRng(8))
        assert self.count_other(m) == 12

    def test_no_replacement(self):
        m = mix_sets(self.real, self.other, 0.5, 100, SeededRng(4))
        vals = m.data.ravel().tolist()
        assert len(set(vals)) == len(vals)

    def test_deterministic(self):
        a = mix_sets(self.real, self.other, 0.3, 40, SeededRng(11))
        b = mix_sets(self.real, self.other, 0.3, 40, SeededRng(11))
        assert a == b

    def test_insufficient_pool(self):
        with pytest.raises(InsufficientSamplesError):
            mix_sets(self.real, self.other, 1.0, 101, SeededRng(0))

    def test_bad_fraction(self):
        with pytest.raises(ValidationError):
            mix_sets(self.real, self.other, -0.1, 10, SeededRng(0))
        with pytest.raises(ValidationError):
            mix_sets(self.real, self.other, 1.5, 10, SeededRng(0))

    def test_space_mismatch(self):
        px = FeatureSet(np.zeros((10, 1)), "pixel")
        with pytest.raises(ValidationError):
            mix_sets(self.real, px, 0.5, 10, SeededRng(0))


class TestSeededRng:
    def test_same_seed_same_stream(self):
        a = SeededRng(77).generator().standard_normal(5)
        b = SeededRng(77).generator().standard_normal(5)
        assert np.array_equal(a, b)

    def test_derive_changes_stream(self):
        base = SeededRng(77)
        a = base.derive(1).generator().standard_normal(5)
        b = base.derive(2).generator().standard_normal(5)
        assert not np.array_equal(a, b)

    def test_derive_deterministic(self):
        assert SeededRng(5).derive(1, 2).seed == SeededRng(5).derive(1, 2).seed

    def test_seed_range_enforced(self):
        with pytest.raises(ValidationError):
            SeededRng(-1)
        with pytest.raises(ValidationError):
            SeededRng(2**64)
        SeededRng(2**64 - 1)  # boundary ok
