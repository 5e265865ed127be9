import numpy as np
import pytest

from popseq.sequences import (
    EngagementSequence,
    NormScheme,
    ScaleValue,
    ShapeVector,
    decompose,
    decompose_matrix,
    denormalize_scale,
    normalize_scale,
    recompose,
)


class TestEngagementSequence:
    def test_valid(self):
        seq = EngagementSequence([0, 1, 1, 5])
        assert len(seq) == 4
        assert seq.scale == 5.0

    def test_rejects_decreasing(self):
        with pytest.raises(ValueError, match="non-decreasing"):
            EngagementSequence([0, 2, 1])

    def test_rejects_negative(self):
        with pytest.raises(ValueError, match="negative"):
            EngagementSequence([-1, 0, 1])

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError, match="non-finite"):
            EngagementSequence([0, np.nan, 1])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            EngagementSequence([])

    def test_values_read_only(self):
        seq = EngagementSequence([1, 2, 3])
        with pytest.raises(ValueError):
            seq.values[0] = 9


class TestShapeVector:
    def test_rejects_above_one(self):
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            ShapeVector([0.5, 1.2])

    def test_rejects_not_ending_at_one(self):
        with pytest.raises(ValueError, match="end at 1"):
            ShapeVector([0.2, 0.9])

    def test_degenerate_must_be_zero(self):
        ShapeVector([0.0, 0.0], degenerate=True)
        with pytest.raises(ValueError, match="all zero"):
            ShapeVector([0.0, 1.0], degenerate=True)


class TestDecompose:
    def test_scale_is_last_value(self):
        shape, scale = decompose(EngagementSequence([2, 6, 8]))
        assert scale.raw == 8.0
        np.testing.assert_allclose(shape.values, [0.25, 0.75, 1.0])

    def test_recompose_round_trip(self):
        seq = EngagementSequence([0, 3, 7, 7, 12])
        shape, scale = decompose(seq)
        back = recompose(shape, scale)
        np.testing.assert_array_equal(back.values, seq.values)

    def test_degenerate_zero_sequence(self):
        shape, scale = decompose(EngagementSequence([0, 0, 0]))
        assert scale.raw == 0.0
        assert shape.degenerate
        assert np.all(shape.values == 0)
        assert np.all(recompose(shape, scale).values == 0)

    def test_negative_scale_rejected(self):
        with pytest.raises(ValueError):
            ScaleValue(-1.0)

    def test_matrix_matches_per_row(self):
        rng = np.random.default_rng(0)
        inc = rng.random((20, 30))
        seqs = np.cumsum(inc, axis=1)
        seqs[3] = 0.0
        shapes, scales, degenerate = decompose_matrix(seqs)
        assert degenerate.tolist() == [i == 3 for i in range(20)]
        for i in range(20):
            shape, scale = decompose(seqs[i])
            assert scales[i] == scale.raw
            np.testing.assert_array_equal(shapes[i], shape.values)


ALL_SCHEMES = [
    NormScheme.none(),
    NormScheme.log(),
    NormScheme.ratio_log(b=0.1),
    NormScheme.ratio_log(b=0.5),
    NormScheme.ratio_log(b=1.0),
    NormScheme.log_log(c=0.1),
    NormScheme.log_log(c=0.5),
    NormScheme.log_log(c=1.0),
]


class TestNormScheme:
    def test_rejects_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown scheme"):
            NormScheme(kind="sqrt")

    def test_rejects_non_positive_offsets(self):
        with pytest.raises(ValueError):
            NormScheme.ratio_log(b=0.0)
        with pytest.raises(ValueError):
            NormScheme.log_log(c=-1.0)

    def test_dict_round_trip(self):
        for scheme in ALL_SCHEMES:
            assert NormScheme.from_dict(scheme.to_dict()) == scheme

    def test_labels_distinct(self):
        labels = [s.label() for s in ALL_SCHEMES]
        assert len(set(labels)) == len(labels)


class TestNormalize:
    def test_none_is_identity(self):
        assert normalize_scale(17.5, NormScheme.none()) == 17.5
        assert denormalize_scale(17.5, NormScheme.none()) == 17.5

    def test_log_value(self):
        got = normalize_scale(np.e - 1.0, NormScheme.log())
        assert got == pytest.approx(1.0, abs=1e-12)

    def test_ratio_log_value(self):
        # raw equal to the horizon with b=1 gives ln 2
        got = normalize_scale(30.0, NormScheme.ratio_log(b=1.0, horizon=30))
        assert got == pytest.approx(0.6931471805599453, abs=1e-12)

    def test_log_log_value(self):
        # fixed point worked backwards: ln(ln(x+1)+1) = 1 at x = e^(e-1) - 1
        raw = np.exp(np.e - 1.0) - 1.0
        got = normalize_scale(raw, NormScheme.log_log(c=1.0))
        assert got == pytest.approx(1.0, abs=1e-12)

    def test_round_trip_all_schemes(self):
        rng = np.random.default_rng(7)
        raws = np.concatenate([
            rng.uniform(0, 1e9, 200),
            rng.uniform(0, 10, 200),
            [0.0, 1.0, 1e9],
        ])
        for scheme in ALL_SCHEMES:
            x = raws
            if scheme.kind == "log-log" and scheme.c < 0.567:
                x = raws[np.log(raws + scheme.c) + scheme.c > 0]
            norm = normalize_scale(x, scheme)
            back = denormalize_scale(norm, scheme)
            worst = np.max(np.abs(back - x) / np.maximum(1.0, x))
            assert worst <= 1e-9, scheme.label()

    def test_strictly_monotone(self):
        raws = np.linspace(0, 1e6, 500) + 1.0
        for scheme in ALL_SCHEMES:
            norm = normalize_scale(raws, scheme)
            assert np.all(np.diff(norm) > 0), scheme.label()

    def test_log_log_domain_error(self):
        # ln(0 + 0.1) + 0.1 < 0: the inner log argument fails
        with pytest.raises(ValueError, match="undefined"):
            normalize_scale(0.0, NormScheme.log_log(c=0.1))

    def test_negative_raw_rejected(self):
        with pytest.raises(ValueError):
            normalize_scale(-1.0, NormScheme.log())

    def test_denormalize_clamps_to_zero(self):
        assert denormalize_scale(-5.0, NormScheme.none()) == 0.0
        assert denormalize_scale(-50.0, NormScheme.log()) == 0.0

    def test_scalar_and_array_agree(self):
        for scheme in ALL_SCHEMES:
            lo = 1.0
            arr = normalize_scale(np.array([lo]), scheme)
            assert isinstance(arr, np.ndarray)
            assert normalize_scale(lo, scheme) == arr[0]
