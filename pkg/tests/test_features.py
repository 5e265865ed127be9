import datetime as dt
import json

import numpy as np
import pytest

from popseq.features import (
    DAYPART_LABELS,
    FEATURE_CATEGORIES,
    FEATURE_NAMES,
    N_FEATURES,
    SEASON_LABELS,
    PostRecord,
    daypart_index,
    engineer,
    engineer_many,
    schema,
    season_index,
    write_schema,
)


def feat(vec, name):
    return vec[FEATURE_NAMES.index(name)]


class TestSchema:
    def test_count_and_categories(self):
        assert N_FEATURES == 37
        assert len(FEATURE_NAMES) == 37
        assert len(set(FEATURE_NAMES)) == 37
        sizes = {k: len(v) for k, v in FEATURE_CATEGORIES.items()}
        assert sizes == {"text": 15, "user": 13, "image": 5, "time": 4}
        flat = sum(FEATURE_CATEGORIES.values(), ())
        assert flat == FEATURE_NAMES

    def test_order_is_frozen(self):
        assert FEATURE_NAMES[0] == "title_word_count"
        assert FEATURE_NAMES[10] == "tag_count"
        assert FEATURE_NAMES[15] == "mean_views"
        assert FEATURE_NAMES[23] == "views_by_photocount"
        assert FEATURE_NAMES[28] == "img_width"
        assert FEATURE_NAMES[33] == "posted_hour"
        assert FEATURE_NAMES[36] == "posted_daypart"

    def test_label_tuples(self):
        assert len(SEASON_LABELS) == 4
        assert len(DAYPART_LABELS) == 5

    def test_schema_writer(self, tmp_path):
        path = tmp_path / "schema.json"
        write_schema(path)
        assert json.loads(path.read_text()) == list(FEATURE_NAMES)
        assert schema() == list(FEATURE_NAMES)


class TestTextStats:
    def test_title_hello_world(self):
        vec = engineer(PostRecord(title="Hello World"))
        assert feat(vec, "title_word_count") == 2
        assert feat(vec, "title_length") == 11
        assert feat(vec, "title_avg_word_len") == 5.0
        assert feat(vec, "title_uppercase_words") == 0
        assert feat(vec, "title_titlecase_words") == 2

    def test_uppercase_words(self):
        vec = engineer(PostRecord(title="NYC at NIGHT"))
        assert feat(vec, "title_uppercase_words") == 2
        assert feat(vec, "title_titlecase_words") == 0
        assert feat(vec, "title_word_count") == 3

    def test_empty_strings(self):
        vec = engineer(PostRecord())
        assert feat(vec, "title_word_count") == 0
        assert feat(vec, "title_avg_word_len") == 0
        assert feat(vec, "desc_length") == 0
        assert feat(vec, "tag_count") == 0
        assert feat(vec, "tags_avg_len") == 0

    def test_description_independent_of_title(self):
        vec = engineer(PostRecord(title="one", description="two words here"))
        assert feat(vec, "title_word_count") == 1
        assert feat(vec, "desc_word_count") == 3
        assert feat(vec, "desc_length") == len("two words here")

    def test_tag_stats(self):
        vec = engineer(PostRecord(tags=("sunset", "Beach", "HDR")))
        assert feat(vec, "tag_count") == 3
        assert feat(vec, "tags_total_len") == 6 + 5 + 3
        assert feat(vec, "tags_avg_len") == pytest.approx(14 / 3)
        assert feat(vec, "tags_uppercase") == 1
        assert feat(vec, "tags_titlecase") == 1


class TestUserStats:
    def test_passthrough(self):
        vec = engineer(PostRecord(mean_views=100.0, photo_count=4.0, contacts=7.0,
                                  is_pro=1.0, account_age_days=365.0))
        assert feat(vec, "mean_views") == 100.0
        assert feat(vec, "photo_count") == 4.0
        assert feat(vec, "contacts") == 7.0
        assert feat(vec, "is_pro") == 1.0
        assert feat(vec, "account_age_days") == 365.0

    def test_ratios(self):
        vec = engineer(PostRecord(mean_views=100.0, photo_count=4.0, num_groups=8.0,
                                  contacts=50.0, groups_avg_pictures=2.0,
                                  avg_groups_memb=10.0))
        assert feat(vec, "views_by_photocount") == 25.0
        assert feat(vec, "views_by_numgroups") == 12.5
        assert feat(vec, "views_by_contacts") == 2.0
        assert feat(vec, "views_by_groups_avg_pictures") == 50.0
        assert feat(vec, "views_by_avg_groups_memb") == 10.0

    def test_zero_denominator_maps_to_zero(self):
        vec = engineer(PostRecord(mean_views=100.0))
        for name in ("views_by_photocount", "views_by_numgroups", "views_by_contacts",
                     "views_by_groups_avg_pictures", "views_by_avg_groups_memb"):
            assert feat(vec, name) == 0.0

    def test_negative_stat_rejected(self):
        with pytest.raises(ValueError):
            PostRecord(mean_views=-1.0)
        with pytest.raises(ValueError):
            PostRecord(contacts=float("nan"))


class TestImageStats:
    def test_passthrough(self):
        vec = engineer(PostRecord(img_width=800.0, img_height=600.0, img_aspect=800 / 600,
                                  img_filesize_kb=120.0, img_mean_brightness=90.5))
        assert feat(vec, "img_width") == 800.0
        assert feat(vec, "img_height") == 600.0
        assert feat(vec, "img_aspect") == pytest.approx(800 / 600)
        assert feat(vec, "img_filesize_kb") == 120.0
        assert feat(vec, "img_mean_brightness") == 90.5

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            PostRecord(img_width=float("inf"))


class TestTimeStats:
    def test_summer_tuesday_lunch(self):
        # 2014-07-15 was a Tuesday
        ts = dt.datetime(2014, 7, 15, 13, 0)
        vec = engineer(PostRecord(posted_at=ts))
        assert feat(vec, "posted_hour") == 13
        assert feat(vec, "posted_weekday") == 1
        assert feat(vec, "posted_season") == 1
        assert feat(vec, "posted_daypart") == 1

    def test_season_boundaries(self):
        assert season_index(3) == 0
        assert season_index(5) == 0
        assert season_index(6) == 1
        assert season_index(8) == 1
        assert season_index(9) == 2
        assert season_index(11) == 2
        assert season_index(12) == 3
        assert season_index(2) == 3
        with pytest.raises(ValueError):
            season_index(0)
        with pytest.raises(ValueError):
            season_index(13)

    def test_daypart_boundaries(self):
        assert daypart_index(6) == 0
        assert daypart_index(10) == 0
        assert daypart_index(11) == 1
        assert daypart_index(14) == 1
        assert daypart_index(15) == 2
        assert daypart_index(17) == 2
        assert daypart_index(18) == 3
        assert daypart_index(21) == 3
        assert daypart_index(22) == 4
        assert daypart_index(5) == 4
        assert daypart_index(0) == 4
        with pytest.raises(ValueError):
            daypart_index(24)

    def test_posted_at_must_be_datetime(self):
        with pytest.raises(ValueError):
            PostRecord(posted_at="2014-07-15")


class TestEngineerMany:
    def test_shapes(self):
        posts = [PostRecord(title=f"post {i}") for i in range(5)]
        X = engineer_many(posts)
        assert X.shape == (5, 37)
        np.testing.assert_array_equal(X[2], engineer(posts[2]))

    def test_empty(self):
        assert engineer_many([]).shape == (0, 37)

    def test_vector_is_finite(self):
        vec = engineer(PostRecord(title="A B C", mean_views=1e6, photo_count=1.0))
        assert np.all(np.isfinite(vec))
        assert vec.dtype == np.float64
