"""Feature engineering: raw post records -> fixed 37-feature vectors.

Category layout (15 text, 13 user, 5 image, 4 time):

* text: word count, char length, average word length, uppercase-word
  count and titlecase-word count for title and description, plus the
  analogous five statistics over the tag list;
* user: eight raw account stats plus five ``mean_views / x`` ratios
  (zero denominator maps to 0);
* image: five numeric attributes passed through;
* time: hour (0-23), weekday (0=Monday), season index and daypart index.

Season buckets are meteorological quarters: spring Mar-May (0), summer
Jun-Aug (1), fall Sep-Nov (2), winter Dec-Feb (3).  Daypart buckets:
breakfast 06-10 (0), lunch 11-14 (1), dinner-prep 15-17 (2), dinner
18-21 (3), desserts 22-05 (4).

The name order in FEATURE_NAMES is the schema; models, importances and
CSV files all index into it, so it must never be reordered.
"""

from __future__ import annotations

import datetime as dt
import json
import math
from dataclasses import dataclass, field

import numpy as np

_TEXT_STATS = ("word_count", "length", "avg_word_len", "uppercase_words",
               "titlecase_words")
_TAG_STATS = ("tag_count", "tags_total_len", "tags_avg_len",
              "tags_uppercase", "tags_titlecase")

USER_STAT_NAMES = ("mean_views", "photo_count", "num_groups", "contacts",
                   "groups_avg_pictures", "avg_groups_memb", "is_pro",
                   "account_age_days")
_RATIO_NAMES = ("views_by_photocount", "views_by_numgroups",
                "views_by_contacts", "views_by_groups_avg_pictures",
                "views_by_avg_groups_memb")
IMAGE_ATTR_NAMES = ("img_width", "img_height", "img_aspect",
                    "img_filesize_kb", "img_mean_brightness")
_TIME_NAMES = ("posted_hour", "posted_weekday", "posted_season",
               "posted_daypart")

FEATURE_NAMES: tuple[str, ...] = (
    tuple(f"title_{s}" for s in _TEXT_STATS)
    + tuple(f"desc_{s}" for s in _TEXT_STATS)
    + _TAG_STATS
    + USER_STAT_NAMES
    + _RATIO_NAMES
    + IMAGE_ATTR_NAMES
    + _TIME_NAMES
)

N_FEATURES = len(FEATURE_NAMES)

FEATURE_CATEGORIES: dict[str, tuple[str, ...]] = {
    "text": FEATURE_NAMES[0:15],
    "user": FEATURE_NAMES[15:28],
    "image": FEATURE_NAMES[28:33],
    "time": FEATURE_NAMES[33:37],
}

SEASON_LABELS = ("spring", "summer", "fall", "winter")
DAYPART_LABELS = ("breakfast", "lunch", "dinner_prep", "dinner", "desserts")


@dataclass(frozen=True)
class PostRecord:
    """One raw post: text, account stats, image attributes, timestamp."""

    title: str = ""
    description: str = ""
    tags: tuple[str, ...] = ()
    mean_views: float = 0.0
    photo_count: float = 0.0
    num_groups: float = 0.0
    contacts: float = 0.0
    groups_avg_pictures: float = 0.0
    avg_groups_memb: float = 0.0
    is_pro: float = 0.0
    account_age_days: float = 0.0
    img_width: float = 0.0
    img_height: float = 0.0
    img_aspect: float = 0.0
    img_filesize_kb: float = 0.0
    img_mean_brightness: float = 0.0
    posted_at: dt.datetime = field(default_factory=lambda: dt.datetime(2014, 1, 1))

    def __post_init__(self):
        if not isinstance(self.posted_at, dt.datetime):
            raise ValueError("posted_at must be a datetime")
        object.__setattr__(self, "tags", tuple(str(t) for t in self.tags))
        for name in USER_STAT_NAMES:
            v = float(getattr(self, name))
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0")
            object.__setattr__(self, name, v)
        for name in IMAGE_ATTR_NAMES:
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)


def season_index(month: int) -> int:
    if not 1 <= month <= 12:
        raise ValueError("month must be in 1..12")
    if month in (3, 4, 5):
        return 0
    if month in (6, 7, 8):
        return 1
    if month in (9, 10, 11):
        return 2
    return 3


def daypart_index(hour: int) -> int:
    if not 0 <= hour <= 23:
        raise ValueError("hour must be in 0..23")
    if 6 <= hour <= 10:
        return 0
    if 11 <= hour <= 14:
        return 1
    if 15 <= hour <= 17:
        return 2
    if 18 <= hour <= 21:
        return 3
    return 4


def _text_stats(text: str) -> tuple[float, float, float, float, float]:
    words = text.split()
    n = len(words)
    avg = sum(len(w) for w in words) / n if n else 0.0
    upper = sum(1 for w in words if w.isupper())
    title = sum(1 for w in words if w.istitle())
    return (float(n), float(len(text)), avg, float(upper), float(title))


def _tag_stats(tags: tuple[str, ...]) -> tuple[float, float, float, float, float]:
    n = len(tags)
    total = sum(len(t) for t in tags)
    avg = total / n if n else 0.0
    upper = sum(1 for t in tags if t.isupper())
    title = sum(1 for t in tags if t.istitle())
    return (float(n), float(total), avg, float(upper), float(title))


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def engineer(post: PostRecord) -> np.ndarray:
    """Compute the 37-feature vector for one post, ordered per FEATURE_NAMES."""
    ts = post.posted_at
    values = (
        _text_stats(post.title)
        + _text_stats(post.description)
        + _tag_stats(post.tags)
        + tuple(getattr(post, name) for name in USER_STAT_NAMES)
        + tuple(_ratio(post.mean_views, getattr(post, name))
                for name in ("photo_count", "num_groups", "contacts",
                             "groups_avg_pictures", "avg_groups_memb"))
        + tuple(getattr(post, name) for name in IMAGE_ATTR_NAMES)
        + (float(ts.hour), float(ts.weekday()),
           float(season_index(ts.month)), float(daypart_index(ts.hour)))
    )
    out = np.array(values, dtype=np.float64)
    if out.shape != (N_FEATURES,):  # pragma: no cover - schema safety net
        raise AssertionError("feature vector length drifted from schema")
    return out


def engineer_many(posts) -> np.ndarray:
    """Stack engineer() over an iterable of posts into an (n, 37) matrix."""
    posts = list(posts)
    if not posts:
        return np.zeros((0, N_FEATURES))
    return np.stack([engineer(p) for p in posts])


def schema() -> list[str]:
    return list(FEATURE_NAMES)


def write_schema(path) -> None:
    """Write the 37 feature names as a JSON list."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(schema(), fh, indent=2)
        fh.write("\n")
