"""Recommendation algorithms and their training-data lifecycle.

Two Slope One variants (plain and weighted) over implicit ratings derived
from order history (rating = purchase count), a popularity fallback, and
the mode dispatcher the recommender service uses. Training rebuilds the
deviation model from scratch; there are no incremental updates.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

PLAIN = "plain"
WEIGHTED = "weighted"

LOW_POWER = "low_power"
FULL = "full"

DEFAULT_K = 3
RETRAIN_BATCH = 10


class NoData(Exception):
    """The user shares no co-rated pair with the target item."""


def build_rating_matrix(orders: Iterable) -> dict[str, dict[str, float]]:
    """Implicit ratings: purchase count of each item per user."""
    ratings: dict[str, dict[str, float]] = {}
    for order in orders:
        user = order["user_id"] if isinstance(order, dict) else order.user_id
        items = order["product_ids"] if isinstance(order, dict) else order.product_ids
        row = ratings.setdefault(user, {})
        for item in items:
            row[item] = row.get(item, 0.0) + 1.0
    return ratings


@dataclass
class DeviationModel:
    """Average pairwise rating deviations with co-rating counts.

    Both orientations of every co-rated pair are stored; dev(j,i) is the
    exact negation of dev(i,j) and the counts are symmetric.
    """

    dev: dict[tuple[str, str], float] = field(default_factory=dict)
    count: dict[tuple[str, str], int] = field(default_factory=dict)

    def items(self) -> set[str]:
        return {j for j, _ in self.dev}

    def copy(self) -> "DeviationModel":
        return DeviationModel(dev=dict(self.dev), count=dict(self.count))

    def to_json(self) -> dict:
        return {
            "pairs": [
                {"j": j, "i": i, "dev": self.dev[(j, i)], "count": self.count[(j, i)]}
                for (j, i) in sorted(self.dev)
            ]
        }

    @classmethod
    def from_json(cls, data: dict) -> "DeviationModel":
        model = cls()
        for pair in data.get("pairs", []):
            key = (pair["j"], pair["i"])
            model.dev[key] = pair["dev"]
            model.count[key] = pair["count"]
        return model


def train_slope_one(history: Iterable) -> DeviationModel:
    """Build the deviation model from order history (may be empty)."""
    ratings = build_rating_matrix(history)
    return train_from_ratings(ratings)


def train_from_ratings(ratings: Mapping[str, Mapping[str, float]]) -> DeviationModel:
    diff_sum: dict[tuple[str, str], float] = {}
    count: dict[tuple[str, str], int] = {}
    for row in ratings.values():
        items = sorted(row)
        for a_pos, j in enumerate(items):
            for i in items[a_pos + 1 :]:
                key = (j, i)
                diff_sum[key] = diff_sum.get(key, 0.0) + (row[j] - row[i])
                count[key] = count.get(key, 0) + 1
    model = DeviationModel()
    for (j, i), total in diff_sum.items():
        c = count[(j, i)]
        model.dev[(j, i)] = total / c
        model.dev[(i, j)] = -total / c
        model.count[(j, i)] = c
        model.count[(i, j)] = c
    return model


def predict_slope_one(
    model: DeviationModel,
    user_ratings: Mapping[str, float],
    target: str,
    variant: str = WEIGHTED,
) -> float:
    """Predict the target rating from the user's rated items.

    Raises NoData when no rated item shares a stored pair with the target.
    """
    if variant not in (PLAIN, WEIGHTED):
        raise ValueError(f"unknown variant {variant!r}")
    terms = []
    for item, rating in user_ratings.items():
        if item == target:
            continue
        key = (target, item)
        if key not in model.dev:
            continue
        terms.append((rating + model.dev[key], model.count[key]))
    if not terms:
        raise NoData(f"no co-rated pair links {target!r} to the user's items")
    if variant == PLAIN:
        return sum(value for value, _ in terms) / len(terms)
    weight_total = sum(c for _, c in terms)
    return sum(value * c for value, c in terms) / weight_total


def popularity_topk(
    history: Iterable, k: int, exclusions: Iterable[str] = ()
) -> list[tuple[str, float]]:
    """Items ranked by total purchase count desc, id asc; exclusions removed
    before truncation."""
    if k < 1:
        raise ValueError("k must be >= 1")
    excluded = set(exclusions)
    counts: Counter[str] = Counter()
    for order in history:
        items = order["product_ids"] if isinstance(order, dict) else order.product_ids
        counts.update(items)
    ranked = sorted(
        ((item, float(n)) for item, n in counts.items() if item not in excluded),
        key=lambda pair: (-pair[1], pair[0]),
    )
    return ranked[:k]


def recommend(
    mode: str,
    user_id: str | None,
    cart: Sequence[str],
    viewed: str | None,
    history: Sequence,
    model: DeviationModel | None = None,
    k: int = DEFAULT_K,
) -> list[tuple[str, float]]:
    """Mode dispatch: popularity in low-power, weighted Slope One in full.

    Exclusions are the cart plus the viewed item in both modes. Full mode
    falls back to popularity whenever the session user has no usable
    ratings.
    """
    if mode not in (LOW_POWER, FULL):
        raise ValueError(f"recommender not dispatchable in mode {mode!r}")
    exclusions = set(cart)
    if viewed is not None:
        exclusions.add(viewed)
    if mode == LOW_POWER:
        return popularity_topk(history, k, exclusions)

    if model is None:
        model = train_slope_one(history)
    ratings = build_rating_matrix(history)
    user_ratings = ratings.get(user_id or "", {})
    scored: list[tuple[str, float]] = []
    if user_ratings:
        candidates = sorted(model.items() - exclusions - set(user_ratings))
        for item in candidates:
            try:
                scored.append((item, predict_slope_one(model, user_ratings, item, WEIGHTED)))
            except NoData:
                continue
    if not scored:
        return popularity_topk(history, k, exclusions)
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[:k]
