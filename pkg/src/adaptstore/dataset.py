"""Seeded store dataset: products, categories, users, order history.

Counts are fixed design constants (50 products / 5 categories / 20 users /
200 orders); contents derive deterministically from the simulation seed.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

PRODUCT_COUNT = 50
CATEGORY_COUNT = 5
USER_COUNT = 20
ORDER_COUNT = 200

CATEGORIES = ("black", "green", "oolong", "white", "herbal")

_NAME_PARTS = (
    "amber", "misty", "golden", "smoky", "silver", "wild", "first-flush",
    "mountain", "harbor", "monsoon", "garden", "imperial", "rolled", "spring",
)


@dataclass(frozen=True)
class Product:
    id: str
    category: str
    name: str
    price_cents: int


@dataclass(frozen=True)
class User:
    id: str
    username: str
    password: str


@dataclass(frozen=True)
class Order:
    id: str
    user_id: str
    product_ids: tuple[str, ...]
    timestamp: int


@dataclass
class Dataset:
    products: list[Product] = field(default_factory=list)
    users: list[User] = field(default_factory=list)
    orders: list[Order] = field(default_factory=list)

    @property
    def categories(self) -> list[str]:
        return list(CATEGORIES)

    def product_by_id(self) -> dict[str, Product]:
        return {p.id: p for p in self.products}

    def counts(self) -> dict[str, int]:
        return {
            "products": len(self.products),
            "users": len(self.users),
            "orders": len(self.orders),
        }


def generate_dataset(seed: int) -> Dataset:
    rng = random.Random(seed * 7919 + 17)
    products = []
    for i in range(PRODUCT_COUNT):
        category = CATEGORIES[i % CATEGORY_COUNT]
        name = f"{rng.choice(_NAME_PARTS)} {category} no.{i:02d}"
        products.append(
            Product(
                id=f"p{i:02d}",
                category=category,
                name=name,
                price_cents=rng.randint(199, 4999),
            )
        )
    users = [
        User(id=f"u{i:02d}", username=f"user{i:02d}", password=f"brew-{rng.randint(1000, 9999)}-{i:02d}")
        for i in range(USER_COUNT)
    ]
    orders = []
    for i in range(ORDER_COUNT):
        user = rng.choice(users)
        size = rng.randint(1, 4)
        picked = tuple(p.id for p in rng.sample(products, size))
        orders.append(Order(id=f"o{i:03d}", user_id=user.id, product_ids=picked, timestamp=i))
    return Dataset(products=products, users=users, orders=orders)


def order_to_json(order: Order) -> dict:
    return {
        "id": order.id,
        "user_id": order.user_id,
        "product_ids": list(order.product_ids),
        "timestamp": order.timestamp,
    }


def order_from_json(data: dict) -> Order:
    return Order(
        id=data["id"],
        user_id=data["user_id"],
        product_ids=tuple(data["product_ids"]),
        timestamp=data["timestamp"],
    )


def product_to_json(product: Product) -> dict:
    return {
        "id": product.id,
        "category": product.category,
        "name": product.name,
        "price_cents": product.price_cents,
    }
