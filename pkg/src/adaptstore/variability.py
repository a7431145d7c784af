"""Configuration model of the adaptable store.

Four dimensions (image source, persistence source, auth mode, recommender
mode), two cross-dimension constraints, and the reasoning operations the
rest of the system relies on: validation, enumeration of the valid space,
diffing, and completion of partial reconfiguration requests.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import product
from typing import Mapping


class ImageSource(Enum):
    LOCAL_STATIC = "local_static"
    EXTERNAL_LITE = "external_lite"
    EXTERNAL_FULL = "external_full"


class PersistenceSource(Enum):
    LOCAL_STATIC = "local_static"
    EXTERNAL = "external"


class AuthMode(Enum):
    ABSENT = "absent"
    STANDARD = "standard"
    RESTRICTIVE = "restrictive"


class RecommenderMode(Enum):
    DISABLED = "disabled"
    LOW_POWER = "low_power"
    FULL = "full"


DIMENSIONS = ("image", "persistence", "auth", "recommender")

_DIMENSION_TYPES = {
    "image": ImageSource,
    "persistence": PersistenceSource,
    "auth": AuthMode,
    "recommender": RecommenderMode,
}

# Functionality ranks used for tie-breaking in complete_request. Only the
# relative order matters; restrictive sits between absent and standard so
# an unrequested auth dimension never escalates to restrictive on its own.
_RECOMMENDER_RANK = {
    RecommenderMode.DISABLED: 0,
    RecommenderMode.LOW_POWER: 1,
    RecommenderMode.FULL: 2,
}
_AUTH_RANK = {AuthMode.ABSENT: 0, AuthMode.RESTRICTIVE: 1, AuthMode.STANDARD: 2}


class UnknownLevelError(ValueError):
    """Raised for a configuration level name outside the canonical three."""


class UnsatisfiableRequestError(ValueError):
    """No valid configuration honors the requested assignments."""

    def __init__(self, request: Mapping[str, object], violations: list["Violation"]):
        self.request = dict(request)
        self.violations = violations
        detail = "; ".join(v.message for v in violations) or "no candidate"
        super().__init__(f"unsatisfiable request {self.request}: {detail}")


@dataclass(frozen=True)
class Violation:
    constraint: str
    message: str


@dataclass(frozen=True)
class ValidationResult:
    valid: bool
    violations: tuple[Violation, ...]

    def constraint_ids(self) -> set[str]:
        return {v.constraint for v in self.violations}


@dataclass(frozen=True)
class Configuration:
    image: ImageSource
    persistence: PersistenceSource
    auth: AuthMode
    recommender: RecommenderMode

    def __lt__(self, other: "Configuration") -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        mine = tuple(_variant_index(d, self.get(d)) for d in DIMENSIONS)
        theirs = tuple(_variant_index(d, other.get(d)) for d in DIMENSIONS)
        return mine < theirs

    def get(self, dimension: str):
        if dimension not in _DIMENSION_TYPES:
            raise KeyError(f"unknown dimension {dimension!r}")
        return getattr(self, dimension)

    def replace(self, **assignments) -> "Configuration":
        fields = {d: self.get(d) for d in DIMENSIONS}
        for dim, value in assignments.items():
            if dim not in _DIMENSION_TYPES:
                raise KeyError(f"unknown dimension {dim!r}")
            fields[dim] = value
        return Configuration(**fields)

    def to_json(self) -> dict:
        return {d: self.get(d).value for d in DIMENSIONS}

    @classmethod
    def from_json(cls, data: Mapping[str, str]) -> "Configuration":
        missing = [d for d in DIMENSIONS if d not in data]
        if missing:
            raise ValueError(f"missing dimensions: {missing}")
        extra = [k for k in data if k not in _DIMENSION_TYPES]
        if extra:
            raise ValueError(f"unknown dimensions: {extra}")
        return cls(**{d: parse_dimension_value(d, data[d]) for d in DIMENSIONS})


def parse_dimension_value(dimension: str, raw: str):
    """Parse one dimension's wire value ("low_power" etc) into its enum."""
    enum_type = _DIMENSION_TYPES.get(dimension)
    if enum_type is None:
        raise ValueError(f"unknown dimension {dimension!r}")
    try:
        return enum_type(raw)
    except ValueError:
        allowed = [m.value for m in enum_type]
        raise ValueError(
            f"invalid value {raw!r} for {dimension}; expected one of {allowed}"
        ) from None


def validate(config: Configuration) -> ValidationResult:
    """Check both cross-dimension constraints, reporting every violation."""
    violations = []
    if config.auth in (AuthMode.STANDARD, AuthMode.RESTRICTIVE):
        if config.persistence is not PersistenceSource.EXTERNAL:
            violations.append(
                Violation(
                    "C1",
                    "auth service needs user data: auth standard/restrictive "
                    "requires persistence=external",
                )
            )
    if config.recommender is RecommenderMode.FULL:
        if config.auth is AuthMode.ABSENT:
            violations.append(
                Violation(
                    "C2",
                    "recommender full mode needs per-user data: requires auth "
                    "to be present",
                )
            )
    return ValidationResult(valid=not violations, violations=tuple(violations))


def all_configurations() -> list[Configuration]:
    """Every point of the 3*2*3*3 space, in fixed declaration order."""
    return [
        Configuration(i, p, a, r)
        for i, p, a, r in product(
            ImageSource, PersistenceSource, AuthMode, RecommenderMode
        )
    ]


def enumerate_valid() -> set[Configuration]:
    return {c for c in all_configurations() if validate(c).valid}


_LEVELS = {
    "L0_barebone": Configuration(
        ImageSource.LOCAL_STATIC,
        PersistenceSource.LOCAL_STATIC,
        AuthMode.ABSENT,
        RecommenderMode.DISABLED,
    ),
    "L1_barebone_rec": Configuration(
        ImageSource.LOCAL_STATIC,
        PersistenceSource.LOCAL_STATIC,
        AuthMode.ABSENT,
        RecommenderMode.LOW_POWER,
    ),
    "L2_full": Configuration(
        ImageSource.EXTERNAL_FULL,
        PersistenceSource.EXTERNAL,
        AuthMode.STANDARD,
        RecommenderMode.FULL,
    ),
}
_LEVEL_ALIASES = {"L0": "L0_barebone", "L1": "L1_barebone_rec", "L2": "L2_full"}


def canonical_level(name: str) -> Configuration:
    """Return one of the three canonical configuration levels."""
    key = _LEVEL_ALIASES.get(name, name)
    if key not in _LEVELS:
        raise UnknownLevelError(
            f"unknown level {name!r}; expected one of {sorted(_LEVELS)}"
        )
    return _LEVELS[key]


@dataclass(frozen=True)
class DeltaEntry:
    dimension: str
    from_value: object
    to_value: object


@dataclass(frozen=True)
class ConfigDelta:
    entries: tuple[DeltaEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def is_empty(self) -> bool:
        return not self.entries

    def apply(self, base: Configuration) -> Configuration:
        return base.replace(**{e.dimension: e.to_value for e in self.entries})

    def to_json(self) -> list[dict]:
        return [
            {
                "dimension": e.dimension,
                "from": e.from_value.value,
                "to": e.to_value.value,
            }
            for e in self.entries
        ]


def diff(from_config: Configuration, to_config: Configuration) -> ConfigDelta:
    """Per-dimension delta, in fixed dimension order."""
    entries = tuple(
        DeltaEntry(d, from_config.get(d), to_config.get(d))
        for d in DIMENSIONS
        if from_config.get(d) is not to_config.get(d)
    )
    return ConfigDelta(entries)


def _variant_index(dimension: str, value) -> int:
    return list(_DIMENSION_TYPES[dimension]).index(value)


def complete_request(
    request: Mapping[str, object], current: Configuration
) -> Configuration:
    """Complete a partial reconfiguration request into a full valid target.

    The returned configuration honors every requested assignment exactly,
    changes as few dimensions of `current` as possible, and breaks ties by
    keeping functionality high (recommender rank, then auth rank), then by
    dimension-then-variant declaration order. Deterministic by construction:
    the candidate scan order is fixed.
    """
    normalized: dict[str, object] = {}
    for dim, value in request.items():
        if dim not in _DIMENSION_TYPES:
            raise ValueError(f"unknown dimension {dim!r}")
        if isinstance(value, str):
            value = parse_dimension_value(dim, value)
        if not isinstance(value, _DIMENSION_TYPES[dim]):
            raise ValueError(f"bad value {value!r} for dimension {dim}")
        normalized[dim] = value

    candidates = [
        c
        for c in all_configurations()
        if validate(c).valid
        and all(c.get(d) is v for d, v in normalized.items())
    ]
    if not candidates:
        requested = current.replace(**normalized)
        raise UnsatisfiableRequestError(
            normalized, list(validate(requested).violations)
        )

    def key(c: Configuration):
        changes = sum(1 for d in DIMENSIONS if c.get(d) is not current.get(d))
        lex = tuple(_variant_index(d, c.get(d)) for d in DIMENSIONS)
        return (
            changes,
            -_RECOMMENDER_RANK[c.recommender],
            -_AUTH_RANK[c.auth],
            lex,
        )

    return min(candidates, key=key)


def active_services(config: Configuration) -> set[str]:
    """Service endpoints a valid configuration keeps in the request path.

    The webui is always present. External image/persistence sources imply
    their local cache front plus the provider endpoint; local sources imply
    the static stand-in only.
    """
    active = {"webui"}
    if config.image is ImageSource.LOCAL_STATIC:
        active.add("local_static_img")
    else:
        active.update({"local_cache_img", "image_ext"})
    if config.persistence is PersistenceSource.LOCAL_STATIC:
        active.add("local_static_db")
    else:
        active.update({"local_cache_db", "persistence_ext"})
    if config.auth is not AuthMode.ABSENT:
        active.add("auth")
    if config.recommender is not RecommenderMode.DISABLED:
        active.add("recommender")
    return active
