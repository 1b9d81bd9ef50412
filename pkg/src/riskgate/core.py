"""Domain types, dataset persistence, and the point-in-time login history store.

The store keeps an append-only chronological event log together with
incremental count indices over *legitimate* logins only. Attack-labeled
events stay in the log (for audit and reporting) but never touch a count.
Views produced by :meth:`HistoryStore.state_at` are frozen snapshots that
are safe to share between threads.
"""

from __future__ import annotations

import hashlib
import json
import threading
from collections import Counter, defaultdict
from dataclasses import dataclass, field

#: Reserved categorical token for a feature that was not measured.
#: It never matches anything under exact-match scoring, but probability
#: estimation treats it as an ordinary category of its own.
MISSING = "<missing>"

LABEL_LEGITIMATE = "legitimate"
ATTACK_PREFIX = "attack:"

SCHEMA_VERSION = 1


class RiskgateError(Exception):
    """Base class for all library errors."""


class OutOfOrderTimestamp(RiskgateError):
    """Raised when an appended event predates the last stored event."""


class DuplicateEventId(RiskgateError):
    """Raised when an explicit event id repeats within one store."""


class IndexOutOfRange(RiskgateError):
    """Raised when a prefix index does not address the event log."""


class SchemaMismatch(RiskgateError):
    """Raised on malformed dataset rows; carries the 1-based line number."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class EmptyDataset(RiskgateError):
    """Raised when a dataset file contains no login rows."""


def attack_label(model_tag: str) -> str:
    """Label string for an attack event produced by the given attacker model."""
    return ATTACK_PREFIX + model_tag


@dataclass(frozen=True)
class LoginEvent:
    """One authentication attempt.

    ``features`` maps feature name to a categorical token; every event in a
    dataset carries the same set of feature names, with :data:`MISSING`
    filling unmeasured slots. ``label`` is either ``"legitimate"`` or
    ``"attack:<model>"``.
    """

    user: str
    timestamp: int
    features: dict[str, str]
    label: str = LABEL_LEGITIMATE
    event_id: str | None = None

    def __post_init__(self):
        if not self.user:
            raise ValueError("user id must be non-empty")
        if self.timestamp <= 0:
            raise ValueError("timestamp must be strictly positive")

    @property
    def is_legitimate(self) -> bool:
        return self.label == LABEL_LEGITIMATE

    @property
    def attacker_model(self) -> str | None:
        if self.label.startswith(ATTACK_PREFIX):
            return self.label[len(ATTACK_PREFIX):]
        return None

    def value(self, feature: str) -> str:
        return self.features.get(feature, MISSING)


@dataclass
class DatasetMeta:
    """Header of a dataset file."""

    feature_names: list[str]
    user_count: int
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if len(set(self.feature_names)) != len(self.feature_names):
            raise ValueError("feature names must be unique")


class HistoryView:
    """Read-only counts over a prefix of the event log.

    All lookups are O(1) against precomputed indices; instances are
    immutable snapshots and may be used concurrently.
    """

    __slots__ = (
        "_events",
        "_global_counts",
        "_user_counts",
        "_user_logins",
        "_total_logins",
        "_last_login_ts",
    )

    def __init__(self, events, global_counts, user_counts, user_logins,
                 total_logins, last_login_ts):
        self._events = events
        self._global_counts = global_counts
        self._user_counts = user_counts
        self._user_logins = user_logins
        self._total_logins = total_logins
        self._last_login_ts = last_login_ts

    # -- counts ------------------------------------------------------------

    @property
    def events(self) -> tuple[LoginEvent, ...]:
        """The event prefix backing this view (legitimate and attack)."""
        return self._events

    @property
    def total_logins(self) -> int:
        """Number of legitimate logins in the view (N)."""
        return self._total_logins

    @property
    def user_count(self) -> int:
        """Number of users with at least one legitimate login (|U|)."""
        return len(self._user_logins)

    def users(self) -> list[str]:
        return list(self._user_logins)

    def user_login_count(self, user: str) -> int:
        return self._user_logins.get(user, 0)

    def global_count(self, feature: str, value: str) -> int:
        counts = self._global_counts.get(feature)
        return counts[value] if counts else 0

    def user_value_count(self, user: str, feature: str, value: str) -> int:
        per_user = self._user_counts.get(user)
        if not per_user:
            return 0
        counts = per_user.get(feature)
        return counts[value] if counts else 0

    def distinct_value_count(self, feature: str) -> int:
        """Number of distinct observed values of the feature (V)."""
        counts = self._global_counts.get(feature)
        return len(counts) if counts else 0

    def global_values(self, feature: str) -> Counter:
        """Global value counts for one feature (copy-safe mapping view)."""
        return self._global_counts.get(feature, Counter())

    def user_values(self, user: str, feature: str) -> Counter:
        per_user = self._user_counts.get(user)
        if not per_user:
            return Counter()
        return per_user.get(feature, Counter())

    def user_has_value(self, user: str, feature: str, value: str) -> bool:
        return self.user_value_count(user, feature, value) > 0

    def last_login_ts(self, user: str) -> int | None:
        """Timestamp of the user's most recent legitimate login, if any."""
        return self._last_login_ts.get(user)


class HistoryStore:
    """Append-only login history with incremental count indices.

    Single-writer / multi-reader: appends are serialized internally; any
    number of frozen views may be read concurrently.
    """

    def __init__(self):
        self._events: list[LoginEvent] = []
        self._global_counts: dict[str, Counter] = defaultdict(Counter)
        self._user_counts: dict[str, dict[str, Counter]] = defaultdict(
            lambda: defaultdict(Counter))
        self._user_logins: dict[str, int] = defaultdict(int)
        self._last_login_ts: dict[str, int] = {}
        self._total_logins = 0
        self._event_ids: set[str] = set()
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._events)

    @property
    def events(self) -> list[LoginEvent]:
        return self._events

    @property
    def total_logins(self) -> int:
        return self._total_logins

    def append(self, event: LoginEvent) -> None:
        """Append one event; counts update only for legitimate labels."""
        with self._lock:
            if self._events and event.timestamp < self._events[-1].timestamp:
                raise OutOfOrderTimestamp(
                    f"event at {event.timestamp} predates stored "
                    f"{self._events[-1].timestamp}")
            if event.event_id is not None:
                if event.event_id in self._event_ids:
                    raise DuplicateEventId(event.event_id)
                self._event_ids.add(event.event_id)
            self._events.append(event)
            if event.is_legitimate:
                self._fold(event)

    def _fold(self, event: LoginEvent) -> None:
        per_user = self._user_counts[event.user]
        for name, value in event.features.items():
            self._global_counts[name][value] += 1
            per_user[name][value] += 1
        self._user_logins[event.user] += 1
        self._last_login_ts[event.user] = event.timestamp
        self._total_logins += 1

    def extend(self, events) -> None:
        for event in events:
            self.append(event)

    def view(self) -> HistoryView:
        """Snapshot of the full current state (shares indices, O(1)).

        The snapshot is immutable only as long as no further appends happen;
        callers that interleave appends and long-lived reads should hold
        :meth:`state_at` views instead.
        """
        return HistoryView(
            tuple(self._events), self._global_counts, self._user_counts,
            self._user_logins, self._total_logins, self._last_login_ts)

    def state_at(self, index: int) -> HistoryView:
        """Frozen view whose counts reflect exactly the first ``index`` events."""
        with self._lock:
            if index < 0 or index > len(self._events):
                raise IndexOutOfRange(
                    f"index {index} outside [0, {len(self._events)}]")
            prefix = self._events[:index]
        rebuilt = HistoryStore()
        for event in prefix:
            rebuilt.append(event)
        return HistoryView(
            tuple(prefix), rebuilt._global_counts, rebuilt._user_counts,
            rebuilt._user_logins, rebuilt._total_logins,
            rebuilt._last_login_ts)


def build_store(events) -> HistoryStore:
    store = HistoryStore()
    store.extend(events)
    return store


def hash_values(event: LoginEvent, salt: str = "") -> LoginEvent:
    """Equality-preserving one-way transform of all feature values.

    :data:`MISSING` stays verbatim so missing-value semantics survive
    hashing. Off by default everywhere; enable at ingest when raw values
    must not be retained.
    """
    hashed = {}
    for name, value in event.features.items():
        if value == MISSING:
            hashed[name] = value
        else:
            digest = hashlib.sha256(
                (salt + name + "\x00" + value).encode("utf-8")).hexdigest()
            hashed[name] = digest[:32]
    return LoginEvent(user=event.user, timestamp=event.timestamp,
                      features=hashed, label=event.label,
                      event_id=event.event_id)


# -- dataset files ----------------------------------------------------------
#
# Line-delimited records, one login per line, UTF-8. Line 1 is a header
# object carrying the dataset meta; each following line has fields `user`,
# `ts`, `label`, and `f.<name>` per feature. A row may omit a declared
# feature column, which reads back as MISSING.

def save_dataset(path, meta: DatasetMeta, events) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        header = {
            "schemaVersion": meta.schema_version,
            "featureNames": list(meta.feature_names),
            "userCount": meta.user_count,
        }
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for event in events:
            row: dict[str, object] = {"user": event.user, "ts": event.timestamp,
                                      "label": event.label}
            if event.event_id is not None:
                row["id"] = event.event_id
            for name in meta.feature_names:
                value = event.features.get(name, MISSING)
                if value != MISSING:
                    row["f." + name] = value
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def load_dataset(path) -> tuple[DatasetMeta, list[LoginEvent]]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise EmptyDataset(str(path))
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise SchemaMismatch(f"malformed header: {exc}", row=1)
    if not isinstance(header, dict) or "schemaVersion" not in header:
        raise SchemaMismatch("header object missing schemaVersion", row=1)
    if header["schemaVersion"] != SCHEMA_VERSION:
        raise SchemaMismatch(
            f"unknown schema version {header['schemaVersion']!r}", row=1)
    try:
        meta = DatasetMeta(feature_names=list(header["featureNames"]),
                           user_count=int(header["userCount"]),
                           schema_version=header["schemaVersion"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaMismatch(f"bad header: {exc}", row=1)

    declared = set(meta.feature_names)
    events: list[LoginEvent] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaMismatch(f"malformed record: {exc}", row=lineno)
        if not isinstance(row, dict):
            raise SchemaMismatch("record is not an object", row=lineno)
        try:
            user = row["user"]
            ts = row["ts"]
            label = row.get("label", LABEL_LEGITIMATE)
        except KeyError as exc:
            raise SchemaMismatch(f"missing field {exc}", row=lineno)
        if not isinstance(user, str) or not user:
            raise SchemaMismatch("user must be a non-empty string", row=lineno)
        if not isinstance(ts, int) or isinstance(ts, bool) or ts <= 0:
            raise SchemaMismatch(
                f"ts must be a positive integer, got {ts!r}", row=lineno)
        features = {name: MISSING for name in meta.feature_names}
        for key, value in row.items():
            if not key.startswith("f."):
                continue
            name = key[2:]
            if name not in declared:
                raise SchemaMismatch(
                    f"feature {name!r} not declared in header", row=lineno)
            if not isinstance(value, str):
                raise SchemaMismatch(
                    f"feature {name!r} value must be a string", row=lineno)
            features[name] = value
        events.append(LoginEvent(user=user, timestamp=ts, features=features,
                                 label=label, event_id=row.get("id")))
    if not events:
        raise EmptyDataset(str(path))
    return meta, events


def dataset_meta_for(events, feature_names: list[str] | None = None) -> DatasetMeta:
    """Build a meta header from an event sequence."""
    if feature_names is None:
        names: list[str] = []
        seen: set[str] = set()
        for event in events:
            for name in event.features:
                if name not in seen:
                    seen.add(name)
                    names.append(name)
        feature_names = names
    users = {event.user for event in events}
    return DatasetMeta(feature_names=feature_names, user_count=len(users))
