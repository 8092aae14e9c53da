"""Diffusion-tree reconstruction from share logs and cascade metrics."""

import logging
import math
from collections import defaultdict
from dataclasses import asdict, dataclass, field

import numpy as np

from .exceptions import ClockSkew, EmptyCascade, InvalidInput, OrphanEvent

logger = logging.getLogger(__name__)

PUBLISHER = "PUBLISHER"
TIES = ("publisher", "strong", "weak")


@dataclass(frozen=True)
class ShareEvent:
    article_id: str
    sender_id: str
    receiver_id: str
    timestamp: float
    tie: str = "strong"

    def __post_init__(self):
        tie = str(self.tie).lower()
        if tie not in TIES:
            raise InvalidInput(f"unknown tie label {self.tie!r}")
        object.__setattr__(self, "tie", tie)
        object.__setattr__(self, "timestamp", float(self.timestamp))
        if self.receiver_id == self.sender_id:
            raise InvalidInput(f"self-share by {self.receiver_id!r}")
        if not math.isfinite(self.timestamp):
            raise InvalidInput("timestamp must be finite")

    @classmethod
    def from_record(cls, rec):
        return cls(str(rec["article_id"]), str(rec["sender_id"]), str(rec["receiver_id"]),
                   rec["timestamp"], rec.get("tie", "strong"))

    def to_record(self):
        return asdict(self)


@dataclass
class CascadeTree:
    """Rooted share tree. Node 0 is the virtual publisher root at depth 0."""

    article_id: str
    publish_time: float
    ids: list
    parent: np.ndarray
    depth: np.ndarray
    time: np.ndarray
    tie: list
    ignored_duplicates: int = 0

    @property
    def n_nodes(self):
        return len(self.ids)

    @property
    def size(self):
        return len(self.ids) - 1

    @property
    def max_depth(self):
        return int(self.depth.max())

    def breadths(self):
        """Node count per depth 1..max_depth."""
        return np.bincount(self.depth, minlength=self.max_depth + 1)[1:]

    def seeds(self):
        return [self.ids[i] for i in np.flatnonzero(self.depth == 1)]

    def sharers(self):
        return self.ids[1:]


def build_cascade(events, publish_time=None):
    """Reconstruct the diffusion tree of one article.

    Each receiver's earliest share fixes their parent; later shares by the
    same user are ignored. Events are ordered by ``(timestamp, receiver_id,
    sender_id)`` so equal-time permutations give the same tree.
    """
    events = list(events)
    if not events:
        raise EmptyCascade("no share events")
    article = events[0].article_id
    if any(e.article_id != article for e in events):
        raise InvalidInput("events span more than one article")
    if publish_time is None:
        publish_time = min(e.timestamp for e in events if e.sender_id == PUBLISHER) \
            if any(e.sender_id == PUBLISHER for e in events) else min(e.timestamp for e in events)

    first = {}
    duplicates = 0
    for e in sorted(events, key=lambda e: (e.timestamp, e.receiver_id, e.sender_id)):
        if e.receiver_id == PUBLISHER:
            raise InvalidInput("the publisher cannot receive its own article")
        if e.receiver_id in first:
            duplicates += 1
            continue
        first[e.receiver_id] = e
    if duplicates:
        logger.debug("article %s: %d repeat shares ignored", article, duplicates)

    children = defaultdict(list)
    for user, e in first.items():
        if e.sender_id != PUBLISHER and e.sender_id not in first:
            raise OrphanEvent(f"article {article}: sender {e.sender_id!r} of {user!r} never shared")
        children[e.sender_id].append(user)

    ids = [PUBLISHER]
    parent = [-1]
    depth = [0]
    time = [float(publish_time)]
    tie = ["root"]
    pos = {PUBLISHER: 0}
    head = 0
    while head < len(ids):
        node = ids[head]
        for child in sorted(children.get(node, ()), key=lambda u: (first[u].timestamp, u)):
            e = first[child]
            if e.timestamp < time[head]:
                raise ClockSkew(f"article {article}: {child!r} shared at {e.timestamp} "
                                f"before its parent at {time[head]}")
            pos[child] = len(ids)
            ids.append(child)
            parent.append(head)
            depth.append(depth[head] + 1)
            time.append(e.timestamp)
            tie.append("publisher" if node == PUBLISHER else e.tie)
        head += 1
    if len(ids) != len(first) + 1:
        unreachable = sorted(set(first) - set(pos))
        raise OrphanEvent(f"article {article}: users not connected to the publisher: {unreachable[:5]}")
    return CascadeTree(article, float(publish_time), ids, np.array(parent), np.array(depth),
                       np.array(time), tie, duplicates)


def structural_virality(tree):
    """Mean shortest-path length over ordered node pairs, root included.

    Uses the tree Wiener index: every edge separating a subtree of ``s``
    nodes lies on ``s * (n - s)`` unordered shortest paths.
    """
    parent = tree.parent if isinstance(tree, CascadeTree) else np.asarray(tree)
    n = len(parent)
    if n < 2:
        return 0.0
    if isinstance(tree, CascadeTree):
        order = np.argsort(-tree.depth, kind="stable")
    else:
        order = _bottom_up_order(parent)
    sub = np.ones(n, dtype=np.int64)
    for v in order:
        p = parent[v]
        if p >= 0:
            sub[p] += sub[v]
    s = sub[parent >= 0]
    wiener = int(np.sum(s * (n - s)))
    return 2.0 * wiener / (n * (n - 1))


def _bottom_up_order(parent):
    n = len(parent)
    depth = np.full(n, -1, dtype=np.int64)
    for v in range(n):
        path = []
        u = v
        while u >= 0 and depth[u] < 0:
            path.append(u)
            u = parent[u]
        d = -1 if u < 0 else depth[u]
        for w in reversed(path):
            d += 1
            depth[w] = d
    return np.argsort(-depth, kind="stable")


def time_per_level(tree):
    """Average hours to reach each new depth, from earliest arrival times per level."""
    if tree.max_depth < 1:
        raise InvalidInput("time per level needs depth >= 1")
    earliest = np.full(tree.max_depth + 1, np.inf)
    np.minimum.at(earliest, tree.depth, tree.time)
    earliest[0] = tree.publish_time
    steps = np.diff(earliest)
    if np.any(steps < 0):
        raise ClockSkew(f"article {tree.article_id}: level reached before the level above it")
    return float((earliest[-1] - earliest[0]) / tree.max_depth)


def weak_tie_proportion(tree):
    """Share of user-to-user edges that are weak ties; NaN when there are none."""
    strong = sum(1 for t in tree.tie if t == "strong")
    weak = sum(1 for t in tree.tie if t == "weak")
    if strong + weak == 0:
        return float("nan")
    return weak / (strong + weak)


def _pair(a, b):
    return (a, b) if a <= b else (b, a)


def normalize_pairs(pairs):
    return {_pair(str(a), str(b)) for a, b in pairs if a != b}


def seed_clusterness(seed_ids, friendship_pairs):
    """Realized friend pairs among seeds over all possible seed pairs (0 for <= 1 seed)."""
    seeds = sorted(set(seed_ids))
    n = len(seeds)
    if n <= 1:
        return 0.0
    pairs = friendship_pairs if isinstance(friendship_pairs, (set, frozenset)) \
        else normalize_pairs(friendship_pairs)
    if len(pairs) < n * (n - 1) // 2:
        seed_set = set(seeds)
        m = sum(1 for a, b in pairs if a in seed_set and b in seed_set)
    else:
        m = sum(1 for i in range(n) for j in range(i + 1, n) if (seeds[i], seeds[j]) in pairs)
    return m / (n * (n - 1) / 2)


@dataclass
class UserProfile:
    user_id: str
    age: float
    gender: str
    friend_count: int

    def __post_init__(self):
        if self.age < 0 or self.friend_count < 0:
            raise InvalidInput(f"profile {self.user_id!r}: age and friend_count must be >= 0")


@dataclass
class CascadeMetrics:
    article_id: str
    size: int
    size_with_root: int
    depth: int
    max_breadth: int
    time_per_level: float
    structural_virality: float
    weak_tie_proportion: float
    seed_clusterness: float
    avg_age: float = float("nan")
    avg_friend_count: float = float("nan")
    female_share: float = float("nan")
    missing_profiles: int = 0
    extra: dict = field(default_factory=dict)

    def as_row(self):
        row = asdict(self)
        row.update(row.pop("extra"))
        return row


def metrics(tree, profiles=None, friendship_pairs=()):
    """All cascade dimensions and sharer aggregates for one tree."""
    breadths = tree.breadths()
    profiles = profiles or {}
    ages, friends, female = [], [], []
    missing = 0
    for uid in tree.sharers():
        p = profiles.get(uid)
        if p is None:
            missing += 1
            continue
        ages.append(p.age)
        friends.append(p.friend_count)
        female.append(1.0 if str(p.gender).lower() in ("f", "female") else 0.0)
    if missing and profiles:
        logger.debug("article %s: %d sharers without a profile", tree.article_id, missing)
    return CascadeMetrics(
        article_id=tree.article_id,
        size=tree.size,
        size_with_root=tree.n_nodes,
        depth=tree.max_depth,
        max_breadth=int(breadths.max()) if breadths.size else 0,
        time_per_level=time_per_level(tree) if tree.max_depth >= 1 else float("nan"),
        structural_virality=structural_virality(tree),
        weak_tie_proportion=weak_tie_proportion(tree),
        seed_clusterness=seed_clusterness(tree.seeds(), friendship_pairs),
        avg_age=math.fsum(ages) / len(ages) if ages else float("nan"),
        avg_friend_count=math.fsum(friends) / len(friends) if friends else float("nan"),
        female_share=math.fsum(female) / len(female) if female else float("nan"),
        missing_profiles=missing,
    )


def ccdf(values):
    """``(v, fraction of samples >= v)`` at each distinct value, ascending."""
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        raise InvalidInput("ccdf of an empty sample")
    if np.any(np.isnan(x)):
        x = x[~np.isnan(x)]
        if x.size == 0:
            raise InvalidInput("ccdf of an all-missing sample")
    uniq, counts = np.unique(x, return_counts=True)
    at_or_above = np.cumsum(counts[::-1])[::-1]
    return [(float(v), float(c) / x.size) for v, c in zip(uniq, at_or_above)]


def group_events(events):
    by_article = defaultdict(list)
    for e in events:
        by_article[e.article_id].append(e)
    return dict(by_article)


QUIET_HOURS = 7 * 24.0


def is_complete(tree, observed_until, quiet_hours=QUIET_HOURS):
    """True when no share happened in the ``quiet_hours`` before ``observed_until``.

    Meant as an ingestion filter: cascades still active near the end of the
    observation window may grow further and are usually excluded.
    """
    last = float(np.max(tree.time))
    if observed_until < last:
        raise InvalidInput("observation ends before the last share")
    return observed_until - last >= quiet_hours
