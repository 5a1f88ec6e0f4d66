"""Cookie-jar analysis: party split, ID-like values, stage diffs, security profile."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple
from urllib.parse import urlsplit

from .model import CookieRecord, SameSite
from .psl import SuffixRules, registrable_domain

DAY = 86_400
YEAR_SECONDS = 365 * DAY

ID_MIN_LENGTH = 16
ID_MIN_ENTROPY = 3.0
ID_MIN_LIFETIME = 30 * DAY
CONSTANT_VALUES = frozenset({"true", "false", "yes", "no", "1", "0", "en", "accepted"})


@dataclass(frozen=True)
class PartyPartition:
    first_party: Tuple[CookieRecord, ...]
    third_party: Tuple[CookieRecord, ...]
    site_registrable_domain: str


def site_domain(site_url: str, rules: Optional[SuffixRules] = None) -> str:
    host = urlsplit(site_url).hostname
    if not host:
        raise ValueError(f"site url {site_url!r} has no host")
    return registrable_domain(host, rules)


def partition_party(jar: Iterable[CookieRecord], site_url: str, rules: Optional[SuffixRules] = None) -> PartyPartition:
    site = site_domain(site_url, rules)
    first, third = [], []
    for c in jar:
        (first if registrable_domain(c.host, rules) == site else third).append(c)
    return PartyPartition(tuple(first), tuple(third), site)


def shannon_entropy(value: str) -> float:
    if not value:
        return 0.0
    n = len(value)
    return -sum((k / n) * math.log2(k / n) for k in Counter(value).values())


def is_id_like(cookie: CookieRecord, now: int) -> bool:
    if cookie.expiry is None or cookie.expiry - now < ID_MIN_LIFETIME:
        return False
    value = cookie.value
    if value.lower() in CONSTANT_VALUES or len(value) < ID_MIN_LENGTH:
        return False
    return shannon_entropy(value) >= ID_MIN_ENTROPY


# -- trackers -------------------------------------------------------------------


@dataclass(frozen=True)
class TrackerList:
    entries: Mapping[str, str] = field(default_factory=dict)

    @classmethod
    def from_disconnect(cls, doc: Mapping, rules: Optional[SuffixRules] = None) -> "TrackerList":
        """Flatten Disconnect's categories -> org -> {site: [domains]} layout."""
        entries: Dict[str, str] = {}
        for category, orgs in doc.get("categories", {}).items():
            if category.lower() == "unclassified":
                continue
            for org in orgs:
                for _org_name, sites in org.items():
                    for key, domains in sites.items():
                        if not isinstance(domains, list):
                            continue  # flags such as "performance": "true"
                        for d in domains:
                            dom = registrable_domain(d, rules)
                            entries.setdefault(dom, category)
        return cls(entries)

    @classmethod
    def load(cls, path: Path, rules: Optional[SuffixRules] = None) -> "TrackerList":
        return cls.from_disconnect(json.loads(Path(path).read_text(encoding="utf-8")), rules)

    def category(self, domain: str) -> Optional[str]:
        return self.entries.get(domain)


@lru_cache(maxsize=1)
def default_trackers() -> TrackerList:
    text = resources.files("consentlens.data").joinpath("disconnect_services.json").read_text(encoding="utf-8")
    return TrackerList.from_disconnect(json.loads(text))


def match_trackers(partition: PartyPartition, trackers: TrackerList, rules: Optional[SuffixRules] = None) -> List[Tuple[CookieRecord, str]]:
    out = []
    for c in partition.third_party:
        cat = trackers.category(registrable_domain(c.host, rules))
        if cat is not None:
            out.append((c, cat))
    return out


# -- stage diff -------------------------------------------------------------------


class DuplicateCookieError(ValueError):
    pass


@dataclass(frozen=True)
class StageDiff:
    added: Tuple[CookieRecord, ...]
    removed: Tuple[CookieRecord, ...]
    changed: Tuple[Tuple[CookieRecord, CookieRecord], ...]

    @property
    def empty(self) -> bool:
        return not (self.added or self.removed or self.changed)


def _index(jar: Iterable[CookieRecord], label: str) -> Dict[Tuple[str, str, str], CookieRecord]:
    out: Dict[Tuple[str, str, str], CookieRecord] = {}
    for c in jar:
        if c.key in out:
            raise DuplicateCookieError(f"duplicate cookie key {c.key} in {label} jar")
        out[c.key] = c
    return out


def _comparable(c: CookieRecord) -> tuple:
    return (c.value, c.expiry, c.secure, c.http_only, c.same_site)


def stage_diff(before: Iterable[CookieRecord], after: Iterable[CookieRecord]) -> StageDiff:
    b = _index(before, "before")
    a = _index(after, "after")
    added = tuple(a[k] for k in a if k not in b)
    removed = tuple(b[k] for k in b if k not in a)
    changed = tuple((b[k], a[k]) for k in a if k in b and _comparable(b[k]) != _comparable(a[k]))
    return StageDiff(added, removed, changed)


# -- security profile ---------------------------------------------------------------


@dataclass(frozen=True)
class SecurityProfile:
    total: int
    secure_true_pct: float
    secure_false_pct: float
    http_only_true_pct: float
    http_only_false_pct: float
    same_site_pct: Mapping[SameSite, float]
    expiry_gt_12mo_pct: float


def security_profile(jar: Sequence[CookieRecord], now: int) -> SecurityProfile:
    n = len(jar)
    if n == 0:
        raise ValueError("security_profile needs a non-empty jar")

    def pct(k: int) -> float:
        return 100.0 * k / n

    secure = sum(c.secure for c in jar)
    http_only = sum(c.http_only for c in jar)
    same_site = Counter(c.same_site for c in jar)
    long_lived = sum(1 for c in jar if c.expiry is not None and c.expiry - now > YEAR_SECONDS)
    return SecurityProfile(
        total=n,
        secure_true_pct=pct(secure),
        secure_false_pct=pct(n - secure),
        http_only_true_pct=pct(http_only),
        http_only_false_pct=pct(n - http_only),
        same_site_pct={s: pct(same_site.get(s, 0)) for s in (SameSite.UNSET, SameSite.LAX, SameSite.NONE, SameSite.STRICT)},
        expiry_gt_12mo_pct=pct(long_lived),
    )
