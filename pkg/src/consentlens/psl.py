"""Public-suffix rule set and registrable-domain (eTLD+1) lookup."""

from __future__ import annotations

import ipaddress
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import FrozenSet, Iterable, Optional


@dataclass(frozen=True)
class SuffixRules:
    exact: FrozenSet[str]
    wildcard: FrozenSet[str]  # parent of "*.x" rules, stored as "x"
    exception: FrozenSet[str]  # "!x" rules, stored as "x"

    @classmethod
    def parse(cls, lines: Iterable[str]) -> "SuffixRules":
        exact, wildcard, exception = set(), set(), set()
        for raw in lines:
            line = raw.strip()
            if not line or line.startswith("//"):
                continue
            rule = line.split()[0].lower()
            try:
                rule = rule.encode("idna").decode("ascii") if not rule.isascii() else rule
            except UnicodeError:
                pass
            if rule.startswith("!"):
                exception.add(rule[1:])
            elif rule.startswith("*."):
                wildcard.add(rule[2:])
            else:
                exact.add(rule)
        return cls(frozenset(exact), frozenset(wildcard), frozenset(exception))

    @classmethod
    def load(cls, path: Path) -> "SuffixRules":
        with open(path, encoding="utf-8") as fh:
            return cls.parse(fh)

    def public_suffix(self, host: str) -> str:
        labels = host.split(".")
        # Walk from the longest candidate; the first hit is the longest matching rule.
        for i in range(len(labels)):
            candidate = ".".join(labels[i:])
            if candidate in self.exception:
                return ".".join(labels[i + 1 :])
            if candidate in self.exact:
                return candidate
            parent = ".".join(labels[i + 1 :])
            if i + 1 <= len(labels) - 1 and parent in self.wildcard:
                return candidate
        return labels[-1]  # implicit "*" rule


@lru_cache(maxsize=1)
def default_rules() -> SuffixRules:
    text = resources.files("consentlens.data").joinpath("public_suffix_list.dat").read_text(encoding="utf-8")
    return SuffixRules.parse(text.splitlines())


def _is_ip(host: str) -> bool:
    try:
        ipaddress.ip_address(host.strip("[]"))
        return True
    except ValueError:
        return False


def clean_host(host: str) -> str:
    return host.strip().lower().lstrip(".").rstrip(".")


def registrable_domain(host: str, rules: Optional[SuffixRules] = None) -> str:
    """eTLD+1 of ``host``. IP literals and bare public suffixes come back unchanged."""
    h = clean_host(host)
    if not h:
        raise ValueError("empty host")
    if _is_ip(h):
        return h
    if not h.isascii():
        h = h.encode("idna").decode("ascii")
    rules = rules or default_rules()
    suffix = rules.public_suffix(h)
    if suffix == h:
        return h
    labels = h.split(".")
    n = len(suffix.split(".")) + 1
    return ".".join(labels[-n:])
