"""Small helpers shared by the YAML loaders."""

from __future__ import annotations

from typing import Iterable


def check_keys(section, allowed: Iterable[str], where: str, error: type[Exception]) -> None:
    """Reject anything but a mapping with known keys, naming the offending field."""
    if not isinstance(section, dict):
        raise error("%s: expected a mapping, got %s" % (where, type(section).__name__))
    extra = sorted(str(k) for k in section if str(k) not in set(allowed))
    if extra:
        raise error("%s: unknown field(s) %s" % (where, ", ".join(extra)))
