from __future__ import annotations

from typing import Any

from django.conf import settings

DEFAULTS: dict[str, Any] = {
    "ZHOM_DEFAULT_FIELD": "Q",
    "ZHOM_DEFAULT_WINDOW": (-2, 14),
    "ZHOM_GUARD": 2,
    "ZHOM_MAX_LENGTH": 8,
    "ZHOM_STABILITY_RUNS": 2,
    "ZHOM_DMAX": 3,
    "ZHOM_THREADS": 1,
    "ZHOM_STRICT_CHECKS": False,
    "ZHOM_ISO_SAMPLES": 12,
    "ZHOM_ISO_EXHAUSTIVE_LIMIT": 4096,
}


def setting(name: str) -> Any:
    """Read an engine setting, falling back to the built-in default.

    The services are usable without a configured Django project (plain
    library use); in that case the defaults above apply.
    """
    if settings.configured:
        return getattr(settings, name, DEFAULTS[name])
    return DEFAULTS[name]
