"""
Django settings for the zhom project.

The project hosts a single app (``zhom``) whose services do exact homological
algebra over connected Z-algebras; the Django layer provides configuration,
the management-command CLI and the verdict archive.
"""

import os
import sys
from pathlib import Path

import dj_database_url
from dotenv import load_dotenv

BASE_DIR = Path(__file__).resolve().parent.parent
load_dotenv(BASE_DIR / ".env")


SECRET_KEY = os.environ.get("DJANGO_SECRET_KEY") or "changeme-in-local-dev-only"

DEBUG = os.environ.get("DJANGO_DEBUG", "0").lower() in {"1", "true", "yes", "on"}

ALLOWED_HOSTS: list[str] = []


def _env_bool(name: str, default: bool = False) -> bool:
    return os.environ.get(name, "1" if default else "0").lower() in {"1", "true", "yes", "on"}


LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {"format": "%(levelname)s %(name)s: %(message)s"},
    },
    "handlers": {
        "console": {"class": "logging.StreamHandler", "formatter": "plain"},
    },
    "loggers": {
        "zhom": {
            "handlers": ["console"],
            "level": os.environ.get("ZHOM_LOG_LEVEL", "WARNING"),
            "propagate": False,
        },
        "django.db.backends": {
            "handlers": ["console"],
            "level": os.environ.get("DJANGO_DB_LOG_LEVEL", "WARNING"),
        },
    },
}


INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "zhom.apps.ZhomConfig",
]

MIDDLEWARE: list[str] = []


# Database
RUNNING_TESTS = (
    os.environ.get("PYTEST_CURRENT_TEST") is not None
    or "pytest" in sys.modules
    or "pytest" in (sys.argv[0] if sys.argv else "")
    or "test" in sys.argv
)

if RUNNING_TESTS:
    test_database_url = os.environ.get("DJANGO_TEST_DATABASE_URL", "").strip()
    if test_database_url:
        DATABASES = {
            "default": dj_database_url.parse(
                test_database_url,
                conn_max_age=0,
            )
        }
    else:
        DATABASES = {
            "default": {
                "ENGINE": "django.db.backends.sqlite3",
                "NAME": ":memory:",
            }
        }
else:
    DATABASES = {
        "default": dj_database_url.config(
            default=f"sqlite:///{BASE_DIR / 'zhom.sqlite3'}",
            conn_max_age=60,
        )
    }


LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# ── Homological engine ─────────────────────────────────────────────────────
# Field used when an algebra is built from the command line without a file:
# "Q" or "GF<p>" (p an odd prime, e.g. "GF7").
ZHOM_DEFAULT_FIELD = os.environ.get("ZHOM_DEFAULT_FIELD", "Q")

# Degree window [lo, hi] and guard used for --builtin algebras.
ZHOM_DEFAULT_WINDOW = (
    int(os.environ.get("ZHOM_WINDOW_LO", "-2")),
    int(os.environ.get("ZHOM_WINDOW_HI", "14")),
)
ZHOM_GUARD = int(os.environ.get("ZHOM_GUARD", "2"))

# Longest resolution built before reporting a window-limited pd.
ZHOM_MAX_LENGTH = int(os.environ.get("ZHOM_MAX_LENGTH", "8"))

# Consecutive isomorphic colimit steps required before a local cohomology
# cell counts as stabilized.
ZHOM_STABILITY_RUNS = int(os.environ.get("ZHOM_STABILITY_RUNS", "2"))

# Largest dimension the regularity checkers look for.
ZHOM_DMAX = int(os.environ.get("ZHOM_DMAX", "3"))

# Worker cap for per-index checks.
ZHOM_THREADS = max(1, int(os.environ.get("ZHOM_THREADS", "1")))

# Re-verify induced module actions and resolution audits by assertion.
ZHOM_STRICT_CHECKS = _env_bool("ZHOM_STRICT_CHECKS", False)

# Random draws tried by module_iso_test before the certified fallback, and the
# largest Hom space (in elements) searched exhaustively over GF(p).
ZHOM_ISO_SAMPLES = int(os.environ.get("ZHOM_ISO_SAMPLES", "12"))
ZHOM_ISO_EXHAUSTIVE_LIMIT = int(os.environ.get("ZHOM_ISO_EXHAUSTIVE_LIMIT", "4096"))
