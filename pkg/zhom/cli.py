"""``zhom validate|resolve|check|duality ...`` on top of the management commands."""

from __future__ import annotations

import os
import sys

SUBCOMMANDS = ("validate", "resolve", "check", "duality")


def main(argv: list[str] | None = None) -> None:
    argv = list(sys.argv[1:] if argv is None else argv)
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "zhom_project.settings")
    from django.core.management import execute_from_command_line

    if not argv or argv[0] not in SUBCOMMANDS:
        sys.stderr.write(f"usage: zhom {{{','.join(SUBCOMMANDS)}}} [file | --builtin NAME] [flags]\n")
        raise SystemExit(2 if argv and argv[0] not in {"-h", "--help"} else 0)
    execute_from_command_line(["zhom", f"zhom_{argv[0]}", *argv[1:]])


if __name__ == "__main__":
    main()
