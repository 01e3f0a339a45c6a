from __future__ import annotations

from django.core.management.base import BaseCommand

from zhom.management.commands._algebra_options import (
    add_algebra_arguments,
    library_errors,
    load_from_options,
)
from zhom.services.algebra_file import parse_module_spec
from zhom.services.conf import setting
from zhom.services.reports import dumps, resolution_json, resolution_text
from zhom.services.resolutions import minimal_free_resolution


class Command(BaseCommand):
    help = "Compute a minimal free resolution and print its Betti table."

    def add_arguments(self, parser):
        add_algebra_arguments(parser)
        parser.add_argument(
            "--module",
            default="e_0A0",
            help="Module spec: e_iA, e_iA0, Ae_j (left), A/A>=n@i, or a module JSON file.",
        )
        parser.add_argument(
            "--max-length",
            type=int,
            dest="max_length",
            help="Stop after this many steps (default ZHOM_MAX_LENGTH).",
        )

    def handle(self, *args, **options):
        _, algebra = load_from_options(options)
        max_length = options["max_length"] or int(setting("ZHOM_MAX_LENGTH"))
        with library_errors():
            module = parse_module_spec(algebra, options["module"])
            resolution = minimal_free_resolution(module, max_length)

        if options["json"]:
            self.stdout.write(dumps(resolution_json(resolution)))
            return
        self.stdout.write(resolution_text(resolution))
        if not resolution.status.terminated:
            self.stdout.write(self.style.WARNING(f"Window-limited: {resolution.status}"))
