from __future__ import annotations

from django.core.management.base import BaseCommand, CommandError

from zhom.management.commands._algebra_options import (
    EXIT_VIOLATIONS,
    add_algebra_arguments,
    algebra_file_from_options,
    library_errors,
)
from zhom.services import archive
from zhom.services.algebra_file import parse_module_spec
from zhom.services.regularity import check_as_regular, verify_local_duality
from zhom.services.reports import dumps, duality_text


class Command(BaseCommand):
    help = "Verify local duality D R^q tau(M) = Ext^(d-q)(M, omega) on a module of a regular algebra."

    def add_arguments(self, parser):
        add_algebra_arguments(parser)
        parser.add_argument(
            "--module",
            default="e_0A",
            help="Right module spec: e_iA, e_iA0, A/A>=n@i, or a module JSON file.",
        )
        parser.add_argument(
            "--record",
            action="store_true",
            help="Store the duality report in the archive.",
        )

    def handle(self, *args, **options):
        spec = algebra_file_from_options(options)
        with library_errors():
            algebra = spec.build()
            module = parse_module_spec(algebra, options["module"])
            report = verify_local_duality(algebra, module, check_as_regular(algebra))

        if options["record"]:
            archive.record_duality(spec, report)

        if options["json"]:
            self.stdout.write(dumps(report.to_json()))
        else:
            self.stdout.write(duality_text(report))

        if not report.matched:
            raise CommandError(f"Local duality mismatch for {report.module}", returncode=EXIT_VIOLATIONS)
