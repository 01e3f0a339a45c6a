from __future__ import annotations

from django.core.management.base import BaseCommand, CommandError

from zhom.management.commands._algebra_options import (
    EXIT_VIOLATIONS,
    add_algebra_arguments,
    library_errors,
    load_from_options,
)
from zhom.services.algebra import validate
from zhom.services.reports import dumps, validation_text


class Command(BaseCommand):
    help = "Check the connected Z-algebra axioms (grading, units, associativity)."

    def add_arguments(self, parser):
        add_algebra_arguments(parser)

    def handle(self, *args, **options):
        _, algebra = load_from_options(options)
        with library_errors():
            report = validate(algebra)

        if options["json"]:
            self.stdout.write(dumps(report.to_json()))
        else:
            self.stdout.write(validation_text(report))

        if not report.ok:
            raise CommandError(
                f"{len(report.violations)} axiom violation(s) in {report.algebra}",
                returncode=EXIT_VIOLATIONS,
            )
        if not options["json"]:
            self.stdout.write(self.style.SUCCESS("Algebra is valid."))
