from __future__ import annotations

from django.core.management.base import BaseCommand

from zhom.management.commands._algebra_options import (
    add_algebra_arguments,
    algebra_file_from_options,
    library_errors,
)
from zhom.services import archive
from zhom.services.regularity import check_as_regular, check_asf_regular, verify_equivalence_suite
from zhom.services.reports import dumps, regularity_text, suite_text


class Command(BaseCommand):
    help = "Decide AS- and/or ASF-regularity; --all runs the equivalence suite on both sides."

    def add_arguments(self, parser):
        add_algebra_arguments(parser)
        which = parser.add_mutually_exclusive_group()
        which.add_argument("--as", action="store_const", const="as", dest="which", help="AS check only.")
        which.add_argument("--asf", action="store_const", const="asf", dest="which", help="ASF check only.")
        which.add_argument(
            "--all",
            action="store_const",
            const="all",
            dest="which",
            help="Both checks on A and on the opposite algebra (default).",
        )
        parser.add_argument(
            "--dmax",
            type=int,
            help="Largest dimension considered when choosing interior indices (default ZHOM_DMAX).",
        )
        parser.add_argument(
            "--record",
            action="store_true",
            help="Store the verdicts in the archive.",
        )

    def handle(self, *args, **options):
        which = options.get("which") or "all"
        spec = algebra_file_from_options(options)
        with library_errors():
            algebra = spec.build()
            if which == "all":
                suite = verify_equivalence_suite(algebra, options.get("dmax"))
                payload, text = suite.to_json(), suite_text(suite)
            else:
                checker = check_as_regular if which == "as" else check_asf_regular
                report = checker(algebra, options.get("dmax"))
                payload, text = report.to_json(), regularity_text(report)

        if options["record"]:
            if which == "all":
                archive.record_suite(spec, suite)
            else:
                archive.record_regularity(spec, report)

        if options["json"]:
            self.stdout.write(dumps(payload))
            return
        self.stdout.write(text)
        if which == "all" and not suite.verdicts_agree:
            self.stdout.write(self.style.WARNING("The four checks disagree."))
        elif which == "all" and not suite.agree:
            self.stdout.write(self.style.WARNING("The mirror or generator tables disagree."))
