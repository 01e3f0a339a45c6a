from __future__ import annotations

from pathlib import Path

from django.core.management.base import BaseCommand

from zhom.models import VerdictRecord
from zhom.services.archive import export_verdicts


class Command(BaseCommand):
    help = "Export stored regularity and duality verdicts to a CSV file."

    def add_arguments(self, parser):
        parser.add_argument(
            "--out",
            required=True,
            help="Output directory (created if missing)",
        )
        parser.add_argument(
            "--kind",
            choices=VerdictRecord.Kind.values,
            help="Only export verdicts of this kind.",
        )

    def handle(self, *args, **options):
        out_dir = Path(str(options["out"])).expanduser()
        stats = export_verdicts(out_dir=out_dir, kind=options.get("kind"))

        self.stdout.write(
            "\n".join(
                [
                    "Export summary:",
                    f"- total_verdicts: {stats.total_verdicts}",
                    f"- regular_count: {stats.regular_count}",
                    f"- failing_count: {stats.failing_count}",
                    f"- output_path: {stats.output_path}",
                ]
            )
        )
