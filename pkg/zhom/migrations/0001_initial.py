# Generated by Django 5.2.9 on 2026-10-17 09:12

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies: list[tuple[str, str]] = []

    operations = [
        migrations.CreateModel(
            name="AlgebraRecord",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True, primary_key=True, serialize=False, verbose_name="ID"
                    ),
                ),
                ("name", models.CharField(max_length=128)),
                ("fingerprint", models.CharField(max_length=64, unique=True)),
                ("definition", models.JSONField()),
                ("created_at", models.DateTimeField(auto_now_add=True)),
            ],
        ),
        migrations.CreateModel(
            name="VerdictRecord",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True, primary_key=True, serialize=False, verbose_name="ID"
                    ),
                ),
                (
                    "kind",
                    models.CharField(
                        choices=[
                            ("AS", "AS-regularity"),
                            ("ASF", "ASF-regularity"),
                            ("SUITE", "Equivalence suite"),
                            ("DUALITY", "Local duality"),
                        ],
                        max_length=16,
                    ),
                ),
                (
                    "verdict",
                    models.CharField(
                        choices=[
                            ("REGULAR", "Regular"),
                            ("FAILS", "Fails"),
                            ("MATCHED", "Matched"),
                            ("MISMATCHED", "Mismatched"),
                        ],
                        max_length=16,
                    ),
                ),
                ("d", models.IntegerField(blank=True, null=True)),
                ("l", models.IntegerField(blank=True, null=True)),
                ("subject", models.CharField(blank=True, max_length=128)),
                ("report", models.JSONField()),
                ("created_at", models.DateTimeField(auto_now_add=True)),
                (
                    "algebra",
                    models.ForeignKey(
                        on_delete=django.db.models.deletion.CASCADE,
                        related_name="verdicts",
                        to="zhom.algebrarecord",
                    ),
                ),
            ],
            options={
                "ordering": ["algebra__name", "kind", "created_at"],
                "indexes": [
                    models.Index(fields=["kind", "verdict"], name="idx_verdict_kind_verdict")
                ],
            },
        ),
    ]
