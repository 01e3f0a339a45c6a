from django.db import models


class AlgebraRecord(models.Model):
    name = models.CharField(max_length=128)
    fingerprint = models.CharField(max_length=64, unique=True)
    definition = models.JSONField()
    created_at = models.DateTimeField(auto_now_add=True)

    def __str__(self) -> str:
        return f"{self.name} ({self.fingerprint[:12]})"


class VerdictRecord(models.Model):
    class Kind(models.TextChoices):
        AS = "AS", "AS-regularity"
        ASF = "ASF", "ASF-regularity"
        SUITE = "SUITE", "Equivalence suite"
        DUALITY = "DUALITY", "Local duality"

    class Verdict(models.TextChoices):
        REGULAR = "REGULAR", "Regular"
        FAILS = "FAILS", "Fails"
        MATCHED = "MATCHED", "Matched"
        MISMATCHED = "MISMATCHED", "Mismatched"

    algebra = models.ForeignKey(AlgebraRecord, on_delete=models.CASCADE, related_name="verdicts")
    kind = models.CharField(max_length=16, choices=Kind.choices)
    verdict = models.CharField(max_length=16, choices=Verdict.choices)
    d = models.IntegerField(null=True, blank=True)
    l = models.IntegerField(null=True, blank=True)
    subject = models.CharField(max_length=128, blank=True)
    report = models.JSONField()
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ["algebra__name", "kind", "created_at"]
        indexes = [
            models.Index(fields=["kind", "verdict"], name="idx_verdict_kind_verdict"),
        ]

    def __str__(self) -> str:
        return f"{self.algebra.name} {self.kind}: {self.verdict}"
