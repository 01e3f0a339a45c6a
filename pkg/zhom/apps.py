from django.apps import AppConfig


class ZhomConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "zhom"
    verbose_name = "Z-algebra homological checks"
