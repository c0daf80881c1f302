from django.core.exceptions import ValidationError
from django.db import models

from .services import Dialect, LitmusError, parse_litmus, validate_test


class LitmusFile(models.Model):
    """
    A stored corpus entry: the text of one litmus test.

    The text is parsed on every save; ``dialect``, ``thread_count`` and
    ``metadata`` are taken from the parsed test and the name defaults to
    the test's own.
    """

    DIALECT_CHOICES = [(dialect.value, dialect.value) for dialect in Dialect]

    name = models.CharField(max_length=200, unique=True)
    dialect = models.CharField(max_length=10, choices=DIALECT_CHOICES, editable=False)
    text = models.TextField(help_text='Litmus source, either dialect')
    thread_count = models.PositiveSmallIntegerField(default=0, editable=False)
    metadata = models.JSONField(default=dict, blank=True)
    description = models.TextField(blank=True)
    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)

    class Meta:
        ordering = ['name']

    def __str__(self):
        return f'{self.name} ({self.dialect})'

    def parse(self):
        return parse_litmus(self.text)

    def diagnostics(self):
        return validate_test(self.parse())

    def save(self, *args, **kwargs):
        try:
            test = self.parse()
        except LitmusError as exc:
            raise ValidationError({'text': str(exc)}) from exc
        self.name = self.name or test.name
        self.dialect = test.dialect.value
        self.thread_count = len(test.threads)
        self.metadata = {**dict(test.metadata), **(self.metadata or {})}
        super().save(*args, **kwargs)
