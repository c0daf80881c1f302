from rest_framework import serializers
from rest_framework.renderers import JSONRenderer


class DiffRecordSerializer(serializers.Serializer):
    """
    One JSON-lines record per compared test.

    The instance is a DiffReport; ``name`` and ``timings`` come from the
    serializer context.
    """

    name = serializers.SerializerMethodField()
    source = serializers.CharField(source='source_name')
    target = serializers.CharField(source='target_name')
    classification = serializers.CharField()
    novel_outcomes = serializers.SerializerMethodField()
    missing_outcomes = serializers.SerializerMethodField()
    dropped = serializers.ListField(child=serializers.CharField())
    races = serializers.SerializerMethodField()
    timings = serializers.SerializerMethodField()

    def get_name(self, report):
        return self.context.get('name') or report.source_name

    def get_novel_outcomes(self, report):
        return [outcome.render() for outcome in report.sorted_novel()]

    def get_missing_outcomes(self, report):
        return [outcome.render() for outcome in report.sorted_missing()]

    def get_races(self, report):
        return [f'{first.label()} <-> {second.label()}' for first, second in report.races]

    def get_timings(self, report):
        return {stage: round(seconds, 6) for stage, seconds in (self.context.get('timings') or {}).items()}


def diff_record_line(report, name=None, timings=None):
    """The report as one line of JSON, without a trailing newline."""
    data = DiffRecordSerializer(report, context={'name': name, 'timings': timings}).data
    return JSONRenderer().render(data).decode('utf-8')
