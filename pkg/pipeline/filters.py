import django_filters

from .models import PipelineRunRecord


class PipelineRunRecordFilter(django_filters.FilterSet):
    """
    Filtering for run records

    Usage: ?classification=positive&profile_name=mapping-O2
           ?classification__in=positive,negative
           ?failed=true
    """

    classification__in = django_filters.CharFilter(method='filter_classification_in')
    failed = django_filters.BooleanFilter(method='filter_failed')

    class Meta:
        model = PipelineRunRecord
        fields = ['batch', 'classification', 'profile_name', 'failure_stage', 'test_name']

    def filter_classification_in(self, queryset, name, value):
        if not value:
            return queryset
        values = [v.strip().lower() for v in value.split(',')]
        return queryset.filter(classification__in=values)

    def filter_failed(self, queryset, name, value):
        if value is None:
            return queryset
        if value:
            return queryset.exclude(failure_stage='')
        return queryset.filter(failure_stage='')
