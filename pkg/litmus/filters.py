import django_filters

from .models import LitmusFile


class LitmusFileFilter(django_filters.FilterSet):
    """
    Filtering for corpus entries

    Usage: ?dialect=AArch64
           ?name__icontains=LB
           ?min_threads=3
    """

    name__icontains = django_filters.CharFilter(field_name='name', lookup_expr='icontains')
    min_threads = django_filters.NumberFilter(field_name='thread_count', lookup_expr='gte')

    class Meta:
        model = LitmusFile
        fields = ['dialect', 'thread_count']
