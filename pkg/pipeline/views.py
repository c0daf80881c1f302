from django_filters.rest_framework import DjangoFilterBackend
from drf_spectacular.utils import extend_schema
from rest_framework import filters, viewsets
from rest_framework.decorators import action
from rest_framework.permissions import IsAuthenticated
from rest_framework.response import Response

from .filters import PipelineRunRecordFilter
from .models import BatchRun, PipelineRunRecord
from .serializers import (
    BatchRunDetailSerializer,
    BatchRunListSerializer,
    ClassificationCountSerializer,
    CompilerProfileSerializer,
    PipelineRunRecordSerializer,
)
from .services.profiles import load_profiles
from .services.summary import summarize, summary_rows


class BatchRunViewSet(viewsets.ReadOnlyModelViewSet):
    """
    Recorded batches

    GET /api/pipeline/batches/                → List batches with counts
    GET /api/pipeline/batches/{id}/           → One batch with its records
    GET /api/pipeline/batches/{id}/summary/   → Profile x classification counts
    """

    permission_classes = [IsAuthenticated]
    filter_backends = [filters.OrderingFilter]
    ordering_fields = ['started_at', 'test_count']
    ordering = ['-started_at']

    def get_queryset(self):
        return BatchRun.with_counts()

    def get_serializer_class(self):
        if self.action == 'list':
            return BatchRunListSerializer
        return BatchRunDetailSerializer

    @extend_schema(responses=ClassificationCountSerializer(many=True))
    @action(detail=True, methods=['get'])
    def summary(self, request, pk=None):
        return Response(self.get_object().summary())


class PipelineRunRecordViewSet(viewsets.ReadOnlyModelViewSet):
    """
    Run records across batches

    GET /api/pipeline/records/            → List (filterable)
    GET /api/pipeline/records/{id}/       → One record
    GET /api/pipeline/records/summary/    → Counts over the filtered records
    """

    permission_classes = [IsAuthenticated]
    serializer_class = PipelineRunRecordSerializer
    queryset = PipelineRunRecord.objects.select_related('batch')
    filter_backends = [DjangoFilterBackend, filters.SearchFilter, filters.OrderingFilter]
    filterset_class = PipelineRunRecordFilter
    search_fields = ['test_name', 'error']
    ordering_fields = ['test_name', 'profile_name', 'created_at']

    @extend_schema(responses=ClassificationCountSerializer(many=True))
    @action(detail=False, methods=['get'])
    def summary(self, request):
        records = [record.as_record() for record in self.filter_queryset(self.get_queryset())]
        return Response(summary_rows(summarize(records)))


class CompilerProfileViewSet(viewsets.ViewSet):
    """
    Configured compiler profiles

    GET /api/pipeline/profiles/   → Profiles from the profiles document
    """

    permission_classes = [IsAuthenticated]

    @extend_schema(responses=CompilerProfileSerializer(many=True))
    def list(self, request):
        return Response([profile.to_dict() for profile in load_profiles().values()])
