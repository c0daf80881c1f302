from django_filters.rest_framework import DjangoFilterBackend
from drf_spectacular.utils import extend_schema
from rest_framework import filters, status, viewsets
from rest_framework.decorators import action
from rest_framework.permissions import IsAuthenticated
from rest_framework.response import Response

from executions.services.exceptions import SimulationError
from executions.services.simulate import simulate as run_simulation
from memory_models.services import ModelError

from .filters import LitmusFileFilter
from .models import LitmusFile
from .serializers import (
    DiagnosticSerializer,
    LitmusFileListSerializer,
    LitmusFileSerializer,
    SimulateRequestSerializer,
    SimulationResultSerializer,
)


class LitmusFileViewSet(viewsets.ModelViewSet):
    """
    Stored litmus tests

    GET    /api/litmus/                  → List tests
    POST   /api/litmus/                  → Store a test (parsed on save)
    GET    /api/litmus/{id}/             → One test with its text
    PUT    /api/litmus/{id}/             → Replace
    DELETE /api/litmus/{id}/             → Delete

    Custom Actions:
    POST   /api/litmus/{id}/simulate/    → Outcomes under a memory model
    GET    /api/litmus/{id}/validate/    → Invariant diagnostics
    """

    permission_classes = [IsAuthenticated]
    queryset = LitmusFile.objects.all()
    filter_backends = [DjangoFilterBackend, filters.SearchFilter, filters.OrderingFilter]
    filterset_class = LitmusFileFilter
    search_fields = ['name', 'description', 'text']
    ordering_fields = ['name', 'thread_count', 'updated_at']
    ordering = ['name']

    def get_serializer_class(self):
        if self.action == 'list':
            return LitmusFileListSerializer
        return LitmusFileSerializer

    # ============================================
    # CUSTOM ACTIONS
    # ============================================

    @extend_schema(request=SimulateRequestSerializer, responses=SimulationResultSerializer)
    @action(detail=True, methods=['post'])
    def simulate(self, request, pk=None):
        """
        Run the stored test under a builtin model

        POST /api/litmus/{id}/simulate/
        Body: {"model": "rc11_lite", "unroll": 2}
        """
        litmus_file = self.get_object()
        params = SimulateRequestSerializer(data=request.data)
        params.is_valid(raise_exception=True)
        try:
            result = run_simulation(
                litmus_file.parse(),
                params.validated_data['model'],
                unroll_factor=params.validated_data.get('unroll'),
                cap=params.validated_data.get('cap'),
                collect_races=params.validated_data['collect_races'],
            )
        except (SimulationError, ModelError) as exc:
            return Response({'error': str(exc)}, status=status.HTTP_400_BAD_REQUEST)
        return Response(SimulationResultSerializer(result).data)

    @extend_schema(responses=DiagnosticSerializer(many=True))
    @action(detail=True, methods=['get'])
    def validate(self, request, pk=None):
        """
        GET /api/litmus/{id}/validate/
        """
        diagnostics = self.get_object().diagnostics()
        return Response({
            'valid': not diagnostics,
            'diagnostics': DiagnosticSerializer(diagnostics, many=True).data,
        })
