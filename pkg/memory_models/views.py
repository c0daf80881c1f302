from drf_spectacular.utils import extend_schema
from rest_framework import status, viewsets
from rest_framework.permissions import IsAuthenticated
from rest_framework.response import Response

from .serializers import ModelSpecSerializer
from .services import UnknownModel, builtin_models, lookup


class MemoryModelViewSet(viewsets.ViewSet):
    """
    Builtin memory models

    GET /api/memory-models/          → List models
    GET /api/memory-models/{name}/   → One model with its constraints
    """

    permission_classes = [IsAuthenticated]
    lookup_field = 'name'
    lookup_value_regex = '[A-Za-z0-9_]+'

    @extend_schema(responses=ModelSpecSerializer(many=True))
    def list(self, request):
        models = list(builtin_models().values())
        return Response(ModelSpecSerializer(models, many=True).data)

    @extend_schema(responses=ModelSpecSerializer)
    def retrieve(self, request, name=None):
        try:
            model = lookup(name)
        except UnknownModel as exc:
            return Response({'error': str(exc)}, status=status.HTTP_404_NOT_FOUND)
        return Response(ModelSpecSerializer(model).data)
