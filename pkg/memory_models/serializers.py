from rest_framework import serializers


class ConstraintSerializer(serializers.Serializer):
    kind = serializers.CharField(source='kind.value')
    label = serializers.CharField()
    expression = serializers.SerializerMethodField()

    def get_expression(self, constraint):
        return constraint.describe()


class ModelSpecSerializer(serializers.Serializer):
    """
    Read-only view of a builtin ModelSpec
    """

    name = serializers.CharField()
    description = serializers.CharField()
    dialects = serializers.SerializerMethodField()
    race_semantics = serializers.CharField(source='race_semantics.value')
    constraints = ConstraintSerializer(many=True)

    def get_dialects(self, model):
        return [dialect.value for dialect in model.dialects]
