from rest_framework import serializers

from memory_models.services import builtin_models

from .models import LitmusFile
from .services import LitmusError, LitmusSyntaxError, parse_litmus


class LitmusFileListSerializer(serializers.ModelSerializer):
    """
    Serializer for listing corpus entries (no text)
    """

    class Meta:
        model = LitmusFile
        fields = ['id', 'name', 'dialect', 'thread_count', 'updated_at']


class LitmusFileSerializer(serializers.ModelSerializer):
    observables = serializers.SerializerMethodField()

    class Meta:
        model = LitmusFile
        fields = [
            'id',
            'name',
            'dialect',
            'text',
            'thread_count',
            'observables',
            'metadata',
            'description',
            'created_at',
            'updated_at',
        ]
        read_only_fields = ['id', 'dialect', 'thread_count', 'created_at', 'updated_at']
        extra_kwargs = {'name': {'required': False}}

    def get_observables(self, obj):
        return list(obj.parse().observable_keys())

    def validate_text(self, value):
        try:
            parse_litmus(value)
        except LitmusSyntaxError as exc:
            raise serializers.ValidationError(
                f'Line {exc.line}, column {exc.col}: expected {exc.expected}.'
            )
        except LitmusError as exc:
            raise serializers.ValidationError(str(exc))
        return value

    def validate(self, data):
        if not data.get('name') and 'text' in data:
            data['name'] = parse_litmus(data['text']).name
        name = data.get('name')
        clash = LitmusFile.objects.filter(name=name)
        if self.instance is not None:
            clash = clash.exclude(pk=self.instance.pk)
        if name and clash.exists():
            raise serializers.ValidationError({'name': f'A test named {name!r} is already stored.'})
        return data


class DiagnosticSerializer(serializers.Serializer):
    code = serializers.CharField()
    subject = serializers.CharField()
    message = serializers.CharField()


class SimulateRequestSerializer(serializers.Serializer):
    """
    Body of POST /api/litmus/{id}/simulate/
    """

    model = serializers.ChoiceField(choices=list(builtin_models()))
    unroll = serializers.IntegerField(min_value=1, max_value=16, required=False)
    cap = serializers.IntegerField(min_value=1, required=False)
    collect_races = serializers.BooleanField(default=False)


class SimulationResultSerializer(serializers.Serializer):
    model = serializers.CharField(source='model.name')
    outcomes = serializers.SerializerMethodField()
    positive = serializers.IntegerField()
    negative = serializers.IntegerField()
    candidates = serializers.IntegerField(source='stats.candidates')
    elapsed = serializers.FloatField(source='stats.elapsed')
    races = serializers.SerializerMethodField()
    log = serializers.CharField()

    def get_outcomes(self, result):
        return result.outcomes.render()

    def get_races(self, result):
        return [f'{first.label()} <-> {second.label()}' for first, second in result.races]
