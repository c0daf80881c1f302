from rest_framework import serializers

from litmus.services.types import Dialect
from memory_models.services import UnknownModel, lookup

from .models import BatchRun, PipelineRunRecord
from .services.profiles import KINDS, MAPPING, PREBUILT_ASM, TOOLCHAIN, CompilerProfile

# Relocations and function symbols only survive in an unlinked object with debug info.
COMPILE_FLAGS = ('-c', '-g')


class ProfileOptionsSerializer(serializers.Serializer):
    opt_level = serializers.IntegerField(min_value=0, max_value=3, default=2)
    pic = serializers.BooleanField(default=True)
    acquire_pc = serializers.BooleanField(default=False)


class CompilerProfileSerializer(serializers.Serializer):
    """
    Validates one entry of the profiles document; ``save()`` returns a
    ``CompilerProfile``.
    """

    name = serializers.RegexField(r'^[\w.+-]+$', max_length=100)
    kind = serializers.ChoiceField(choices=KINDS, default=MAPPING)
    isa = serializers.ChoiceField(choices=[Dialect.AARCH64.value, Dialect.ABSTRACT.value],
                                  default=Dialect.AARCH64.value)
    source_model = serializers.CharField(default='rc11_lite')
    target_model = serializers.CharField(default='armv8_lite')
    compile_command = serializers.ListField(child=serializers.CharField(), default=list)
    disassemble_command = serializers.ListField(child=serializers.CharField(), default=list)
    options = ProfileOptionsSerializer(default=dict)
    prebuilt_dir = serializers.CharField(default='', allow_blank=True)

    def _model_for(self, name, dialect, field):
        try:
            model = lookup(name)
        except UnknownModel as exc:
            raise serializers.ValidationError({field: str(exc)})
        if not model.applies_to(dialect):
            raise serializers.ValidationError({
                field: f'{name} does not apply to {dialect.value} tests.'
            })
        return model

    def validate(self, data):
        """Object-level validation"""
        isa = Dialect(data['isa'])
        self._model_for(data['source_model'], Dialect.SOURCE, 'source_model')
        self._model_for(data['target_model'], isa, 'target_model')

        if data['kind'] == TOOLCHAIN:
            compile_command = ' '.join(data['compile_command'])
            if '{input}' not in compile_command or '{output}' not in compile_command:
                raise serializers.ValidationError({
                    'compile_command': 'Must contain {input} and {output} placeholders.'
                })
            missing = [flag for flag in COMPILE_FLAGS if flag not in data['compile_command']]
            if missing:
                raise serializers.ValidationError({
                    'compile_command': f'Must compile an object with debug info (missing {" ".join(missing)}).'
                })
            if '{input}' not in ' '.join(data['disassemble_command']):
                raise serializers.ValidationError({
                    'disassemble_command': 'Must contain an {input} placeholder.'
                })
        if data['kind'] == MAPPING and isa is not Dialect.AARCH64:
            raise serializers.ValidationError({'isa': 'The mapping compiler only targets AArch64.'})
        if data['kind'] == PREBUILT_ASM and not data['prebuilt_dir']:
            raise serializers.ValidationError({'prebuilt_dir': 'Required for prebuilt-asm profiles.'})
        return data

    def create(self, validated_data):
        return CompilerProfile.from_dict(validated_data)


# ============================================
# RUN RECORDS
# ============================================

class PipelineRunRecordSerializer(serializers.ModelSerializer):
    classification_display = serializers.CharField(source='get_classification_display', read_only=True)

    class Meta:
        model = PipelineRunRecord
        fields = [
            'id', 'batch', 'test_name', 'profile_name', 'classification',
            'classification_display', 'failure_stage', 'error', 'novel_outcomes',
            'missing_outcomes', 'dropped', 'races', 'timings', 'artifact_dir', 'created_at',
        ]
        read_only_fields = fields


class BatchRunListSerializer(serializers.ModelSerializer):
    positive_count = serializers.IntegerField(read_only=True)
    failed_count = serializers.IntegerField(read_only=True)

    class Meta:
        model = BatchRun
        fields = [
            'id', 'name', 'profiles', 'status', 'test_count', 'positive_count',
            'failed_count', 'started_at', 'finished_at',
        ]
        read_only_fields = fields


class BatchRunDetailSerializer(serializers.ModelSerializer):
    records = PipelineRunRecordSerializer(many=True, read_only=True)
    summary = serializers.SerializerMethodField()

    class Meta:
        model = BatchRun
        fields = [
            'id', 'name', 'profiles', 'status', 'test_count', 'started_at',
            'finished_at', 'summary', 'records',
        ]
        read_only_fields = fields

    def get_summary(self, batch):
        return batch.summary()


class ClassificationCountSerializer(serializers.Serializer):
    profile = serializers.CharField()
    counts = serializers.DictField(child=serializers.IntegerField())
    total = serializers.IntegerField()
