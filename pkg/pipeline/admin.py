from django.contrib import admin
from django.utils.html import format_html

from .models import BatchRun, PipelineRunRecord

CLASSIFICATION_COLORS = {
    'positive': '#dc3545',
    'negative': '#ffc107',
    'equal': '#28a745',
    'ub-filtered': '#6c757d',
}


class PipelineRunRecordInline(admin.TabularInline):
    model = PipelineRunRecord
    extra = 0
    fields = ['test_name', 'profile_name', 'classification', 'failure_stage']
    readonly_fields = fields
    can_delete = False
    show_change_link = True


@admin.register(BatchRun)
class BatchRunAdmin(admin.ModelAdmin):
    list_display = ['id', 'name', 'status', 'test_count', 'started_at', 'finished_at']
    list_filter = ['status', 'started_at']
    search_fields = ['name']
    readonly_fields = ['started_at']
    inlines = [PipelineRunRecordInline]


@admin.register(PipelineRunRecord)
class PipelineRunRecordAdmin(admin.ModelAdmin):
    list_display = ['test_name', 'profile_name', 'classification_badge', 'failure_stage', 'batch']
    list_filter = ['classification', 'profile_name', 'failure_stage']
    search_fields = ['test_name', 'error']
    readonly_fields = [
        'batch', 'test_name', 'profile_name', 'classification', 'failure_stage', 'error',
        'novel_outcomes', 'missing_outcomes', 'dropped', 'races', 'timings', 'artifact_dir',
        'created_at',
    ]

    def has_add_permission(self, request):
        return False

    @admin.display(description='Result')
    def classification_badge(self, obj):
        if obj.failed:
            return format_html(
                '<span style="color: #dc3545;">failed at {}</span>', obj.failure_stage
            )
        color = CLASSIFICATION_COLORS.get(obj.classification, '#6c757d')
        return format_html(
            '<span style="background-color: {}; color: white; padding: 3px 10px; '
            'border-radius: 3px;">{}</span>',
            color,
            obj.get_classification_display(),
        )
