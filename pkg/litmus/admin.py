from django.contrib import admin
from django.utils.html import format_html

from .models import LitmusFile

DIALECT_COLORS = {
    'C': '#007bff',
    'AArch64': '#6f42c1',
    'ABS': '#6c757d',
}


@admin.register(LitmusFile)
class LitmusFileAdmin(admin.ModelAdmin):
    list_display = ['name', 'dialect_badge', 'thread_count', 'updated_at']
    list_filter = ['dialect', 'thread_count']
    search_fields = ['name', 'description', 'text']
    readonly_fields = ['dialect', 'thread_count', 'created_at', 'updated_at']
    fieldsets = (
        ('Test', {'fields': ('name', 'text', 'description')}),
        ('Parsed', {'fields': ('dialect', 'thread_count', 'metadata')}),
        ('Tracking', {'fields': ('created_at', 'updated_at'), 'classes': ('collapse',)}),
    )

    @admin.display(description='Dialect')
    def dialect_badge(self, obj):
        return format_html(
            '<span style="background-color: {}; color: white; padding: 3px 10px; '
            'border-radius: 3px;">{}</span>',
            DIALECT_COLORS.get(obj.dialect, '#6c757d'),
            obj.dialect,
        )
