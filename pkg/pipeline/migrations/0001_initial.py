import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='BatchRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('name', models.CharField(blank=True, help_text='Free-form label, e.g. the grid file', max_length=200)),
                ('profiles', models.JSONField(default=list, help_text='Profile names, in run order')),
                ('status', models.CharField(choices=[('RUNNING', 'Running'), ('FINISHED', 'Finished')], default='RUNNING', max_length=10)),
                ('test_count', models.PositiveIntegerField(default=0)),
                ('started_at', models.DateTimeField(auto_now_add=True)),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
            ],
            options={
                'ordering': ['-started_at'],
            },
        ),
        migrations.CreateModel(
            name='PipelineRunRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('test_name', models.CharField(max_length=200)),
                ('profile_name', models.CharField(max_length=100)),
                ('classification', models.CharField(blank=True, choices=[('equal', 'Equal'), ('positive', 'Positive'), ('negative', 'Negative'), ('mixed', 'Mixed'), ('ub-filtered', 'UB-filtered')], max_length=20)),
                ('failure_stage', models.CharField(blank=True, choices=[('', 'None'), ('parse', 'parse'), ('persist', 'persist'), ('prepare', 'prepare'), ('compile', 'compile'), ('disassemble', 'disassemble'), ('s2l', 's2l'), ('simulate-source', 'simulate-source'), ('simulate-target', 'simulate-target'), ('compare', 'compare')], max_length=20)),
                ('error', models.TextField(blank=True)),
                ('novel_outcomes', models.JSONField(default=list)),
                ('missing_outcomes', models.JSONField(default=list)),
                ('dropped', models.JSONField(default=list)),
                ('races', models.JSONField(default=list)),
                ('timings', models.JSONField(default=dict)),
                ('artifact_dir', models.CharField(blank=True, max_length=500)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('batch', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='records', to='pipeline.batchrun')),
            ],
            options={
                'ordering': ['batch', 'test_name', 'profile_name'],
                'indexes': [models.Index(fields=['classification'], name='pipeline_run_class_idx'), models.Index(fields=['profile_name'], name='pipeline_run_profile_idx')],
            },
        ),
    ]
