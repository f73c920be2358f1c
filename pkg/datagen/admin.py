from django.contrib import admin
from .models import GenerationRun


@admin.register(GenerationRun)
class GenerationRunAdmin(admin.ModelAdmin):
    list_display = ('id', 'kind', 'num_images', 'workers', 'images_generated', 'images_per_second', 'created_at')
    list_filter = ('kind',)
