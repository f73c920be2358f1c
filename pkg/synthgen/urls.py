"""synthgen URL Configuration

The `urlpatterns` list routes URLs to views:
    /admin/  Django admin (generation run history)
    /api/    run history and scene-spec validation
"""
from django.contrib import admin
from django.urls import path, include

urlpatterns = [
    path('admin/', admin.site.urls),
    path('api/', include('datagen.urls')),
]
