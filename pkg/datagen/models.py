from django.db import models


class GenerationRun(models.Model):
    KIND_GENERATE = 'generate'
    KIND_BENCH = 'bench'
    KIND_CHOICES = [
        (KIND_GENERATE, 'generate'),
        (KIND_BENCH, 'bench'),
    ]

    kind = models.CharField(max_length=16, choices=KIND_CHOICES)
    spec_path = models.CharField(max_length=500, blank=True)
    output_dir = models.CharField(max_length=500, blank=True)
    num_images = models.IntegerField()
    # u64 のシードは整数型のカラムに収まらないため 10 進の文字列で持つ
    global_seed = models.CharField(max_length=20)
    workers = models.IntegerField()
    min_pixels = models.IntegerField()
    images_generated = models.IntegerField()
    images_skipped = models.IntegerField(default=0)
    wall_seconds = models.FloatField()
    images_per_second = models.FloatField()
    triangle_count_mean = models.FloatField()
    dataset_digest = models.CharField(max_length=64, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['id']

    def __str__(self):
        return '{} #{} ({} images)'.format(self.kind, self.id, self.images_generated)
