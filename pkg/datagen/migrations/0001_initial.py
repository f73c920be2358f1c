from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='GenerationRun',
            fields=[
                ('id', models.AutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('kind', models.CharField(choices=[('generate', 'generate'), ('bench', 'bench')], max_length=16)),
                ('spec_path', models.CharField(blank=True, max_length=500)),
                ('output_dir', models.CharField(blank=True, max_length=500)),
                ('num_images', models.IntegerField()),
                ('global_seed', models.CharField(max_length=20)),
                ('workers', models.IntegerField()),
                ('min_pixels', models.IntegerField()),
                ('images_generated', models.IntegerField()),
                ('images_skipped', models.IntegerField(default=0)),
                ('wall_seconds', models.FloatField()),
                ('images_per_second', models.FloatField()),
                ('triangle_count_mean', models.FloatField()),
                ('dataset_digest', models.CharField(blank=True, max_length=64)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'ordering': ['id'],
            },
        ),
    ]
