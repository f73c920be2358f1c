from rest_framework import generics, viewsets
from rest_framework.response import Response
from .serializers import GenerationRunSerializer, SceneSpecSerializer
from .models import GenerationRun


class GenerationRunViewSet(viewsets.ReadOnlyModelViewSet):
    queryset = GenerationRun.objects.all()
    serializer_class = GenerationRunSerializer


class ValidateSceneSpecView(generics.GenericAPIView):
    """Structure and semantic checks of a posted scene spec; mesh files are not opened."""
    serializer_class = SceneSpecSerializer

    def post(self, request, *args, **kwargs):
        serializer = self.get_serializer(data=request.data)
        serializer.is_valid(raise_exception=True)
        data = serializer.validated_data
        response = {
            'valid': True,
            'classes': [c['class_id'] for c in data['object_library']],
            'regions': [r['name'] for r in data['regions']],
            'furniture': len(data.get('furniture', [])),
            'image_size': [data['camera']['width'], data['camera']['height']],
        }
        return Response(response)
