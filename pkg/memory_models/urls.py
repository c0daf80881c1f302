from rest_framework.routers import DefaultRouter

from .views import MemoryModelViewSet

router = DefaultRouter()
router.register(r'memory-models', MemoryModelViewSet, basename='memory-model')

urlpatterns = router.urls
