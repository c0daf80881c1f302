from rest_framework.routers import DefaultRouter

from .views import BatchRunViewSet, CompilerProfileViewSet, PipelineRunRecordViewSet

router = DefaultRouter()
router.register(r'batches', BatchRunViewSet, basename='batch')
router.register(r'records', PipelineRunRecordViewSet, basename='run-record')
router.register(r'profiles', CompilerProfileViewSet, basename='profile')

urlpatterns = router.urls
