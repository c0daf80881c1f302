from rest_framework.routers import SimpleRouter

from .views import LitmusFileViewSet

router = SimpleRouter()
router.register(r'', LitmusFileViewSet, basename='litmus-file')

urlpatterns = router.urls
