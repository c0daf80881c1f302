import factory
from django.contrib.auth import get_user_model

from .models import LitmusFile

LOAD_BUFFERING = """C {name}
{{ x = 0; y = 0; }}
P0 (atomic_int* x, atomic_int* y) {{
  int r0 = atomic_load_explicit(x, memory_order_relaxed);
  atomic_store_explicit(y, 1, memory_order_relaxed);
}}
P1 (atomic_int* x, atomic_int* y) {{
  int r0 = atomic_load_explicit(y, memory_order_relaxed);
  atomic_store_explicit(x, 1, memory_order_relaxed);
}}
exists (0:r0=1 /\\ 1:r0=1)
"""


class UserFactory(factory.django.DjangoModelFactory):
    class Meta:
        model = get_user_model()
        django_get_or_create = ('username',)

    username = factory.Faker('user_name')
    email = factory.Faker('email')
    password = factory.PostGenerationMethodCall('set_password', 'litmus-pass')


class LitmusFileFactory(factory.django.DjangoModelFactory):
    """A relaxed load-buffering test under a fresh name."""

    class Meta:
        model = LitmusFile

    name = factory.Sequence(lambda n: f'LB+{n}')
    text = factory.LazyAttribute(lambda obj: LOAD_BUFFERING.format(name=obj.name))
    description = factory.Faker('sentence')
