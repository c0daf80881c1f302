"""
Compiler profiles: how one (compiler, flags, ISA, models) combination is run.

Profiles live in a JSON document (``{"profiles": [...]}``) validated by
``CompilerProfileSerializer``. Three kinds exist:

``toolchain``     compile and disassemble with external tools
``mapping``       the in-process C11 to AArch64 mapping compiler
``prebuilt-asm``  read ready-made asm tests from a directory
"""

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from django.conf import settings

from litmus.services.types import Dialect

from .exceptions import InvalidProfile, UnknownProfile

TOOLCHAIN = 'toolchain'
MAPPING = 'mapping'
PREBUILT_ASM = 'prebuilt-asm'
KINDS = (TOOLCHAIN, MAPPING, PREBUILT_ASM)


@dataclass(frozen=True)
class CompilerProfile:
    name: str
    kind: str = MAPPING
    isa: Dialect = Dialect.AARCH64
    source_model: str = 'rc11_lite'
    target_model: str = 'armv8_lite'
    compile_command: tuple = ()
    disassemble_command: tuple = ()
    options: dict = field(default_factory=dict, hash=False, compare=False)
    prebuilt_dir: str = ''

    @property
    def spawns_processes(self):
        return self.kind == TOOLCHAIN

    def option(self, name, default=None):
        return self.options.get(name, default)

    def prebuilt_path(self, test_name):
        directory = Path(self.prebuilt_dir)
        if not directory.is_absolute():
            directory = Path(settings.BASE_DIR) / directory
        return directory / f'{test_name}.litmus'

    def with_models(self, source_model=None, target_model=None):
        """Copy with the source and/or target model overridden."""
        data = self.to_dict()
        data['source_model'] = source_model or self.source_model
        data['target_model'] = target_model or self.target_model
        return CompilerProfile.from_dict(data)

    def to_dict(self):
        data = asdict(self)
        data['isa'] = self.isa.value
        data['compile_command'] = list(self.compile_command)
        data['disassemble_command'] = list(self.disassemble_command)
        return data

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        data['isa'] = Dialect(data.get('isa', Dialect.AARCH64.value))
        data['compile_command'] = tuple(data.get('compile_command') or ())
        data['disassemble_command'] = tuple(data.get('disassemble_command') or ())
        data['options'] = dict(data.get('options') or {})
        return cls(**data)


def pipeline_setting(name, default=None):
    return getattr(settings, 'PIPELINE', {}).get(name, default)


def parse_profiles(document):
    """Validate a decoded profiles document; returns profiles by name, in document order."""
    from pipeline.serializers import CompilerProfileSerializer

    entries = document.get('profiles') if isinstance(document, dict) else document
    if not isinstance(entries, list):
        raise InvalidProfile('expected {"profiles": [...]}')
    profiles = {}
    for entry in entries:
        serializer = CompilerProfileSerializer(data=entry)
        if not serializer.is_valid():
            name = entry.get('name', '?') if isinstance(entry, dict) else '?'
            raise InvalidProfile(f'profile {name}: {dict(serializer.errors)}')
        profile = serializer.save()
        if profile.name in profiles:
            raise InvalidProfile(f'duplicate profile name {profile.name!r}')
        profiles[profile.name] = profile
    return profiles


def load_profiles(path=None):
    path = Path(path or pipeline_setting('PROFILES_FILE', Path(settings.BASE_DIR) / 'profiles.json'))
    with open(path, encoding='utf-8') as handle:
        try:
            document = json.load(handle)
        except json.JSONDecodeError as exc:
            raise InvalidProfile(f'{path}: {exc}') from exc
    return parse_profiles(document)


def get_profile(name, path=None):
    profiles = load_profiles(path)
    try:
        return profiles[name]
    except KeyError:
        raise UnknownProfile(name, profiles) from None
