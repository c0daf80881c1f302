"""
Diffcheck services: state mappings and outcome-set comparison.
"""

from .compare import (
    COMPARE_ANYWAY,
    IGNORE_RACY,
    Classification,
    DiffReport,
    classify,
    compare_outcomes,
    render_compare_table,
)
from .exceptions import AmbiguousMapping, DiffError, IncompatibleWidths, MissingBinding
from .mapping import StateMapping, apply_mapping, infer_state_mapping, rename_outcome

__all__ = [
    'COMPARE_ANYWAY', 'IGNORE_RACY', 'AmbiguousMapping', 'Classification', 'DiffError',
    'DiffReport', 'IncompatibleWidths', 'MissingBinding', 'StateMapping', 'apply_mapping',
    'classify', 'compare_outcomes', 'infer_state_mapping', 'rename_outcome', 'render_compare_table',
]
