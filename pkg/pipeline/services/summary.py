"""
Batch summary: a profile by classification count table.
"""

import pandas as pd

from .exceptions import PipelineError

FAILED = 'failed'
COLUMNS = ['positive', 'negative', 'equal', 'ub-filtered', FAILED]


def _outcome(record):
    return record['classification'] or FAILED


def summarize(records, profiles=()):
    """
    Counts per profile (rows) and classification (columns), plus a
    ``total`` column. Every record lands in exactly one cell.
    """
    records = list(records)
    index = list(dict.fromkeys(list(profiles) + [record['profile'] for record in records]))
    if not records:
        table = pd.DataFrame(0, index=pd.Index(index, name='profile'), columns=COLUMNS)
    else:
        frame = pd.DataFrame({
            'profile': [record['profile'] for record in records],
            'outcome': [_outcome(record) for record in records],
        })
        table = (pd.crosstab(frame['profile'], frame['outcome'])
                 .reindex(index=index, columns=COLUMNS, fill_value=0))
        table.index.name = 'profile'
    table.columns.name = None
    table['total'] = table[COLUMNS].sum(axis=1)
    if int(table['total'].sum()) != len(records):
        raise PipelineError(f'summary counts {int(table["total"].sum())} runs, batch has {len(records)}')
    return table.astype(int)


def summary_rows(table):
    return [
        {
            'profile': profile,
            'counts': {column: int(row[column]) for column in COLUMNS},
            'total': int(row['total']),
        }
        for profile, row in table.iterrows()
    ]


def render_summary(table):
    if table.empty:
        return 'No runs.\n'
    return table.to_string() + '\n'
