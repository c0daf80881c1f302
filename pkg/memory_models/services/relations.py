"""
Boolean-matrix relation algebra.

A relation over ``n`` events is an ``n x n`` numpy bool matrix; every
operation returns a fresh matrix.
"""

import numpy as np


def empty(size):
    return np.zeros((size, size), dtype=bool)


def identity(size):
    return np.eye(size, dtype=bool)


def identity_on(mask):
    """[S]: the identity restricted to events selected by ``mask``."""
    return np.diag(np.asarray(mask, dtype=bool))


def compose(left, right):
    """left ; right"""
    if not left.size:
        return left.copy()
    return (left.astype(np.uint8) @ right.astype(np.uint8)) > 0


def transitive_closure(matrix):
    """Least fixpoint of r | r;r, computed with Warshall's algorithm."""
    closure = matrix.copy()
    for k in range(closure.shape[0]):
        closure |= np.outer(closure[:, k], closure[k, :])
    return closure


def reflexive_closure(matrix):
    return matrix | identity(matrix.shape[0])


def is_irreflexive(matrix):
    return not np.diagonal(matrix).any()


def is_acyclic(matrix):
    return is_irreflexive(transitive_closure(matrix))


def is_empty(matrix):
    return not matrix.any()


def pairs(matrix):
    sources, targets = np.nonzero(matrix)
    return sorted(zip(sources.tolist(), targets.tolist()))
