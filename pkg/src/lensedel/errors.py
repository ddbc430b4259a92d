# -*- coding: utf-8 -*-
"""errors file.

Exceptions raised by the lensedel package.

All of them derive from :class:`LenseDelError` so that the pipeline can record
a per-image failure without aborting a batch.

.. module:: errors
   :synopsis: exceptions of the lensedel package.

.. note:: LEnsE - Institut d'Optique - version 0.1

"""
from typing import Optional


class LenseDelError(Exception):
    """Base class of all the lensedel errors."""


class InvalidInputError(LenseDelError, ValueError):
    """Non-finite or out-of-range input value."""


class GeometryError(LenseDelError, ValueError):
    """Degenerate geometric input (too few vertices, collinear points, zero area)."""


class DegenerateConfigurationError(GeometryError):
    """Rank-deficient point configuration for an estimation problem."""


class HorizonError(LenseDelError):
    """A point maps to infinity, or a polygon straddles the horizon line."""


class ConsensusError(LenseDelError):
    """RANSAC did not find a model supported by enough inliers."""


class UpVectorAmbiguityError(LenseDelError):
    """Both plane normals are equally valid (cameras lie in the ground plane)."""


class ShapeMismatchError(LenseDelError, ValueError):
    """Array dimensions that must agree do not."""


class ConfigError(LenseDelError):
    """Invalid pipeline configuration."""


class EvaluationError(LenseDelError):
    """Precision cannot be computed (empty population or zero-area estimate)."""


class SchemaError(LenseDelError):
    """Malformed input file.

    :param message: description of the violation.
    :type message: str
    :param path: file being read.
    :type path: str, optional
    :param field: dotted path of the offending field.
    :type field: str, optional
    :param line: line number in the file, when known.
    :type line: int, optional
    """

    def __init__(self, message: str, path: Optional[str] = None,
                 field: Optional[str] = None, line: Optional[int] = None):
        self.message = message
        self.path = path
        self.field = field
        self.line = line
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f'line {line}')
        if field is not None:
            where.append(f'field {field}')
        prefix = f"{', '.join(where)}: " if where else ''
        super().__init__(prefix + message)
