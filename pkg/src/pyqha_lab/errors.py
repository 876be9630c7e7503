from __future__ import annotations


class GridSizingError(ValueError):
    """Grid too coarse or too small for the requested quantity."""


class FingerprintMismatchError(ValueError):
    pass


class MeasureSpecError(ValueError):
    pass


class ConfigError(ValueError):
    pass


class PlotError(ValueError):
    pass


class ValidationGateError(RuntimeError):
    """A closed-form fast path disagreed with its quadrature oracle."""


class CacheIntegrityError(RuntimeError):
    pass
