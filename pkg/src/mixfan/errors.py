"""Exception hierarchy shared across the package.

Precondition violations on plain arguments raise ``ValueError`` directly;
the classes here cover failures that callers may want to catch and report
separately (bad input files, failed fits, undefined statistics).
"""


class MixfanError(Exception):
    """Base class for all package-specific errors."""


class ParseError(MixfanError):
    """Malformed input file (CSV, schema, model, or discretization map)."""


class FitError(MixfanError):
    """Parameter estimation failed (e.g. every EM restart diverged)."""


class SelectionError(MixfanError):
    """Every candidate in a component-count search failed to fit."""


class UndefinedStatistic(MixfanError):
    """A statistic has no defined value for the given input.

    Raised e.g. for AUC with a single-class sample or rank correlation
    of a constant sequence.
    """
