"""Error taxonomy shared across modules.

Two families matter to callers: bad input (malformed documents, broken
CSVs, impossible parameters) and analytic degeneracy (valid input on
which the requested statistic is undefined). The CLI maps the first to
exit code 2 and the second to exit code 3.
"""


class InputError(ValueError):
    """Invalid or malformed input data."""


class DegenerateDataError(ValueError):
    """Input is well formed but the requested analysis is undefined on it."""
