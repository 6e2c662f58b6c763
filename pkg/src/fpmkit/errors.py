"""Exception taxonomy shared by the library and the CLI.

The CLI maps these onto process exit codes (config 1, data 2, numerical 3),
so library code should raise the most specific class that applies.  Plain
``ValueError`` is treated as a configuration/usage problem.
"""


class FpmError(Exception):
    """Base class for fpmkit errors."""


class ConfigError(FpmError):
    """Invalid configuration, CLI usage, or parameter combination."""


class DataError(FpmError):
    """Corrupt, truncated, or inconsistent input data."""


class NumericalError(FpmError):
    """Non-finite intermediate or other numerical failure during computation."""
