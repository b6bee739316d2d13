"""Exception types shared by the library and the CLI.

The CLI maps these to exit codes: ConfigError -> 2, DataError -> 3,
NumericalError -> 4.  Plain ValueError from misuse of library functions is
a bug in the caller and surfaces as an ordinary traceback.
"""


class ConfigError(Exception):
    """Invalid or inconsistent run configuration."""


class DataError(Exception):
    """Malformed, non-binary, or otherwise unusable input data."""


class NumericalError(Exception):
    """Numerical failure (for example persistent Laplace non-convergence)."""


class LaplaceNonConvergence(NumericalError):
    """Newton search for the kernel mode did not converge."""
