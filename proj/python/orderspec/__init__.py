"""Order-indexed spectral operators, lag-dispersion tests and rolling monitoring."""

from ._orderspec import (
    ConfigError,
    DataError,
    DimensionError,
    InputError,
    InsufficientDataError,
    NumericalError,
    __version__,
    dispersion,
    effective_rank,
    generate,
    lss,
    monitor,
    spectra,
    sym_eig,
    test,
)

__all__ = [
    "ConfigError",
    "DataError",
    "DimensionError",
    "InputError",
    "InsufficientDataError",
    "NumericalError",
    "__version__",
    "dispersion",
    "effective_rank",
    "generate",
    "lss",
    "monitor",
    "spectra",
    "sym_eig",
    "test",
]
