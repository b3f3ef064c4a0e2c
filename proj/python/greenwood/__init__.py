# Copyright 2026 The greenwood Authors
# License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
"""Modified Greenwood statistic tests for heavy-tailed data."""

from ._core import (
    QuantileTable,
    Spectrogram,
    build_quantile_table,
    frequency_rows,
    kaiser_window,
    modified_greenwood,
    normalized_statistic,
    sample,
    spectrogram,
    test,
)

__all__ = [
    "QuantileTable",
    "Spectrogram",
    "build_quantile_table",
    "frequency_rows",
    "kaiser_window",
    "modified_greenwood",
    "normalized_statistic",
    "sample",
    "spectrogram",
    "test",
]
__version__ = "0.1.0"
