"""Turn simulation curve CSVs into a two-panel vector figure.

The input is the training-design harness CSV (per-block NMSE and received
SNR means, one row per method and block, ``# key = value`` metadata
comments). The output is a figure with the NMSE panel stacked above the
received-SNR panel on a shared block-index axis. The CSV is the only
interface: this package reads the file format, not the simulator.
"""

from pilotplot.figure import (
    DEFAULT_LABELS,
    FigureSpec,
    build_figure,
    describe_metadata,
    render,
)
from pilotplot.reader import (
    OPTIONAL_COLUMNS,
    REQUIRED_COLUMNS,
    CurveTable,
    MethodCurve,
    SchemaError,
    read_curves,
)

__version__ = "0.1.0"

__all__ = [
    "CurveTable",
    "DEFAULT_LABELS",
    "FigureSpec",
    "MethodCurve",
    "OPTIONAL_COLUMNS",
    "REQUIRED_COLUMNS",
    "SchemaError",
    "build_figure",
    "describe_metadata",
    "read_curves",
    "render",
]
