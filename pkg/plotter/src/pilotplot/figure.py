"""Two stacked panels: estimation error on top, received SNR below.

The renderer is a pure transform from the parsed CSV table to the figure.
It never aggregates, smooths, or otherwise recomputes the plotted values,
so every line carries exactly the numbers read from the file.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib
import matplotlib.pyplot as plt

from pilotplot.reader import CurveTable, read_curves

DEFAULT_LABELS: dict[str, str] = {
    "sdr_snr": "SNR design (tracked)",
    "mse_min": "MSE-min design (tracked)",
    "blockiid_snr": "water-filling (memoryless)",
    "orthogonal": "orthogonal sweep",
    "random": "random pilots",
}

# caption pieces, emitted in this order for whichever keys the CSV carries
_CAPTION_FIELDS = (
    ("n_antennas", "{} antennas"),
    ("train_len", "{} training symbols"),
    ("block_len", "block length {}"),
    ("rho_db", "training power {} dB"),
    ("gamma_db", "data SNR {} dB"),
    ("r", "correlation {}"),
    ("speed_kmh", "{} km/h"),
    ("n_trials", "{} trials"),
)

_VECTOR_SUFFIXES = (".svg", ".pdf")

# fixed salt so SVG element ids do not vary from run to run
_HASH_SALT = "pilotplot"


@dataclass(frozen=True)
class FigureSpec:
    """What to render: input CSV, output image, and presentation knobs.

    ``methods_order`` selects and orders the plotted methods (default: every
    method, in CSV order). ``labels`` overrides display names per method.
    """

    input_csv: str | Path
    output_image: str | Path
    methods_order: tuple[str, ...] | None = None
    labels: Mapping[str, str] | None = None
    nmse_log_scale: bool = True

    def __post_init__(self):
        suffix = Path(self.output_image).suffix.lower()
        if suffix not in _VECTOR_SUFFIXES:
            raise ValueError(
                f"output_image must be a vector format "
                f"({', '.join(_VECTOR_SUFFIXES)}), got {suffix!r}"
            )


def describe_metadata(metadata: Mapping[str, str]) -> str:
    """One-line caption built from the CSV metadata comments."""
    parts = [
        template.format(metadata[key])
        for key, template in _CAPTION_FIELDS
        if key in metadata
    ]
    return ", ".join(parts)


def build_figure(
    table: CurveTable,
    methods_order: Sequence[str] | None = None,
    labels: Mapping[str, str] | None = None,
    nmse_log_scale: bool = True,
):
    """Assemble the two-panel figure from an already parsed table.

    Returns a matplotlib Figure with the NMSE panel on top and the received
    SNR panel below, sharing the block-index axis. Raises ValueError when
    ``methods_order`` names a method absent from the table.
    """
    order = tuple(methods_order) if methods_order is not None else table.methods
    missing = [m for m in order if m not in table.methods]
    if missing:
        raise ValueError(f"methods not present in CSV: {', '.join(missing)}")

    label_map = dict(DEFAULT_LABELS)
    if labels:
        label_map.update(labels)

    fig, (ax_err, ax_snr) = plt.subplots(
        2, 1, sharex=True, figsize=(7.0, 7.5), constrained_layout=True
    )
    for method in order:
        curve = table.curve(method)
        label = label_map.get(method, method)
        ax_err.plot(
            curve.blocks, curve.nmse, marker="o", markersize=3.5,
            linewidth=1.2, label=label,
        )
        ax_snr.plot(
            curve.blocks, curve.snr_db, marker="o", markersize=3.5,
            linewidth=1.2, label=label,
        )
    if nmse_log_scale:
        ax_err.set_yscale("log")
    ax_err.set_ylabel("NMSE")
    ax_err.grid(True, which="both", alpha=0.3)
    ax_snr.set_ylabel("received SNR (dB)")
    ax_snr.set_xlabel("block index")
    ax_snr.grid(True, alpha=0.3)
    if order:
        ax_err.legend(loc="best", fontsize=9)

    caption = describe_metadata(table.metadata)
    if caption:
        fig.suptitle(caption, fontsize=10)
    return fig


def render(spec: FigureSpec) -> Path:
    """Read the CSV, build the figure, and write the vector image.

    Output bytes are deterministic for a given CSV: the SVG hash salt is
    pinned and date metadata is suppressed, so repeated renders compare
    byte-identical.
    """
    table = read_curves(spec.input_csv)
    fig = build_figure(table, spec.methods_order, spec.labels, spec.nmse_log_scale)
    out = Path(spec.output_image)
    suffix = out.suffix.lower()
    metadata = {"Date": None} if suffix == ".svg" else {"CreationDate": None}
    try:
        with matplotlib.rc_context({"svg.hashsalt": _HASH_SALT}):
            fig.savefig(out, format=suffix[1:], metadata=metadata)
    finally:
        plt.close(fig)
    return out
