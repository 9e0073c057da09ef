"""Static SVG figure of the sweep: median k_hat against r, one series per n - r."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.ticker import MaxNLocator  # noqa: E402

from .errors import ResultsIOError  # noqa: E402
from .experiments import median_k_hat, read_results  # noqa: E402

MARKERS = "osD^v<>ph*"


def series_by_offset(rows) -> dict:
    """{offset: ([r...], [median k_hat...])} sorted by r."""
    out: dict = {}
    for (r, n), k in median_k_hat(rows).items():
        xs, ys = out.setdefault(n - r, ([], []))
        xs.append(r)
        ys.append(k)
    return dict(sorted(out.items()))


def emit_plot(results, out) -> Path:
    """Render the sweep in ``results`` (CSV) to a self-contained SVG at ``out``."""
    rows = read_results(results)
    out = Path(out)
    series = series_by_offset(rows)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.axhline(1.0, color="0.5", lw=1, ls="--", label="_reference", gid="reference")
    for i, (off, (xs, ys)) in enumerate(series.items()):
        ax.plot(xs, ys, marker=MARKERS[i % len(MARKERS)], lw=1, label=f"n = r + {off}",
                gid=f"series-{off}")
    ax.xaxis.set_major_locator(MaxNLocator(integer=True))
    ax.set_xlabel("r")
    ax.set_ylabel(r"$\hat{K}_r$")
    if series:
        ax.legend(loc="best", frameon=False)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    try:
        # fixed hash salt and no date keep the SVG byte-stable across runs
        with plt.rc_context({"svg.hashsalt": "pmproc", "svg.fonttype": "none"}):
            fig.savefig(out, format="svg", metadata={"Date": None})
    except OSError as exc:
        raise ResultsIOError(f"cannot write plot {out}: {exc}") from exc
    finally:
        plt.close(fig)
    return out
