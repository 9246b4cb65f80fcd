"""Report writers: atomic CSV/JSON output and the companion figures.

CSV files are RFC-4180 with '.' decimal separator, 17 significant digits
and a leading `# schema=1` comment line; figures are rendered with the
Agg backend next to the delimited output.
"""

from __future__ import annotations

import json
import os
import tempfile

SCHEMA_LINE = "# schema=1"


def _format_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    if v is None:
        return ""
    s = str(v)
    if any(c in s for c in ',"\r\n'):
        s = '"' + s.replace('"', '""') + '"'
    return s


def atomic_write_text(path: str, text: str) -> None:
    """Write via a temp file in the target directory plus rename."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, header, rows) -> None:
    lines = [SCHEMA_LINE, ",".join(header)]
    for row in rows:
        lines.append(",".join(_format_cell(v) for v in row))
    atomic_write_text(path, "\r\n".join(lines) + "\r\n")


def write_json(path: str, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def figure_path(output_path: str) -> str:
    stem, _ = os.path.splitext(output_path)
    return stem + ".png"


def render_figure(path: str, draw) -> None:
    """Render one figure to ``path``; ``draw(ax)`` fills a single axes."""
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.2), dpi=130)
    draw(ax)
    fig.tight_layout()
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".png")
    os.close(fd)
    try:
        fig.savefig(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    finally:
        plt.close(fig)
