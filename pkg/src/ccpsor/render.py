"""Static SVG stills of a pursuit trace, one file per world step."""
from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence
from xml.sax.saxutils import escape

CELL = 16
MARGIN = 8
PREDATOR_COLOR = "#1f5fbf"
PREY_COLOR = "#d62728"


def _cell_origin(x: int, y: int, height: int) -> tuple[int, int]:
    # north is +y in the world, so flip rows for screen space
    return MARGIN + x * CELL, MARGIN + (height - 1 - y) * CELL


def frame_svg(snap: dict, width: int = 30, height: int = 30) -> str:
    """SVG document for one trace snapshot."""
    w_px = 2 * MARGIN + width * CELL
    h_px = 2 * MARGIN + height * CELL
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w_px}" height="{h_px}" '
        f'viewBox="0 0 {w_px} {h_px}">',
        f'<rect x="0" y="0" width="{w_px}" height="{h_px}" fill="white"/>',
        '<g stroke="#cccccc" stroke-width="1">',
    ]
    for i in range(width + 1):
        x = MARGIN + i * CELL
        out.append(f'<line x1="{x}" y1="{MARGIN}" x2="{x}" y2="{MARGIN + height * CELL}"/>')
    for j in range(height + 1):
        y = MARGIN + j * CELL
        out.append(f'<line x1="{MARGIN}" y1="{y}" x2="{MARGIN + width * CELL}" y2="{y}"/>')
    out.append("</g>")

    px, py = snap["prey"]
    cx, cy = _cell_origin(px, py, height)
    r = CELL // 2
    out.append(
        f'<circle class="prey" cx="{cx + r}" cy="{cy + r}" r="{r - 2}" fill="{PREY_COLOR}"/>'
    )
    for k, (x, y) in enumerate(snap["predators"]):
        ox, oy = _cell_origin(x, y, height)
        out.append(
            f'<rect class="predator" x="{ox + 2}" y="{oy + 2}" width="{CELL - 4}" '
            f'height="{CELL - 4}" fill="{PREDATOR_COLOR}"><title>predator {k}</title></rect>'
        )
    label = escape(f"step {snap['step']}")
    out.append(f'<text x="{MARGIN}" y="{MARGIN - 1}" font-size="8" font-family="monospace">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_svg(trace: Sequence[dict] | Iterable[dict], out_dir, width: int = 30, height: int = 30) -> list[Path]:
    """Write ``frame_00000.svg`` ... into ``out_dir``; returns the paths written."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create frame directory {out_dir}: {e}") from e
    paths = []
    for snap in trace:
        p = out_dir / f"frame_{int(snap['step']):05d}.svg"
        try:
            p.write_text(frame_svg(snap, width, height))
        except OSError as e:
            raise OSError(f"cannot write frame {p}: {e}") from e
        paths.append(p)
    return paths
