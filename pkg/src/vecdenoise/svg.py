"""SVG 1.1 serialization of a vector scene, plus a reader for its own output."""
from __future__ import annotations

import re
import xml.etree.ElementTree as ET

import numpy as np

from .vector_paths import ClosedBezierPath, VectorScene

SVG_NS = "http://www.w3.org/2000/svg"
_NUM = re.compile(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?")


def _fmt(v: float) -> str:
    s = f"{v:.3f}"
    return "0.000" if s == "-0.000" else s


def hex_color(rgb) -> str:
    vals = np.round(np.clip(np.asarray(rgb, dtype=np.float64), 0.0, 1.0) * 255.0).astype(int)
    return "#{:02x}{:02x}{:02x}".format(*vals)


def path_data(path: ClosedBezierPath) -> str:
    segs = path.segment_arrays()
    parts = [f"M {_fmt(segs[0, 0, 0])} {_fmt(segs[0, 0, 1])}"]
    for seg in segs:
        coords = " ".join(f"{_fmt(x)} {_fmt(y)}" for x, y in seg[1:])
        parts.append(f"C {coords}")
    parts.append("Z")
    return " ".join(parts)


def export_svg(scene: VectorScene, width: int, height: int) -> str:
    """Background rect followed by one ``<path>`` per scene path, in paint order."""
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="{SVG_NS}" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'  <rect x="0" y="0" width="{width}" height="{height}" '
        f'fill="{hex_color(scene.background_color)}"/>',
    ]
    for path in scene.paths:
        lines.append(
            f'  <path d="{path_data(path)}" fill="{hex_color(path.fill_color)}" '
            'fill-rule="evenodd"/>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def parse_path_data(d: str) -> np.ndarray:
    """Segments ``(k, 4, 2)`` of a ``M ... C ... Z`` string as written by :func:`path_data`."""
    tokens = re.findall(r"[MCZmcz]|" + _NUM.pattern, d)
    segs = []
    current = None
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok == "M":
            current = np.array([float(tokens[i + 1]), float(tokens[i + 2])])
            i += 3
        elif tok == "C":
            i += 1
            while i + 6 <= len(tokens) and _NUM.fullmatch(tokens[i]):
                vals = np.array([float(t) for t in tokens[i : i + 6]]).reshape(3, 2)
                segs.append(np.vstack([current, vals]))
                current = vals[2]
                i += 6
        elif tok in ("Z", "z"):
            i += 1
        else:
            raise ValueError(f"unsupported path token {tok!r}")
    return np.array(segs)


def read_svg_paths(text: str) -> list[tuple[np.ndarray, str]]:
    """``(segments, fill)`` for every ``<path>`` in document order."""
    root = ET.fromstring(text)
    return [
        (parse_path_data(el.get("d", "")), el.get("fill", ""))
        for el in root.iter(f"{{{SVG_NS}}}path")
    ]
