"""Deterministic text output: 17-digit JSON/CSV writers and a bare SVG line plot."""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def fmt(x: float) -> str:
    return "%.17g" % x


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return fmt(x) if math.isfinite(x) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float written as %.17g (non-finite values become null)."""
    return _encode(obj, indent, 0) + "\n"


def write_json(path: str | Path, obj) -> None:
    Path(path).write_text(dumps(obj))


def read_json(path: str | Path):
    return json.loads(Path(path).read_text())


def update_json(path: str | Path, updates: dict) -> dict:
    """Merge ``updates`` into the JSON object stored at ``path`` (created if absent)."""
    path = Path(path)
    data = read_json(path) if path.exists() else {}
    data.update(updates)
    write_json(path, data)
    return data


def write_csv(path: str | Path, header: Sequence[str], columns: Iterable) -> None:
    cols = [np.asarray(c, dtype=float).ravel() for c in columns]
    data = np.column_stack(cols) if cols else np.empty((0, len(header)))
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header=",".join(header), comments="")


def read_csv(path: str | Path) -> dict[str, np.ndarray]:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {name: data[:, i] for i, name in enumerate(header)}


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def line_plot_svg(
    path: str | Path,
    series: dict[str, tuple],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    logx: bool = False,
    logy: bool = True,
    width: int = 640,
    height: int = 420,
) -> None:
    """Write a standalone SVG with one polyline per named (x, y) series."""
    margin = 60
    prepared = {}
    for name, (x, y) in series.items():
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        keep = np.isfinite(x) & np.isfinite(y)
        if logx:
            keep &= x > 0
        if logy:
            keep &= y > 0
        x, y = x[keep], y[keep]
        if len(x):
            prepared[name] = (np.log10(x) if logx else x, np.log10(y) if logy else y)
    if prepared:
        xs = np.concatenate([p[0] for p in prepared.values()])
        ys = np.concatenate([p[1] for p in prepared.values()])
        x0, x1, y0, y1 = xs.min(), xs.max(), ys.min(), ys.max()
    else:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def sx(v):
        return margin + (v - x0) / (x1 - x0) * (width - 2 * margin)

    def sy(v):
        return height - margin - (v - y0) / (y1 - y0) * (height - 2 * margin)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" height="{height - 2 * margin}" '
        'fill="none" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{margin / 2:.1f}" text-anchor="middle" font-size="14">{_esc(title)}</text>',
        f'<text x="{width / 2:.1f}" y="{height - 15}" text-anchor="middle">{_esc(xlabel)}</text>',
        f'<text x="15" y="{height / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 15 {height / 2:.1f})">{_esc(ylabel)}</text>',
    ]
    for k in range(5):
        xv = x0 + k * (x1 - x0) / 4
        yv = y0 + k * (y1 - y0) / 4
        xl = f"1e{xv:.2g}" if logx else f"{xv:.3g}"
        yl = f"1e{yv:.2g}" if logy else f"{yv:.3g}"
        out.append(f'<text x="{sx(xv):.1f}" y="{height - margin + 16}" text-anchor="middle">{xl}</text>')
        out.append(f'<text x="{margin - 6}" y="{sy(yv) + 4:.1f}" text-anchor="end">{yl}</text>')
    for idx, (name, (x, y)) in enumerate(prepared.items()):
        color = _COLORS[idx % len(_COLORS)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        out.append(
            f'<text x="{width - margin - 4}" y="{margin + 16 + 14 * idx}" text-anchor="end" '
            f'fill="{color}">{_esc(name)}</text>'
        )
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
