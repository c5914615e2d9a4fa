"""Poincaré-disk SVG snapshots of a configuration.

Purely cosmetic: heptagons are placed by reflecting the central cell across
shared edges and drawn with straight sides.
"""
from __future__ import annotations

import cmath
import math
from collections import deque
from functools import lru_cache

from .engine import Configuration
from .heptagrid import CENTER, AdjacencyDisk, CellAddress

SIDES = 7
# Euclidean radius of the central heptagon's vertices in the disk model of {7,3}
_VERTEX_RADIUS = math.tanh(math.acosh(1 / (math.tan(math.pi / 7) * math.tan(math.pi / 3))) / 2)


def _reflect(z: complex, a: complex, b: complex) -> complex:
    """Reflect ``z`` in the hyperbolic line through ``a`` and ``b``."""
    def to0(w):
        return (w - a) / (1 - a.conjugate() * w)

    def from0(w):
        return (w + a) / (1 + a.conjugate() * w)

    u = to0(b)
    u /= abs(u)
    return from0(u * u * to0(z).conjugate())


@lru_cache(maxsize=4)
def cell_polygons(disk: AdjacencyDisk, max_ring: int | None = None) -> dict[CellAddress, tuple[complex, ...]]:
    """Vertices of every cell; edge ``j`` joins vertices ``j`` and ``j+1`` and faces neighbour ``j``."""
    limit = disk.radius if max_ring is None else max_ring
    verts = tuple(
        cmath.rect(_VERTEX_RADIUS, 2 * math.pi * j / SIDES - math.pi / SIDES) for j in range(SIDES)
    )
    polys = {CENTER: verts}
    queue = deque([CENTER])
    while queue:
        x = queue.popleft()
        if not disk.is_interior(x):
            continue
        px = polys[x]
        for j, n in enumerate(disk.neighbors(x)):
            if n in polys or n.ring > limit:
                continue
            a, b = px[j], px[(j + 1) % SIDES]
            mirrored = [_reflect(z, a, b) for z in px]
            # the reflection reverses orientation: restore counter-clockwise order,
            # then rotate so that the shared edge sits at n's own side towards x
            rev = mirrored[::-1]
            k = disk.side_of(n, x) if disk.is_interior(n) else None
            if k is None:
                polys[n] = tuple(rev)
            else:
                # in rev, the shared edge runs from the image of b to the image of a
                start = rev.index(mirrored[(j + 1) % SIDES])
                polys[n] = tuple(rev[(start - k + i) % SIDES] for i in range(SIDES))
            queue.append(n)
    return polys


def snapshot_svg(config: Configuration, size: int = 600, title: str | None = None) -> str:
    polys = cell_polygons(config.disk)
    half = size / 2

    def pt(z: complex) -> str:
        return f"{half + z.real * half * 0.98:.2f},{half - z.imag * half * 0.98:.2f}"

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<circle cx="{half}" cy="{half}" r="{half * 0.98:.2f}" fill="#eeeeee" stroke="#888888"/>',
    ]
    if title:
        out.append(f"<title>{title}</title>")
    for c in sorted(config.active):
        poly = polys.get(c)
        if poly is None:
            continue
        fill = "#000000" if c in config.states else "#ffffff"
        points = " ".join(pt(z) for z in poly)
        out.append(f'<polygon points="{points}" fill="{fill}" stroke="#777777" stroke-width="0.5"><title>{c}</title></polygon>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
