"""Symmetric quadrature rules on triangles.

Rules are stored in barycentric coordinates with weights normalised to sum
to one, so ``sum(w * f(x_q)) * area`` integrates over a physical triangle.
The orbit parameters are the Dunavant rules polished to double precision
against exact monomial moments.
"""
from itertools import permutations

import numpy as np


def _orbit_s3(w):
    return [(w, (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0))]


def _orbit_s21(w, a):
    b = 1.0 - 2.0 * a
    return [(w, (a, a, b)), (w, (a, b, a)), (w, (b, a, a))]


def _orbit_s111(w, a, b):
    c = 1.0 - a - b
    return [(w, p) for p in sorted(set(permutations((a, b, c))))]


def _pack(orbits):
    weights = np.array([w for w, _ in orbits])
    bary = np.array([p for _, p in orbits])
    return bary, weights


_RULES = {
    4: _pack(
        _orbit_s21(0.2233815896780114657, 0.44594849091596488632)
        + _orbit_s21(0.10995174365532186764, 0.09157621350977074346)
    ),
    6: _pack(
        _orbit_s21(0.11678627572637936603, 0.24928674517091042129)
        + _orbit_s21(0.050844906370206816921, 0.06308901449150222834)
        + _orbit_s111(0.082851075618373575194, 0.053145049844816947353,
                      0.31035245103378440542)
    ),
    8: _pack(
        _orbit_s3(0.14431560767778716825)
        + _orbit_s21(0.095091634267284624794, 0.45929258829272315603)
        + _orbit_s21(0.10321737053471825028, 0.17056930775176020662)
        + _orbit_s21(0.032458497623198080311, 0.050547228317030975458)
        + _orbit_s111(0.027230314174434994265, 0.0083947774099576053372,
                      0.26311282963463811342)
    ),
}


def triangle_rule(degree):
    """Return ``(bary, weights)`` exact for polynomials up to ``degree``.

    ``bary`` has shape ``(nq, 3)``; ``weights`` sums to one.
    """
    for d in sorted(_RULES):
        if d >= degree:
            bary, w = _RULES[d]
            return bary.copy(), w.copy()
    raise ValueError(f"no triangle rule of degree {degree} available")


def physical_points(vertices, triangles, bary):
    """Map barycentric points to every triangle; returns ``(nt, nq, 2)``."""
    corners = vertices[triangles]  # (nt, 3, 2)
    return np.einsum("qk,tkd->tqd", bary, corners)


def evaluate(f, pts):
    """Evaluate a scalar field ``f(x, y)`` on an array of points ``(..., 2)``.

    Constant-returning callables (``lambda x, y: 1.0``) are broadcast.
    """
    x = pts[..., 0]
    y = pts[..., 1]
    return np.broadcast_to(np.asarray(f(x, y), dtype=float), x.shape)
