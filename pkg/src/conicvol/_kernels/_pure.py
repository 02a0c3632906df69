"""NumPy fallback for the contouring kernels.

Marching squares on a cell-centered field: linear interpolation along cell
edges, polyline perimeter, polygonal sub-cell areas, saddle cells decided
by the cell-average.  Same case table as the compiled version.
"""

import numpy as np

BACKEND = "pure"


def _hyp(dx, dy):
    return np.hypot(dx, dy)


def contour_measures(u, levels, spacing):
    """Total perimeter and enclosed area of {u > t} for each level.

    ``u`` is an (N, M) float64 field sampled on a uniform grid with the
    given spacing; the contour is taken on the (N-1) x (M-1) squares
    between samples.  Returns (perimeters, areas) arrays.
    """
    u = np.ascontiguousarray(u, dtype=np.float64)
    levels = np.atleast_1d(np.asarray(levels, dtype=np.float64))
    v00 = u[:-1, :-1].ravel()
    v10 = u[:-1, 1:].ravel()
    v01 = u[1:, :-1].ravel()
    v11 = u[1:, 1:].ravel()
    perims = np.empty(len(levels))
    areas = np.empty(len(levels))
    for k, t in enumerate(levels):
        p, a = _measures_one(v00, v10, v11, v01, float(t))
        perims[k] = p * spacing
        areas[k] = a * spacing * spacing
    return perims, areas


def _measures_one(v00, v10, v11, v01, t):
    case = ((v00 > t).astype(np.uint8)
            + ((v10 > t).astype(np.uint8) << 1)
            + ((v11 > t).astype(np.uint8) << 2)
            + ((v01 > t).astype(np.uint8) << 3))
    area = float(np.count_nonzero(case == 15))
    perim = 0.0

    def frac(idx, va, vb):
        return (t - va[idx]) / (vb[idx] - va[idx])

    for c in range(1, 15):
        idx = np.flatnonzero(case == c)
        if idx.size == 0:
            continue
        if c in (1, 14):  # corner P00 (or its complement)
            fB = frac(idx, v00, v10)
            fL = frac(idx, v00, v01)
            tri = 0.5 * fB * fL
            area += float(np.sum(tri if c == 1 else 1.0 - tri))
            perim += float(np.sum(_hyp(fB, fL)))
        elif c in (2, 13):  # corner P10
            fB = frac(idx, v00, v10)
            fR = frac(idx, v10, v11)
            tri = 0.5 * (1.0 - fB) * fR
            area += float(np.sum(tri if c == 2 else 1.0 - tri))
            perim += float(np.sum(_hyp(1.0 - fB, fR)))
        elif c in (4, 11):  # corner P11
            fR = frac(idx, v10, v11)
            fT = frac(idx, v01, v11)
            tri = 0.5 * (1.0 - fT) * (1.0 - fR)
            area += float(np.sum(tri if c == 4 else 1.0 - tri))
            perim += float(np.sum(_hyp(1.0 - fT, 1.0 - fR)))
        elif c in (8, 7):  # corner P01
            fT = frac(idx, v01, v11)
            fL = frac(idx, v00, v01)
            tri = 0.5 * fT * (1.0 - fL)
            area += float(np.sum(tri if c == 8 else 1.0 - tri))
            perim += float(np.sum(_hyp(fT, 1.0 - fL)))
        elif c in (3, 12):  # bottom band / top band
            fL = frac(idx, v00, v01)
            fR = frac(idx, v10, v11)
            band = 0.5 * (fL + fR)
            area += float(np.sum(band if c == 3 else 1.0 - band))
            perim += float(np.sum(_hyp(1.0, fR - fL)))
        elif c in (6, 9):  # right band / left band
            fB = frac(idx, v00, v10)
            fT = frac(idx, v01, v11)
            band = 0.5 * (fB + fT)
            area += float(np.sum(1.0 - band if c == 6 else band))
            perim += float(np.sum(_hyp(fT - fB, 1.0)))
        else:  # saddles 5, 10
            fB = frac(idx, v00, v10)
            fR = frac(idx, v10, v11)
            fT = frac(idx, v01, v11)
            fL = frac(idx, v00, v01)
            center_in = (v00[idx] + v10[idx] + v11[idx] + v01[idx]) > 4.0 * t
            tri00 = 0.5 * fB * fL
            tri11 = 0.5 * (1.0 - fT) * (1.0 - fR)
            tri10 = 0.5 * (1.0 - fB) * fR
            tri01 = 0.5 * fT * (1.0 - fL)
            chords_00_11 = _hyp(fB, fL) + _hyp(1.0 - fT, 1.0 - fR)
            chords_10_01 = _hyp(1.0 - fB, fR) + _hyp(fT, 1.0 - fL)
            if c == 5:
                a_cell = np.where(center_in, 1.0 - tri10 - tri01, tri00 + tri11)
                p_cell = np.where(center_in, chords_10_01, chords_00_11)
            else:
                a_cell = np.where(center_in, 1.0 - tri00 - tri11, tri10 + tri01)
                p_cell = np.where(center_in, chords_00_11, chords_10_01)
            area += float(np.sum(a_cell))
            perim += float(np.sum(p_cell))
    return perim, area
