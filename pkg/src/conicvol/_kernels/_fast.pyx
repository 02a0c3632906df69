# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled contouring kernels: marching squares perimeter and area.

Mirrors _pure.py exactly (same case table, same saddle rule); kept as a
single pass over the squares per level, no Python objects in the loop.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

BACKEND = "ext"


def contour_measures(u, levels, double spacing):
    """Total perimeter and enclosed area of {u > t} for each level."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] grid = \
        np.ascontiguousarray(u, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] levs = \
        np.atleast_1d(np.asarray(levels, dtype=np.float64))
    cdef Py_ssize_t nl = levs.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] perims = np.empty(nl)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] areas = np.empty(nl)
    cdef double p, a
    cdef Py_ssize_t k
    for k in range(nl):
        _measures_one(grid, levs[k], &p, &a)
        perims[k] = p * spacing
        areas[k] = a * spacing * spacing
    return perims, areas


cdef inline double _hyp(double dx, double dy) nogil:
    return sqrt(dx * dx + dy * dy)


cdef void _measures_one(double[:, ::1] u, double t,
                        double* perim_out, double* area_out) nogil:
    cdef Py_ssize_t n = u.shape[0], m = u.shape[1]
    cdef Py_ssize_t i, j
    cdef double v00, v10, v01, v11
    cdef double fB, fR, fT, fL
    cdef double area = 0.0, perim = 0.0
    cdef int case
    for i in range(n - 1):
        for j in range(m - 1):
            v00 = u[i, j]
            v10 = u[i, j + 1]
            v01 = u[i + 1, j]
            v11 = u[i + 1, j + 1]
            case = 0
            if v00 > t: case += 1
            if v10 > t: case += 2
            if v11 > t: case += 4
            if v01 > t: case += 8
            if case == 0:
                continue
            if case == 15:
                area += 1.0
                continue
            if case == 1 or case == 14:
                fB = (t - v00) / (v10 - v00)
                fL = (t - v00) / (v01 - v00)
                if case == 1:
                    area += 0.5 * fB * fL
                else:
                    area += 1.0 - 0.5 * fB * fL
                perim += _hyp(fB, fL)
            elif case == 2 or case == 13:
                fB = (t - v00) / (v10 - v00)
                fR = (t - v10) / (v11 - v10)
                if case == 2:
                    area += 0.5 * (1.0 - fB) * fR
                else:
                    area += 1.0 - 0.5 * (1.0 - fB) * fR
                perim += _hyp(1.0 - fB, fR)
            elif case == 4 or case == 11:
                fR = (t - v10) / (v11 - v10)
                fT = (t - v01) / (v11 - v01)
                if case == 4:
                    area += 0.5 * (1.0 - fT) * (1.0 - fR)
                else:
                    area += 1.0 - 0.5 * (1.0 - fT) * (1.0 - fR)
                perim += _hyp(1.0 - fT, 1.0 - fR)
            elif case == 8 or case == 7:
                fT = (t - v01) / (v11 - v01)
                fL = (t - v00) / (v01 - v00)
                if case == 8:
                    area += 0.5 * fT * (1.0 - fL)
                else:
                    area += 1.0 - 0.5 * fT * (1.0 - fL)
                perim += _hyp(fT, 1.0 - fL)
            elif case == 3 or case == 12:
                fL = (t - v00) / (v01 - v00)
                fR = (t - v10) / (v11 - v10)
                if case == 3:
                    area += 0.5 * (fL + fR)
                else:
                    area += 1.0 - 0.5 * (fL + fR)
                perim += _hyp(1.0, fR - fL)
            elif case == 6 or case == 9:
                fB = (t - v00) / (v10 - v00)
                fT = (t - v01) / (v11 - v01)
                if case == 6:
                    area += 1.0 - 0.5 * (fB + fT)
                else:
                    area += 0.5 * (fB + fT)
                perim += _hyp(fT - fB, 1.0)
            else:  # saddles 5, 10
                fB = (t - v00) / (v10 - v00)
                fR = (t - v10) / (v11 - v10)
                fT = (t - v01) / (v11 - v01)
                fL = (t - v00) / (v01 - v00)
                if case == 5:
                    if v00 + v10 + v11 + v01 > 4.0 * t:
                        area += 1.0 - 0.5 * (1.0 - fB) * fR - 0.5 * fT * (1.0 - fL)
                        perim += _hyp(1.0 - fB, fR) + _hyp(fT, 1.0 - fL)
                    else:
                        area += 0.5 * fB * fL + 0.5 * (1.0 - fT) * (1.0 - fR)
                        perim += _hyp(fB, fL) + _hyp(1.0 - fT, 1.0 - fR)
                else:
                    if v00 + v10 + v11 + v01 > 4.0 * t:
                        area += 1.0 - 0.5 * fB * fL - 0.5 * (1.0 - fT) * (1.0 - fR)
                        perim += _hyp(fB, fL) + _hyp(1.0 - fT, 1.0 - fR)
                    else:
                        area += 0.5 * (1.0 - fB) * fR + 0.5 * fT * (1.0 - fL)
                        perim += _hyp(1.0 - fB, fR) + _hyp(fT, 1.0 - fL)
    perim_out[0] = perim
    area_out[0] = area
