# distutils: language = c++
# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled split search and tree routing.

Arithmetic mirrors ``_pykernels`` operation for operation so both backends
grow bit-identical trees: per-value-group sums are accumulated in row
order, groups are accumulated in ascending value order, and gains use the
same closed form.
"""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free, calloc
from libcpp.algorithm cimport sort as std_sort

cnp.import_array()

ctypedef cnp.intp_t intp


def find_split(const int[:, ::1] codes, const intp[::1] n_uniq, const double[::1] y,
               const intp[::1] rows, const intp[::1] features, double total, bint gini):
    """Best (feature, left code, right code, gain) over ``features``.

    ``codes[f, i]`` is the dense rank of row ``i``'s value in feature ``f``.
    Returns feature -1 when no split has positive gain.
    """
    cdef Py_ssize_t n = rows.shape[0]
    cdef Py_ssize_t nf = features.shape[0]
    cdef Py_ssize_t fi, i, j, nu, max_u = 0, ntouch, r
    cdef intp f, c, best_f = -1, best_cl = -1, best_cr = -1
    cdef double best_gain = 0.0, gain, phi, phi_parent, sl, sr, nl_d, nr_d, dn
    cdef intp nl
    cdef intp* cnt
    cdef double* sy
    cdef int* touched
    cdef double log_cost

    if n < 2:
        return (-1, -1, -1, 0.0)
    for fi in range(nf):
        if n_uniq[features[fi]] > max_u:
            max_u = n_uniq[features[fi]]
    if max_u < 2:
        return (-1, -1, -1, 0.0)

    dn = <double>n
    if gini:
        phi_parent = (total * total + (dn - total) * (dn - total)) / dn
    else:
        phi_parent = total * total / dn

    cnt = <intp*>calloc(max_u, sizeof(intp))
    sy = <double*>calloc(max_u, sizeof(double))
    touched = <int*>malloc(max_u * sizeof(int))
    if cnt == NULL or sy == NULL or touched == NULL:
        free(cnt); free(sy); free(touched)
        raise MemoryError()
    try:
        with nogil:
            for fi in range(nf):
                f = features[fi]
                nu = n_uniq[f]
                if nu < 2:
                    continue
                ntouch = 0
                for i in range(n):
                    r = rows[i]
                    c = codes[f, r]
                    if cnt[c] == 0:
                        touched[ntouch] = <int>c
                        ntouch += 1
                    cnt[c] += 1
                    sy[c] += y[r]
                if ntouch >= 2:
                    # Sort the present ranks when that beats walking all of them.
                    log_cost = 1.0
                    j = ntouch
                    while j > 1:
                        j >>= 1
                        log_cost += 1.0
                    if ntouch * log_cost < nu:
                        std_sort(touched, touched + ntouch)
                    else:
                        j = 0
                        for c in range(nu):
                            if cnt[c] != 0:
                                touched[j] = <int>c
                                j += 1
                    nl = 0
                    sl = 0.0
                    for j in range(ntouch - 1):
                        c = touched[j]
                        nl += cnt[c]
                        sl += sy[c]
                        nl_d = <double>nl
                        nr_d = <double>(n - nl)
                        sr = total - sl
                        if gini:
                            phi = ((sl * sl + (nl_d - sl) * (nl_d - sl)) / nl_d
                                   + (sr * sr + (nr_d - sr) * (nr_d - sr)) / nr_d)
                        else:
                            phi = sl * sl / nl_d + sr * sr / nr_d
                        gain = (phi - phi_parent) / dn
                        if gain > best_gain:
                            best_gain = gain
                            best_f = f
                            best_cl = c
                            best_cr = touched[j + 1]
                for j in range(ntouch):
                    c = touched[j]
                    cnt[c] = 0
                    sy[c] = 0.0
    finally:
        free(cnt)
        free(sy)
        free(touched)
    return (best_f, best_cl, best_cr, best_gain)


def apply_tree(const intp[::1] feature, const double[::1] threshold,
               const intp[::1] left, const intp[::1] right, const double[:, :] X):
    """Leaf index reached by every row of ``X`` (``<= threshold`` goes left)."""
    cdef Py_ssize_t n = X.shape[0], i
    cdef intp node
    out = np.empty(n, dtype=np.intp)
    cdef intp[::1] leaf = out
    with nogil:
        for i in range(n):
            node = 0
            while feature[node] >= 0:
                if X[i, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            leaf[i] = node
    return out
