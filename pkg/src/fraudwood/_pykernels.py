"""Pure numpy fallback for the compiled kernels in ``_ckernels``.

Results are bit-identical to the compiled versions: ``np.bincount`` sums
each value group in row order and ``np.cumsum`` accumulates groups
sequentially, which is exactly what the compiled loop does.
"""

import numpy as np


def find_split(codes, n_uniq, y, rows, features, total, gini):
    n = rows.shape[0]
    if n < 2:
        return (-1, -1, -1, 0.0)
    dn = float(n)
    if gini:
        phi_parent = (total * total + (dn - total) * (dn - total)) / dn
    else:
        phi_parent = total * total / dn
    y_node = y[rows]
    best = (-1, -1, -1, 0.0)
    for f in features:
        nu = int(n_uniq[f])
        if nu < 2:
            continue
        c = codes[f, rows]
        cnt = np.bincount(c, minlength=nu)
        present = np.flatnonzero(cnt)
        if present.shape[0] < 2:
            continue
        sy = np.bincount(c, weights=y_node, minlength=nu)[present]
        nl = np.cumsum(cnt[present])[:-1].astype(np.float64)
        sl = np.cumsum(sy)[:-1]
        nr = (n - np.cumsum(cnt[present])[:-1]).astype(np.float64)
        sr = total - sl
        if gini:
            phi = (sl * sl + (nl - sl) * (nl - sl)) / nl + (sr * sr + (nr - sr) * (nr - sr)) / nr
        else:
            phi = sl * sl / nl + sr * sr / nr
        gain = (phi - phi_parent) / dn
        j = int(np.argmax(gain))
        if gain[j] > best[3]:
            best = (int(f), int(present[j]), int(present[j + 1]), float(gain[j]))
    return best


def apply_tree(feature, threshold, left, right, X):
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    node = np.zeros(n, dtype=np.intp)
    active = np.flatnonzero(feature[node] >= 0)
    while active.size:
        cur = node[active]
        f = feature[cur]
        go_left = X[active, f] <= threshold[cur]
        node[active] = np.where(go_left, left[cur], right[cur])
        active = active[feature[node[active]] >= 0]
    return node
