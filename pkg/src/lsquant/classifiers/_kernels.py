"""Compiled inner loops for the classifiers.

Pure-python callers own all validation and bookkeeping; these kernels
only crunch dense float64 arrays. Everything here is deterministic for
fixed inputs (any shuffling is precomputed by the caller).
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def logistic_prox_fit(X, z, lam, use_l1, step, max_iter, tol):
    """Accelerated proximal gradient on the mean logistic loss.

    Minimizes mean_i log(1 + exp(-z_i (x_i.w + b))) + lam * penalty(w)
    with soft-thresholding (L1) or multiplicative shrinkage (L2) as the
    proximal step; the intercept is never penalized. Momentum restarts
    whenever it points against the latest step. Returns (w, b, iters,
    converged).
    """
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    vw = np.zeros(d)
    vb = 0.0
    t_k = 1.0
    iters = 0
    converged = False
    for it in range(max_iter):
        iters = it + 1
        margins = np.dot(X, vw) + vb
        coef = np.empty(n)
        for i in range(n):
            zm = z[i] * margins[i]
            if zm > 35.0:
                p = np.exp(-zm)
            elif zm < -35.0:
                p = 1.0
            else:
                p = 1.0 / (1.0 + np.exp(zm))
            coef[i] = -z[i] * p
        gw = np.dot(coef, X) / n
        gb = coef.sum() / n

        new_w = vw - step * gw
        new_b = vb - step * gb
        if use_l1:
            thr = step * lam
            for j in range(d):
                if new_w[j] > thr:
                    new_w[j] -= thr
                elif new_w[j] < -thr:
                    new_w[j] += thr
                else:
                    new_w[j] = 0.0
        else:
            shrink = 1.0 / (1.0 + 2.0 * step * lam)
            for j in range(d):
                new_w[j] *= shrink

        step_max = abs(new_b - b)
        cross = (vb - new_b) * (new_b - b)
        for j in range(d):
            dj = new_w[j] - w[j]
            if abs(dj) > step_max:
                step_max = abs(dj)
            cross += (vw[j] - new_w[j]) * dj

        if cross > 0.0:
            t_k = 1.0
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_k * t_k))
        beta = (t_k - 1.0) / t_next
        for j in range(d):
            vw[j] = new_w[j] + beta * (new_w[j] - w[j])
        vb = new_b + beta * (new_b - b)
        t_k = t_next

        w = new_w
        b = new_b
        if step_max < tol:
            converged = True
            break
    return w, b, iters, converged


@njit(cache=True)
def sgd_hinge_fit(X, z, visit_order, alpha, l1_ratio, gamma0):
    """Per-sample hinge + elastic-net updates along a precomputed order.

    gamma_t = gamma0 / (1 + gamma0 * alpha * t) with t counting updates.
    The penalty gradient alpha*(l1_ratio*sign(w) + (1-l1_ratio)*w) applies
    on every visit; the hinge part only when z*(x.w + b) < 1. Returns
    (w, b).
    """
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    t = 0
    for k in range(visit_order.shape[0]):
        i = visit_order[k]
        gamma = gamma0 / (1.0 + gamma0 * alpha * t)
        margin = b
        for j in range(d):
            margin += X[i, j] * w[j]
        active = z[i] * margin < 1.0
        for j in range(d):
            sign = 0.0
            if w[j] > 0.0:
                sign = 1.0
            elif w[j] < 0.0:
                sign = -1.0
            g = alpha * (l1_ratio * sign + (1.0 - l1_ratio) * w[j])
            if active:
                g -= z[i] * X[i, j]
            w[j] -= gamma * g
        if active:
            b += gamma * z[i]
        t += 1
    return w, b


@njit(cache=True)
def _entropy(counts, total):
    h = 0.0
    if total <= 0.0:
        return 0.0
    for c in counts:
        if c > 0.0:
            p = c / total
            h -= p * np.log2(p)
    return h


@njit(cache=True)
def best_entropy_split(X, y_codes, feat_idx, n_classes, min_leaf):
    """Exhaustive midpoint-threshold search maximizing information gain.

    Considers every boundary between distinct sorted values of each
    candidate feature, skipping splits that would leave a child with
    fewer than min_leaf samples. Ties keep the earliest feature, then
    the lowest threshold. Returns (feature, threshold, gain); feature is
    -1 when no admissible split exists.
    """
    n = X.shape[0]
    parent = np.zeros(n_classes)
    for i in range(n):
        parent[y_codes[i]] += 1.0
    h_parent = _entropy(parent, float(n))

    best_feat = -1
    best_thr = 0.0
    best_gain = 0.0
    for fi in range(feat_idx.shape[0]):
        f = feat_idx[fi]
        col = np.empty(n)
        for i in range(n):
            col[i] = X[i, f]
        order = np.argsort(col)
        left = np.zeros(n_classes)
        n_left = 0
        for pos in range(n - 1):
            i = order[pos]
            left[y_codes[i]] += 1.0
            n_left += 1
            v_here = col[i]
            v_next = col[order[pos + 1]]
            if v_next <= v_here:
                continue
            n_right = n - n_left
            if n_left < min_leaf or n_right < min_leaf:
                continue
            right = parent - left
            h_children = (
                n_left * _entropy(left, float(n_left))
                + n_right * _entropy(right, float(n_right))
            ) / n
            gain = h_parent - h_children
            if gain > best_gain:
                best_gain = gain
                best_feat = f
                best_thr = 0.5 * (v_here + v_next)
    return best_feat, best_thr, best_gain


@njit(cache=True)
def best_weighted_stump(X, z, dist):
    """Depth-1 stump minimizing weighted misclassification.

    A stump predicts `polarity` on x[feature] <= threshold and the
    negation above it, z in {-1, +1}. Ties keep the earliest feature,
    lowest threshold, positive polarity. Returns (feature, threshold,
    polarity, error); feature is -1 when every feature is constant.
    """
    n, d = X.shape
    total_pos = 0.0
    for i in range(n):
        if z[i] > 0.0:
            total_pos += dist[i]
    total = dist.sum()
    total_neg = total - total_pos

    best_feat = -1
    best_thr = 0.0
    best_pol = 1.0
    best_err = np.inf
    for f in range(d):
        col = np.empty(n)
        for i in range(n):
            col[i] = X[i, f]
        order = np.argsort(col)
        left_pos = 0.0
        left_neg = 0.0
        for pos in range(n - 1):
            i = order[pos]
            if z[i] > 0.0:
                left_pos += dist[i]
            else:
                left_neg += dist[i]
            v_here = col[i]
            v_next = col[order[pos + 1]]
            if v_next <= v_here:
                continue
            err_plus = left_neg + (total_pos - left_pos)
            err_minus = left_pos + (total_neg - left_neg)
            if err_plus < best_err:
                best_err = err_plus
                best_feat = f
                best_thr = 0.5 * (v_here + v_next)
                best_pol = 1.0
            if err_minus < best_err:
                best_err = err_minus
                best_feat = f
                best_thr = 0.5 * (v_here + v_next)
                best_pol = -1.0
    return best_feat, best_thr, best_pol, best_err
