"""Compiled inner loop for SGD training.

Mirrors the pure-Python ops in :mod:`mimlrank.training` exactly, including
the order of random draws, so both paths produce the same parameters from
the same generator state (see test_training for the cross-check).  The
generator object is shared with numpy, which keeps draws bit-identical.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, fastmath=False)
def run_sgd(
    rng,
    w0,            # (m, d); ignored when use_shared is False
    heads,         # (L + 1, K, head_dim), updated in place
    use_shared,
    X,             # all instances, row-concatenated: (N, d)
    bag_ptr,       # (n_bags + 1,)
    rel_flat,      # relevant labels per bag, sorted, concatenated
    rel_ptr,
    irr_flat,      # irrelevant real labels per bag, sorted, concatenated
    irr_ptr,
    num_labels,
    K,
    C,
    gamma0,
    eta,
    t_start,
    n_iters,
    harm,          # harmonic numbers 0..num_labels+1
    losses,        # out: sampled triplet loss per iteration, (n_iters,)
    proj,          # scratch: (max bag size, head_dim)
):
    n_bags = bag_ptr.shape[0] - 1
    dummy = num_labels
    mdim = heads.shape[2]
    d = X.shape[1]
    csq = C * C

    for s in range(n_iters):
        t = t_start + s
        losses[s] = 0.0

        b = rng.integers(0, n_bags)
        i0 = bag_ptr[b]
        z = bag_ptr[b + 1] - i0
        r0 = rel_ptr[b]
        nrel = rel_ptr[b + 1] - r0
        c = rng.integers(0, nrel + 1)
        y = rel_flat[r0 + c] if c < nrel else dummy

        q0 = irr_ptr[b]
        nirr = irr_ptr[b + 1] - q0
        npool = nirr if y == dummy else nirr + 1
        if npool == 0:
            continue

        if use_shared:
            for i in range(z):
                for a in range(mdim):
                    acc = 0.0
                    for j in range(d):
                        acc += w0[a, j] * X[i0 + i, j]
                    proj[i, a] = acc
        else:
            for i in range(z):
                for a in range(mdim):
                    proj[i, a] = X[i0 + i, a]

        # key instance and sub-concept for y (first maximum wins)
        f_y = -np.inf
        ki = 0
        kk = 0
        for i in range(z):
            for k in range(K):
                acc = 0.0
                for a in range(mdim):
                    acc += heads[y, k, a] * proj[i, a]
                if acc > f_y:
                    f_y = acc
                    ki = i
                    kk = k

        for attempt in range(1, npool + 1):
            jdraw = rng.integers(0, npool)
            yb = irr_flat[q0 + jdraw] if jdraw < nirr else dummy
            f_b = -np.inf
            kib = 0
            kkb = 0
            for i in range(z):
                for k in range(K):
                    acc = 0.0
                    for a in range(mdim):
                        acc += heads[yb, k, a] * proj[i, a]
                    if acc > f_b:
                        f_b = acc
                        kib = i
                        kkb = k
            if f_b > f_y - 1.0:
                sw = harm[npool // attempt]
                losses[s] = sw * (1.0 + f_b - f_y)
                g = sw * gamma0 / (1.0 + eta * gamma0 * t)
                # shared projection first: it reads the pre-step heads, and
                # the later head updates read proj, built from the pre-step w0
                if use_shared:
                    for a in range(mdim):
                        wy = heads[y, kk, a]
                        wb = heads[yb, kkb, a]
                        for j in range(d):
                            w0[a, j] -= g * (wb * X[i0 + kib, j] - wy * X[i0 + ki, j])
                for a in range(mdim):
                    heads[y, kk, a] += g * proj[ki, a]
                    heads[yb, kkb, a] -= g * proj[kib, a]
                ss = 0.0
                for a in range(mdim):
                    ss += heads[y, kk, a] * heads[y, kk, a]
                if ss > csq:
                    scale = C / np.sqrt(ss)
                    for a in range(mdim):
                        heads[y, kk, a] *= scale
                ss = 0.0
                for a in range(mdim):
                    ss += heads[yb, kkb, a] * heads[yb, kkb, a]
                if ss > csq:
                    scale = C / np.sqrt(ss)
                    for a in range(mdim):
                        heads[yb, kkb, a] *= scale
                if use_shared:
                    for j in range(d):
                        ss = 0.0
                        for a in range(mdim):
                            ss += w0[a, j] * w0[a, j]
                        if ss > csq:
                            scale = C / np.sqrt(ss)
                            for a in range(mdim):
                                w0[a, j] *= scale
                break
