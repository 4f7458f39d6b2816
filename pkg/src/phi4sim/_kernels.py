"""Compiled lattice-sum kernels (hot loops behind the oracle module).

All kernels take integer coordinate arrays plus precomputed lookup tables and
write one partial result per outer index, so the final reduction order is
fixed and results are bit-reproducible regardless of thread count.
"""

from __future__ import annotations

import os

os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

import numpy as np
from numba import njit, prange

FOUR_PI_SQ = 4.0 * np.pi**2


@njit(cache=True, inline="always")
def _w2(q: np.int64) -> np.float64:
    return 1.0 + FOUR_PI_SQ * q


@njit(cache=True, parallel=True)
def tree_moment_kernel(reps, coords, n, member_flat, strides, a_vals, dt, out):
    """Second moment of the heat-integrated Wick cube at each rep frequency.

    out[i] = 6 * sum_{w1, w2 in L, w3 = rep_i - w1 - w2 in L}
             prod_j 1/(2<w_j>^2) * F(<rep_i>^2, sum_j <w_j>^2).

    With dt = 0, F(a, b) = 1/(a (a + b)) is the continuum double heat-time
    integral; with dt > 0 it is the exact second-moment kernel of the
    zero-order-hold integrator on a step-dt grid,
    F_dt(a, b) = G^2 (1 + xy) / ((1 - x^2)(1 - xy)) with x = e^{-a dt},
    y = e^{-b dt}, G = (1 - x)/a.
    """
    nrep = reps.shape[0]
    ncrd = coords.shape[0]
    d = coords.shape[1]
    for i in prange(nrep):
        a = a_vals[i]
        x = np.exp(-a * dt)
        gain2 = ((1.0 - x) / a) ** 2
        acc = 0.0
        for j1 in range(ncrd):
            q1 = np.int64(0)
            for k in range(d):
                q1 += coords[j1, k] * coords[j1, k]
            w21 = _w2(q1)
            for j2 in range(ncrd):
                q2 = np.int64(0)
                flat = np.int64(0)
                inside = True
                q3 = np.int64(0)
                for k in range(d):
                    q2 += coords[j2, k] * coords[j2, k]
                    c3 = reps[i, k] - coords[j1, k] - coords[j2, k]
                    if c3 < -n or c3 > n:
                        inside = False
                        break
                    q3 += c3 * c3
                    flat += (c3 + n) * strides[k]
                if not inside or not member_flat[flat]:
                    continue
                w22 = _w2(q2)
                w23 = _w2(q3)
                b = w21 + w22 + w23
                if dt > 0.0:
                    xy = x * np.exp(-b * dt)
                    factor = gain2 * (1.0 + xy) / ((1.0 - x * x) * (1.0 - xy))
                else:
                    factor = 1.0 / (a * (a + b))
                acc += factor / (8.0 * w21 * w22 * w23)
        out[i] = 6.0 * acc


@njit(cache=True, parallel=True)
def cprime_kernel(reps, weights, coords, n, norm_is_max, restrict_nu,
                  rho_table, out):
    """Partial sums of the logarithmically divergent renormalization constant.

    out[i] = weights[i] * sum_{w2 in L} rho(|w1+w2|^2)
             / (<w1>^2 <w2>^2 (<w1>^2 + <w2>^2 + <w1+w2>^2)),
    restricted to w1 + w2 in the lattice when restrict_nu is set; the caller
    sums out and divides by 4.
    """
    nrep = reps.shape[0]
    ncrd = coords.shape[0]
    d = coords.shape[1]
    n2 = n * n
    for i in prange(nrep):
        q1 = np.int64(0)
        for k in range(d):
            q1 += reps[i, k] * reps[i, k]
        w21 = _w2(q1)
        acc = 0.0
        for j in range(ncrd):
            q2 = np.int64(0)
            qv = np.int64(0)
            ok = True
            for k in range(d):
                c2 = coords[j, k]
                q2 += c2 * c2
                cv = reps[i, k] + c2
                qv += cv * cv
                if restrict_nu and norm_is_max and (cv < -n or cv > n):
                    ok = False
                    break
            if not ok:
                continue
            if restrict_nu and not norm_is_max and qv > n2:
                continue
            w22 = _w2(q2)
            w2v = _w2(qv)
            rho = rho_table[qv] if qv < rho_table.shape[0] else 0.0
            acc += rho / (w21 * w22 * (w21 + w22 + w2v))
        out[i] = weights[i] * acc


@njit(cache=True, parallel=True)
def convolution_kernel(targets, coords, n, member_flat, strides,
                       alpha, beta, weight_table, use_weight, out):
    """out[i] = sum_{w1 + w2 = targets[i], both in L} <w1>^-alpha <w2>^-beta.

    weight_table[q1, q2] multiplies each term when use_weight is set (the
    comparable-scale weight evaluated on integer squared radii).
    """
    ntar = targets.shape[0]
    ncrd = coords.shape[0]
    d = coords.shape[1]
    for i in prange(ntar):
        acc = 0.0
        for j in range(ncrd):
            q1 = np.int64(0)
            q2 = np.int64(0)
            flat = np.int64(0)
            inside = True
            for k in range(d):
                c1 = coords[j, k]
                q1 += c1 * c1
                c2 = targets[i, k] - c1
                if c2 < -n or c2 > n:
                    inside = False
                    break
                q2 += c2 * c2
                flat += (c2 + n) * strides[k]
            if not inside or not member_flat[flat]:
                continue
            term = _w2(q1) ** (-0.5 * alpha) * _w2(q2) ** (-0.5 * beta)
            if use_weight:
                term *= weight_table[q1, q2]
            acc += term
        out[i] = acc
