"""Compiled SGD inner loops.

Two serial kernels share one update recipe: per visited entry, the four
gradients are computed from pre-update parameter values, then applied with
AdaGrad scaling in the order target vector, target bias, context vector,
context bias. The joint kernel adds the lexicon pull term; the plain kernel
contains no regularizer code at all, so a zero-coefficient joint run and a
plain run must agree bit for bit.

Both kernels release the GIL, so parallel training can run them from
plain Python threads over disjoint slices of the visit order, writing to
the shared parameter arrays without locking.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def sgd_epoch_plain(W, Wt, b, bt, GW, GWt, Gb, Gbt, ii, jj, fx, logx, order, lr, eps):
    d = W.shape[1]
    gwi = np.empty(d)
    gwj = np.empty(d)
    for t in range(order.shape[0]):
        k = order[t]
        i = ii[k]
        j = jj[k]
        r = b[i] + bt[j] - logx[k]
        for a in range(d):
            r += W[i, a] * Wt[j, a]
        c = fx[k] * r
        for a in range(d):
            gwi[a] = c * Wt[j, a]
            gwj[a] = c * W[i, a]
        for a in range(d):
            g = gwi[a]
            GW[i, a] += g * g
            W[i, a] -= lr * g / (np.sqrt(GW[i, a]) + eps)
        Gb[i] += c * c
        b[i] -= lr * c / (np.sqrt(Gb[i]) + eps)
        for a in range(d):
            g = gwj[a]
            GWt[j, a] += g * g
            Wt[j, a] -= lr * g / (np.sqrt(GWt[j, a]) + eps)
        Gbt[j] += c * c
        bt[j] -= lr * c / (np.sqrt(Gbt[j]) + eps)


@njit(cache=True, nogil=True)
def sgd_epoch_joint(
    W, Wt, b, bt, GW, GWt, Gb, Gbt, ii, jj, fx, logx, has_cooc, has_rel, order, lam, lr, eps
):
    d = W.shape[1]
    gwi = np.empty(d)
    gwj = np.empty(d)
    for t in range(order.shape[0]):
        k = order[t]
        i = ii[k]
        j = jj[k]
        c = 0.0
        if has_cooc[k]:
            r = b[i] + bt[j] - logx[k]
            for a in range(d):
                r += W[i, a] * Wt[j, a]
            c = fx[k] * r
        if has_rel[k] and lam != 0.0:
            for a in range(d):
                diff = W[i, a] - Wt[j, a]
                gwi[a] = c * Wt[j, a] + lam * diff
                gwj[a] = c * W[i, a] - lam * diff
        else:
            for a in range(d):
                gwi[a] = c * Wt[j, a]
                gwj[a] = c * W[i, a]
        for a in range(d):
            g = gwi[a]
            GW[i, a] += g * g
            W[i, a] -= lr * g / (np.sqrt(GW[i, a]) + eps)
        Gb[i] += c * c
        b[i] -= lr * c / (np.sqrt(Gb[i]) + eps)
        for a in range(d):
            g = gwj[a]
            GWt[j, a] += g * g
            Wt[j, a] -= lr * g / (np.sqrt(GWt[j, a]) + eps)
        Gbt[j] += c * c
        bt[j] -= lr * c / (np.sqrt(Gbt[j]) + eps)


