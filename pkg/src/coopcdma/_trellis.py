"""Compiled forward-backward recursion over a binary-input trellis."""

import numpy as np
from numba import njit

NEG = -1e30
HALF_NEG = 0.5 * NEG


@njit(cache=True)
def _maxstar(a, b, max_log):
    if a > b:
        hi, lo = a, b
    else:
        hi, lo = b, a
    if max_log or hi - lo > 40.0:
        return hi
    return hi + np.log1p(np.exp(lo - hi))


@njit(cache=True)
def log_map(sys_llr, par_llr, apriori, next_state, parity, terminated, max_log):
    """A-posteriori LLRs of the input bits.

    LLRs are ``log P(bit=0) / P(bit=1)``; bit ``b`` maps to symbol ``1 - 2b``.
    The trellis starts in state 0 and, if ``terminated``, ends there too.
    """
    T = sys_llr.shape[0]
    S = next_state.shape[0]
    alpha = np.full((T + 1, S), NEG)
    beta = np.full((T + 1, S), NEG)
    gamma = np.empty((T, S, 2))

    for t in range(T):
        lu = 0.5 * (apriori[t] + sys_llr[t])
        lp = 0.5 * par_llr[t]
        for s in range(S):
            for u in range(2):
                xu = 1.0 - 2.0 * u
                xp = 1.0 - 2.0 * parity[s, u]
                gamma[t, s, u] = xu * lu + xp * lp

    alpha[0, 0] = 0.0
    for t in range(T):
        for s in range(S):
            a = alpha[t, s]
            if a < HALF_NEG:
                continue
            for u in range(2):
                ns = next_state[s, u]
                alpha[t + 1, ns] = _maxstar(alpha[t + 1, ns], a + gamma[t, s, u], max_log)
        norm = alpha[t + 1].max()
        for s in range(S):
            alpha[t + 1, s] -= norm

    if terminated:
        beta[T, 0] = 0.0
    else:
        for s in range(S):
            beta[T, s] = 0.0
    for t in range(T - 1, -1, -1):
        for s in range(S):
            acc = NEG
            for u in range(2):
                b = beta[t + 1, next_state[s, u]]
                if b > HALF_NEG:
                    acc = _maxstar(acc, gamma[t, s, u] + b, max_log)
            beta[t, s] = acc
        norm = beta[t].max()
        for s in range(S):
            beta[t, s] -= norm

    post = np.empty(T)
    for t in range(T):
        num = NEG
        den = NEG
        for s in range(S):
            a = alpha[t, s]
            if a < HALF_NEG:
                continue
            for u in range(2):
                b = beta[t + 1, next_state[s, u]]
                if b < HALF_NEG:
                    continue
                m = a + gamma[t, s, u] + b
                if u == 0:
                    num = _maxstar(num, m, max_log)
                else:
                    den = _maxstar(den, m, max_log)
        post[t] = num - den
    return post
