"""Independent reference implementations shared by the codec tests."""

import itertools

import numpy as np
from scipy.special import logsumexp

from coopcdma.turbo import bits_to_symbols

# (7, 5) octal code written out by hand: state (a1, a2) -> {u: (next, parity)}
# with a = u ^ a1 ^ a2, parity = a ^ a2, next = (a, a1).
HAND_TABLE = {
    (0, 0): {0: ((0, 0), 0), 1: ((1, 0), 1)},
    (1, 0): {0: ((1, 1), 1), 1: ((0, 1), 0)},
    (0, 1): {0: ((1, 0), 0), 1: ((0, 0), 1)},
    (1, 1): {0: ((0, 1), 1), 1: ((1, 1), 0)},
}


def table_encode(bits, terminate=False):
    state, parity, systematic = (0, 0), [], list(bits)
    for u in bits:
        state, p = HAND_TABLE[state][u]
        parity.append(p)
    if terminate:
        for _ in range(2):
            u = state[0] ^ state[1]
            systematic.append(u)
            state, p = HAND_TABLE[state][u]
            parity.append(p)
        assert state == (0, 0)
    return np.array(systematic), np.array(parity)


def enumerate_posteriors(channel, apriori, terminated):
    """Bitwise posteriors by brute force over every input sequence."""
    T = channel.shape[0]
    n_free = T - 2 if terminated else T
    metrics, inputs = [], []
    for free in itertools.product((0, 1), repeat=n_free):
        if terminated:
            sys_bits, par_bits = table_encode(free, terminate=True)
        else:
            sys_bits, par_bits = table_encode(free)
        xs, xp = bits_to_symbols(sys_bits), bits_to_symbols(par_bits)
        metrics.append(0.5 * np.sum(xs * (channel[:, 0] + apriori) + xp * channel[:, 1]))
        inputs.append(sys_bits)
    metrics, inputs = np.array(metrics), np.array(inputs)
    return np.array([
        logsumexp(metrics[inputs[:, t] == 0]) - logsumexp(metrics[inputs[:, t] == 1])
        for t in range(T)
    ])
