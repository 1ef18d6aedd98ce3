"""Brute-force reference for the trace kernel: closure under adjacent swaps."""

import itertools
import random

from edtolsolve.traces import commutation_class, is_factor, normal_form, trace_eq

# (symbols, theta): a typed variable, a typed constant, and both at once
CONFIGS = [
    ((1, 2, 3, -1, -2), {-1: 1, -2: 2}),
    ((1, 2, 3, 4, 5), {3: 1, 4: 2}),
    ((1, 2, 3, 4, -1), {3: 1, 4: 2, -1: 1, -2: 2}),
]


def words(symbols, max_len):
    for n in range(max_len + 1):
        yield from itertools.product(symbols, repeat=n)


def brute_factor(u, w, theta):
    cu = commutation_class(u, theta)
    k = len(u)
    for v in commutation_class(w, theta):
        for i in range(len(v) - k + 1):
            if v[i:i + k] in cu:
                return True
    return False


def check_word(w, theta, rng) -> list:
    bad = []
    cls = commutation_class(w, theta)
    nf = normal_form(w, theta)
    if nf != min(cls):
        bad.append(("normal_form", w))
    for v in cls:
        if not trace_eq(w, v, theta) or normal_form(v, theta) != nf:
            bad.append(("trace_eq", w, v))
            break
    perm = list(w)
    rng.shuffle(perm)
    perm = tuple(perm)
    if trace_eq(w, perm, theta) != (perm in cls):
        bad.append(("trace_eq", w, perm))
    return bad


def run_kernel_check(long_len=8, short_len=6, factor_len=5, seed=0) -> list:
    rng = random.Random(seed)
    bad = []
    for symbols, theta in CONFIGS:
        for w in words(symbols, short_len):
            bad += check_word(w, theta, rng)
        small = symbols[:3]
        for n in range(short_len + 1, long_len + 1):
            for w in itertools.product(small, repeat=n):
                bad += check_word(w, theta, rng)
        factors = list(words(symbols, 2))
        for w in words(symbols, factor_len):
            for u in factors:
                if is_factor(u, w, theta) != brute_factor(u, w, theta):
                    bad.append(("is_factor", u, w))
    return bad
