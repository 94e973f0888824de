"""Independent brute-force recomputations used as test oracles.

Nothing here imports the code under test beyond plain data types.
"""
import itertools
import math

import numpy as np


def feasible_pairs_bruteforce(cards, s, forbidden, predicate=None):
    """{subset: set of s-tuples} by scanning every full row."""
    subsets = list(itertools.combinations(range(len(cards)), s))
    out = {S: set() for S in subsets}
    for row in itertools.product(*(range(w) for w in cards)):
        if any(all(row[d] == c for d, c in zip(dims, cls)) for dims, cls in forbidden):
            continue
        if predicate is not None and not predicate(row):
            continue
        for S in subsets:
            out[S].add(tuple(row[j] for j in S))
    return out


def uncovered_bruteforce(rows, feasible):
    missing = []
    for S, zs in feasible.items():
        seen = {tuple(r[j] for j in S) for r in rows}
        missing += [(S, z) for z in zs if z not in seen]
    return missing


def target_set(rows, s):
    q = len(rows[0]) if rows else 0
    return {(S, tuple(r[j] for j in S)) for r in rows for S in itertools.combinations(range(q), s)}


def realized_set(tuples, s):
    return target_set(tuples, s)


def kron_statevector(n, ops):
    """Dense-matrix evolution; ``ops`` is a list of (2^n x 2^n) unitaries."""
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1
    for U in ops:
        psi = U @ psi
    return psi


def single_qubit_op(U, q, n):
    mats = [np.eye(2)] * n
    mats[q] = U
    out = np.array([[1.0]])
    for m in mats:
        out = np.kron(out, m)
    return out


def cnot_op(c, t, n):
    dim = 2**n
    M = np.zeros((dim, dim))
    for i in range(dim):
        bits = [(i >> (n - 1 - k)) & 1 for k in range(n)]
        if bits[c]:
            bits[t] ^= 1
        j = sum(b << (n - 1 - k) for k, b in enumerate(bits))
        M[j, i] = 1
    return M


def gate_matrix(name, theta=None):
    s = 1 / math.sqrt(2)
    if name == "H":
        return np.array([[s, s], [s, -s]])
    if name == "X":
        return np.array([[0, 1], [1, 0]])
    if name == "Z":
        return np.array([[1, 0], [0, -1]])
    c, si = math.cos(theta / 2), math.sin(theta / 2)
    if name == "RX":
        return np.array([[c, -1j * si], [-1j * si, c]])
    if name == "RY":
        return np.array([[c, -si], [si, c]])
    return np.diag([np.exp(-1j * theta / 2), np.exp(1j * theta / 2)])


def syndrome_distribution(n, p_x, p_z):
    """Exact class probabilities by enumerating every per-qubit X/Z pattern."""
    probs = {"no_error": 0.0, "bitflip": 0.0, "phaseflip": 0.0, "correlated": 0.0}
    for xs in itertools.product((0, 1), repeat=n):
        for zs in itertools.product((0, 1), repeat=n):
            p = 1.0
            for x, z in zip(xs, zs):
                p *= (p_x if x else 1 - p_x) * (p_z if z else 1 - p_z)
            hit = [x or z for x, z in zip(xs, zs)]
            if not any(hit):
                cls = "no_error"
            elif sum(hit) >= 2 or (any(xs) and any(zs)):
                cls = "correlated"
            else:
                cls = "bitflip" if any(xs) else "phaseflip"
            probs[cls] += p
    return probs
