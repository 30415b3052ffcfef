"""Reference computations that share no code with the package.

Transport LPs go through scipy's HiGHS; Prokhorov enumerates every subset
of the whole space against an explicit candidate set; the learning-problem
quantities are brute-force loops over ordered datasets with itertools.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import linprog as _linprog

# HiGHS defaults (1e-7) misjudge masses far below that scale.
TIGHT = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


def linprog(*args, **kwargs):
    return _linprog(*args, method="highs", options=TIGHT, **kwargs)


def w1_primal(p, q, d):
    n = len(p)
    A = []
    for i in range(n):
        row = np.zeros((n, n))
        row[i, :] = 1
        A.append(row.ravel())
    for j in range(n):
        col = np.zeros((n, n))
        col[:, j] = 1
        A.append(col.ravel())
    res = linprog(np.asarray(d).ravel(), A_eq=np.array(A), b_eq=np.concatenate([p, q]),
                  bounds=(0, None))
    assert res.status == 0
    return res.fun


def lipschitz_dual(p, q, d, box=None):
    """max f.(p-q) with |f_i - f_j| <= d_ij and optionally |f| <= box."""
    n = len(p)
    rows, rhs = [], []
    for i in range(n):
        for j in range(n):
            if i != j:
                r = np.zeros(n)
                r[i], r[j] = 1, -1
                rows.append(r)
                rhs.append(d[i][j])
    bounds = (-box, box) if box is not None else (None, None)
    if box is None:
        # pin one coordinate; the objective is shift invariant
        bounds = [(0, 0)] + [(None, None)] * (n - 1)
    res = linprog(-(np.asarray(p) - np.asarray(q)), A_ub=np.array(rows) if rows else None,
                  b_ub=np.array(rhs) if rhs else None, bounds=bounds)
    assert res.status == 0
    return -res.fun


def prokhorov_bruteforce(p, q, d):
    n = len(p)
    d = np.asarray(d, dtype=float)
    subsets = [s for r in range(1, n + 1) for s in itertools.combinations(range(n), r)]

    def nbhd_mass(s, a):
        return sum(q[j] for j in range(n) if min(d[i, j] for i in s) <= a)

    def feasible(a):
        return all(sum(p[i] for i in s) <= nbhd_mass(s, a) + a + 1e-12 for s in subsets)

    cands = {0.0, 1.0} | {float(x) for x in d.ravel()}
    for a in sorted(set(cands)):
        for s in subsets:
            cands.add(sum(p[i] for i in s) - nbhd_mass(s, a))
    return min(c for c in cands if 0 <= c <= 1 and feasible(c))


def brute_problem(loss, data, n, kernel_fn):
    """Exact quantities by looping over ordered datasets.

    ``kernel_fn(tuple_of_instance_indices) -> prob vector over hypotheses``.
    """
    loss = np.asarray(loss, dtype=float)
    k, m = loss.shape
    pop = loss @ np.asarray(data)
    gen = 0.0
    p_w = np.zeros(k)
    p_wz = np.zeros((k, m))
    joint = []
    for s in itertools.product(range(m), repeat=n):
        ws = math.prod(data[z] for z in s)
        out = np.asarray(kernel_fn(s), dtype=float)
        emp = np.array([sum(loss[w, z] for z in s) / n for w in range(k)])
        gen += ws * float(out @ (pop - emp))
        p_w += ws * out
        for z in s:
            p_wz[:, z] += ws * out / n
        joint.append(ws * out)
    joint = np.array(joint)

    def mi(j):
        a = j.sum(axis=1, keepdims=True)
        b = j.sum(axis=0, keepdims=True)
        mask = j > 0
        return float(np.sum(j[mask] * np.log(j[mask] / (a @ b)[mask])))

    return {"gen": gen, "p_w": p_w, "p_wz": p_wz, "mi_w_sn": mi(joint), "mi_w_z": mi(p_wz)}


def mutual_information(j):
    j = np.asarray(j, dtype=float)
    total = 0.0
    a, b = j.sum(axis=1), j.sum(axis=0)
    for x in range(j.shape[0]):
        for y in range(j.shape[1]):
            if j[x, y] > 0:
                total += j[x, y] * math.log(j[x, y] / (a[x] * b[y]))
    return total
