"""
Naive reference evaluations: plain loops over the structure tables, no use of
the fiber tables, Haar helpers or cached composable pairs of the package.
"""

import numpy as np


def _target_fiber(g, x):
    return [h for h in range(len(g.source)) if int(g.target[h]) == x]


def naive_mean_ratio(g, maps, weight, c):
    out = []
    for a in range(len(g.source)):
        x = int(g.source[a])
        acc = None
        for h in _target_fiber(g, x):
            gh = int(g.compose[a, h])
            term = (c[int(g.source[h])] * weight[h]) * (maps[gh] @ np.linalg.inv(maps[h]))
            acc = term if acc is None else acc + term
        out.append(acc)
    return out


def naive_defects(g, maps):
    """(b, r) in the Euclidean spectral norm."""
    n = len(g.source)
    b = max(np.linalg.norm(maps[a], 2) for a in range(n))
    unit = max(np.linalg.norm(np.eye(len(maps[int(g.unit[x])])) - maps[int(g.unit[x])], 2)
               for x in range(g.n_objects))
    mult = 0.0
    for a in range(n):
        for h in range(n):
            if int(g.source[a]) != int(g.target[h]):
                continue
            ah = int(g.compose[a, h])
            mult = max(mult, np.linalg.norm(maps[ah] - maps[a] @ maps[h], 2))
    return b, unit + mult


def naive_contract2(g, z, weight, c):
    out = []
    for a in range(len(g.source)):
        acc = None
        for h in _target_fiber(g, int(g.source[a])):
            term = (c[int(g.source[h])] * weight[h]) * z[(a, h)]
            acc = term if acc is None else acc + term
        out.append(acc)
    return out


def naive_contract1(g, x, weight, c):
    out = []
    for obj in range(g.n_objects):
        acc = None
        for h in _target_fiber(g, obj):
            term = (c[int(g.source[h])] * weight[h]) * x[h]
            acc = term if acc is None else acc + term
        out.append(-acc)
    return out


def naive_average_metric(g, maps, gram, weight, c):
    out = []
    for x in range(g.n_objects):
        acc = None
        for h in _target_fiber(g, x):
            back = maps[int(g.inverse[h])]
            term = (c[int(g.source[h])] * weight[h]) * (back.T @ gram[int(g.source[h])] @ back)
            acc = term if acc is None else acc + term
        out.append(0.5 * (acc + acc.T))
    return out
