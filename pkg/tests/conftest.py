import random

import pytest

from steinertd.graph import Graph


def random_graph(seed, n, density=0.15, max_weight=10, connected=True):
    """Random spanning tree (if ``connected``) plus independent extra edges."""
    rng = random.Random(seed)
    edges = []
    if connected:
        edges = [(v, rng.randrange(v), rng.randint(1, max_weight)) for v in range(1, n)]
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < density:
                edges.append((u, v, rng.randint(1, max_weight)))
    return Graph(n, edges)


def floyd_warshall(g):
    inf = float("inf")
    d = [[0 if i == j else inf for j in range(g.n)] for i in range(g.n)]
    for u, v, w in g.edges():
        d[u][v] = d[v][u] = min(d[u][v], w)
    for k in range(g.n):
        for i in range(g.n):
            for j in range(g.n):
                if d[i][k] + d[k][j] < d[i][j]:
                    d[i][j] = d[i][k] + d[k][j]
    return d


@pytest.fixture
def path3():
    # v0 -2- v1 -3- v2
    return Graph(3, [(0, 1, 2), (1, 2, 3)])


@pytest.fixture
def triangle():
    return Graph(3, [(0, 1, 1), (1, 2, 1), (0, 2, 1)])
