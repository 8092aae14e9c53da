"""Independent reference implementations used to check the library.

Each oracle is written from the defining formula, deliberately naive
(quadratic loops, dense matrices) and shares no code with the package.
"""

import math
from collections import deque

import numpy as np
from scipy import optimize


# -- trees --------------------------------------------------------------------

def random_parent_array(rng, n):
    """Uniform random recursive tree: node i > 0 attaches to a random earlier node."""
    parent = np.full(n, -1, dtype=np.int64)
    for i in range(1, n):
        parent[i] = rng.integers(0, i)
    return parent


def sv_bfs(parent):
    """Mean shortest-path length over ordered pairs by BFS from every node."""
    n = len(parent)
    if n < 2:
        return 0.0
    adj = [[] for _ in range(n)]
    for v, p in enumerate(parent):
        if p >= 0:
            adj[v].append(int(p))
            adj[int(p)].append(v)
    total = 0
    for s in range(n):
        dist = [-1] * n
        dist[s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for w in adj[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    q.append(w)
        total += sum(dist)
    return total / (n * (n - 1))


def depths_bruteforce(parent):
    out = []
    for v in range(len(parent)):
        d, u = 0, v
        while parent[u] >= 0:
            u = parent[u]
            d += 1
        out.append(d)
    return np.array(out)


# -- text -----------------------------------------------------------------------

def eq3_score(tokens, table, negations, degrees, window=3):
    """Emotion vector of a token list, scanning each emotion word's look-back window."""
    out = [0.0] * 8
    for i, tok in enumerate(tokens):
        if tok not in table:
            continue
        before = tokens[max(0, i - window):i]
        negs = 0
        degs = []
        for t in before:
            if t in table:
                continue
            if t in negations:
                negs += 1
            elif t in degrees:
                degs.append(degrees[t])
        mult = (-1) ** negs * (sum(degs) / len(degs) if degs else 1.0)
        for k in range(8):
            out[k] += mult * table[tok][k]
    return out


def cosine(a, b):
    dot = sum(x * y for x, y in zip(a, b))
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(y * y for y in b))
    return dot / (na * nb)


def nearest(words, vectors, query, n):
    qi = words.index(query)
    scored = [(cosine(vectors[qi], vectors[j]), w) for j, w in enumerate(words) if j != qi]
    scored.sort(key=lambda t: (-t[0], t[1]))
    return [(w, s) for s, w in scored[:n]]


def eo_sd(words, vectors, lexicon, query, n, alpha):
    sdi = [0.0] * 8
    for w, s in nearest(words, vectors, query, n):
        if w in lexicon:
            for k in range(8):
                sdi[k] += s * lexicon[w][k]
    return [v if v >= alpha else 0.0 for v in sdi]


def intensities(words, vectors, lexicon, query, n, m, alpha):
    sdi = eo_sd(words, vectors, lexicon, query, n, alpha)
    near = [w for w, _ in nearest(words, vectors, query, m) if w in lexicon]
    out = []
    for k in range(8):
        if sdi[k] <= 0:
            out.append(0.0)
            continue
        vals = [lexicon[w][k] for w in near if lexicon[w][k] > 0]
        out.append(sum(vals) / len(vals) if vals else 0.0)
    return out


# -- regression -----------------------------------------------------------------

def ols(y, X):
    """OLS with an intercept prepended; returns (coef, se)."""
    A = np.column_stack([np.ones(len(y)), X])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    r = y - A @ coef
    s2 = r @ r / (len(y) - A.shape[1])
    return coef, np.sqrt(np.diag(s2 * np.linalg.inv(A.T @ A)))


def dense_lmm_loglik(y, X, groups, sigma_mu2, sigma_e2, beta=None, reml=False):
    """Gaussian log-likelihood with V = s_e^2 I + s_mu^2 Z Z' built densely."""
    N = len(y)
    A = np.column_stack([np.ones(N), X])
    Z = (groups[:, None] == np.unique(groups)[None, :]).astype(float)
    V = sigma_e2 * np.eye(N) + sigma_mu2 * Z @ Z.T
    Vi = np.linalg.inv(V)
    if beta is None:
        beta = np.linalg.solve(A.T @ Vi @ A, A.T @ Vi @ y)
    r = y - A @ beta
    ll = -0.5 * (N * math.log(2 * math.pi) + np.linalg.slogdet(V)[1] + r @ Vi @ r)
    if reml:
        p = A.shape[1]
        ll += 0.5 * p * math.log(2 * math.pi) - 0.5 * np.linalg.slogdet(A.T @ Vi @ A)[1]
    return float(ll), beta


def dense_lmm_fit(y, X, groups, reml=True):
    """Maximize the dense likelihood over (log s_mu, log s_e) with Nelder-Mead."""
    def neg(theta):
        return -dense_lmm_loglik(y, X, groups, math.exp(2 * theta[0]), math.exp(2 * theta[1]),
                                 reml=reml)[0]
    res = optimize.minimize(neg, x0=[0.0, 0.0], method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 20000})
    s_mu, s_e = math.exp(res.x[0]), math.exp(res.x[1])
    ll, beta = dense_lmm_loglik(y, X, groups, s_mu**2, s_e**2, reml=reml)
    return beta, s_mu, s_e, ll


def lsdv(y, X, groups):
    labels = np.unique(groups)
    D = (groups[:, None] == labels[None, :]).astype(float)
    coef, *_ = np.linalg.lstsq(np.column_stack([X, D]), y, rcond=None)
    return coef[: X.shape[1]]


def cluster_sandwich(y, X, groups):
    """Within estimator and its CR1 covariance, looping over clusters explicitly."""
    labels = np.unique(groups)
    Xw = X.astype(float).copy()
    yw = y.astype(float).copy()
    for g in labels:
        idx = groups == g
        Xw[idx] -= X[idx].mean(axis=0)
        yw[idx] -= y[idx].mean()
    bread = np.linalg.inv(Xw.T @ Xw)
    beta = bread @ Xw.T @ yw
    e = yw - Xw @ beta
    meat = np.zeros((X.shape[1], X.shape[1]))
    for g in labels:
        idx = groups == g
        s = Xw[idx].T @ e[idx]
        meat += np.outer(s, s)
    G, N, k = len(labels), len(y), X.shape[1]
    c = G / (G - 1) * (N - 1) / (N - k)
    return beta, c * bread @ meat @ bread


def welch(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    va, vb = a.var(ddof=1) / len(a), b.var(ddof=1) / len(b)
    t = (a.mean() - b.mean()) / math.sqrt(va + vb)
    df = (va + vb) ** 2 / (va**2 / (len(a) - 1) + vb**2 / (len(b) - 1))
    return t, df


def ccdf(values):
    xs = sorted(values)
    return [(v, sum(1 for x in xs if x >= v) / len(xs)) for v in sorted(set(xs))]
