#!/usr/bin/env python3
"""Full-scale dry runs of the statistically risky acceptance criteria.

Independent of the C++ implementation (numpy RNG, numpy linalg). Confirms the
experiment designs land inside the acceptance tolerances with margin before
the C++ suite freezes them. Run time: a few minutes on one core.
"""
import numpy as np
from scipy import stats

rng = np.random.default_rng(77)

def toeplitz(d, r=0.8):
    i = np.arange(d)
    return r ** np.abs(i[:, None] - i[None, :])

def banded_true(d):
    w = int(np.ceil(np.cbrt(d) / 2))
    i = np.arange(d)
    return np.maximum(1 - np.abs(i[:, None] - i[None, :]) / w, 0.0)

def copula_rows(L, n):
    Y = rng.standard_normal((n, L.shape[0])) @ L.T
    return -np.log1p(-stats.norm.cdf(Y)) - 1.0

def helmert_factor(X):
    """columns R(X_i - Xbar)/sqrt(n) reduced to n-1; Gram = naive cov."""
    n = X.shape[0]
    V = X.T / np.sqrt(n)                      # t x n
    P = np.cumsum(V, axis=1)
    k = np.arange(1, n)
    H = (P[:, :-1] - k * V[:, 1:]) / np.sqrt(k * (k + 1.0))
    return H                                   # t x (n-1)

def sphere(B, s):
    U = rng.standard_normal((B, s))
    return U / np.linalg.norm(U, axis=1, keepdims=True)

# ---------------- criterion 1 ----------------
def crit1(reps=1000, B=2000):
    d = n = 100
    L = np.linalg.cholesky(toeplitz(d))
    rej05 = rej10 = 0
    for _ in range(reps):
        X = copula_rows(L, n)
        T = np.sqrt(n) * np.max(np.abs(X.mean(0)))
        G = helmert_factor(X)                  # d x 99
        s = G.shape[1]
        draws = np.sqrt(s) * np.max(np.abs(sphere(B, s) @ G.T), axis=1)
        draws.sort()
        rej05 += T >= draws[int(0.95 * B + 1e-9) - 1]
        rej10 += T >= draws[int(0.90 * B + 1e-9) - 1]
    print(f"crit1  alpha05={rej05/reps:.4f} (need |.-0.05|<=0.025) "
          f"alpha10={rej10/reps:.4f} (need |.-0.10|<=0.035)")

# ---------------- criterion 2 ----------------
def crit2(reps=1000, B=2000):
    d, n = 500, 50
    L = np.linalg.cholesky(toeplitz(d))
    rej05 = rej10 = 0
    for _ in range(reps):
        W = rng.chisquare(4, n)
        X = (rng.standard_normal((n, d)) @ L.T) * np.sqrt(2.0 / W)[:, None]
        norms = np.linalg.norm(X, axis=1)
        Xt = X / norms[:, None]
        T = np.sqrt(n) * np.linalg.norm(Xt.mean(0))
        G = Xt.T / np.sqrt(n)                  # d x n, Gram = Omega-tilde
        draws = np.sqrt(n) * np.linalg.norm(sphere(B, n) @ G.T, axis=1)
        draws.sort()
        rej05 += T >= draws[int(0.95 * B + 1e-9) - 1]
        rej10 += T >= draws[int(0.90 * B + 1e-9) - 1]
    print(f"crit2  alpha05={rej05/reps:.4f} alpha10={rej10/reps:.4f} (need within 0.03)")

# ---------------- criterion 3 ----------------
def crit3(reps=1000, B=2000):
    d = n = 100
    S = banded_true(d)
    L = np.linalg.cholesky(S + 1e-12 * np.eye(d))
    k = 2                                      # true bandwidth: zero for |i-j| > 2
    i = np.arange(d)
    mask = np.abs(i[:, None] - i[None, :]) <= k
    rej = np.zeros(3, int)
    alphas = (0.05, 0.10, 0.20)
    for _ in range(reps):
        X = copula_rows(L, n)
        T = np.sqrt(n) * np.linalg.norm(X.mean(0))
        Xc = X - X.mean(0)
        Om = (Xc.T @ Xc) / n
        Om = np.where(mask, Om, 0.0)
        lam, V = np.linalg.eigh(Om)
        lam = np.clip(lam, 0, None)
        G = V * np.sqrt(lam)
        draws = np.linalg.norm(rng.standard_normal((B, d)) @ G.T, axis=1)
        draws.sort()
        for j, a in enumerate(alphas):
            rej[j] += T >= draws[int((1 - a) * B + 1e-9) - 1]
    print("crit3 ", " ".join(f"alpha{a:.2f}={r/reps:.4f}(<= {a+0.02:.2f})"
                             for a, r in zip(alphas, rej)))

# ---------------- criterion 7 ----------------
def crit7(reps=500, B=2000):
    d, n = 100, 50
    res = {}
    for name, mu in (("sparse", None), ("dense", None)):
        if name == "sparse":
            mu = np.zeros(d); mu[0] = 3 * np.sqrt(np.log(d) / n)
        else:
            mu = ((-1.0) ** np.arange(d)) * (1.0 / np.sqrt(n))
        pw = {2: 0, np.inf: 0}
        for _ in range(reps):
            X = rng.standard_normal((n, d)) + mu
            G = helmert_factor(X)
            s = G.shape[1]
            Zs = rng.standard_normal((B, s)) @ G.T
            for p in (2, np.inf):
                T = np.sqrt(n) * np.linalg.norm(X.mean(0), ord=p)
                draws = np.sort(np.linalg.norm(Zs, ord=p, axis=1))
                pw[p] += T >= draws[int(0.95 * B + 1e-9) - 1]
        res[name] = {p: v / reps for p, v in pw.items()}
    print(f"crit7a sparse: linf={res['sparse'][np.inf]:.3f} l2={res['sparse'][2]:.3f} "
          f"gap={res['sparse'][np.inf]-res['sparse'][2]:.3f} (need >= 0.10)")
    print(f"crit7b dense : l2={res['dense'][2]:.3f} linf={res['dense'][np.inf]:.3f} "
          f"gap={res['dense'][2]-res['dense'][np.inf]:.3f} (need >= 0.10)")

# ---------------- criterion 10 ----------------
def crit10(reps=1000, B=4000):
    d, n = 20, 200
    pv = np.empty(reps)
    for i in range(reps):
        X = rng.standard_normal((n, d))
        T = np.sqrt(n) * np.linalg.norm(X.mean(0))
        G = helmert_factor(X)
        draws = np.linalg.norm(rng.standard_normal((B, G.shape[1])) @ G.T, axis=1)
        pv[i] = (draws >= T).sum() / B
    print(f"crit10 KS={stats.kstest(pv, 'uniform').statistic:.4f} (need < 0.06)")

crit7()
crit10()
crit1()
crit3()
crit2()
