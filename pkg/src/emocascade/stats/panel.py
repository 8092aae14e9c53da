"""Publisher fixed effects with cluster-robust errors, and the Hausman test."""

import numpy as np
from scipy import stats

from ..exceptions import Collinear, InvalidInput
from .design import INTERCEPT, FitResult, check_rank


def _demean(a, groups, n_groups):
    a = np.asarray(a, dtype=float)
    counts = np.bincount(groups, minlength=n_groups).astype(float)
    if a.ndim == 1:
        means = np.bincount(groups, weights=a, minlength=n_groups) / counts
        return a - means[groups]
    sums = np.zeros((n_groups, a.shape[1]))
    np.add.at(sums, groups, a)
    return a - (sums / counts[:, None])[groups]


def fit_fixed_effects(design):
    """Within estimator with publisher-clustered sandwich standard errors.

    Publisher-level columns are absorbed and listed in ``info['absorbed']``.
    Any other predictor that is constant within every group raises
    ``Collinear``. The small-sample factor is ``G/(G-1) * (N-1)/(N-k)`` and
    p-values use a t distribution with ``G - 1`` degrees of freedom.
    """
    absorbed = list(design.publisher_columns)
    keep = [n for n in design.names if n not in absorbed]
    if not keep:
        raise InvalidInput("no article-level predictors left after absorbing publisher columns")
    X = design.X[:, [design.names.index(n) for n in keep]]
    G = design.n_groups
    Xw = _demean(X, design.groups, G)
    yw = _demean(design.y, design.groups, G)
    scale = np.abs(X).max(axis=0)
    scale[scale == 0] = 1.0
    flat = [n for n, c in zip(keep, np.abs(Xw).max(axis=0) / scale) if c < 1e-12]
    if flat:
        raise Collinear(f"predictors constant within every group: {flat}", flat)
    check_rank(Xw, keep)

    N, k = Xw.shape
    XtX_inv = np.linalg.inv(Xw.T @ Xw)
    beta = XtX_inv @ (Xw.T @ yw)
    resid = yw - Xw @ beta

    scores = np.zeros((G, k))
    np.add.at(scores, design.groups, Xw * resid[:, None])
    meat = scores.T @ scores
    c = G / (G - 1) * (N - 1) / (N - k)
    vcov = c * XtX_inv @ meat @ XtX_inv
    vcov = (vcov + vcov.T) / 2

    rss = float(resid @ resid)
    s2_classic = rss / (N - G - k)
    vcov_classic = s2_classic * XtX_inv
    ll = -0.5 * N * (np.log(2 * np.pi * rss / N) + 1)
    return FitResult(
        keep, beta, np.sqrt(np.diag(vcov)), vcov, sigma_mu=float("nan"),
        sigma_eps=float(np.sqrt(s2_classic)), loglik=float(ll), method="FE", df_resid=G - 1,
        info={"absorbed": absorbed, "n_obs": N, "n_groups": G, "vcov_classic": vcov_classic.tolist(),
              "dropped": design.dropped},
    )


def fit_lsdv(design):
    """Least-squares dummy-variable regression: one indicator column per group."""
    keep = [n for n in design.names if n not in design.publisher_columns]
    X = design.X[:, [design.names.index(n) for n in keep]]
    D = np.zeros((design.n_obs, design.n_groups))
    D[np.arange(design.n_obs), design.groups] = 1.0
    full = np.column_stack([X, D])
    beta, *_ = np.linalg.lstsq(full, design.y, rcond=None)
    return dict(zip(keep, beta[: len(keep)]))


def hausman_test(fe, re, names=None, robust=False):
    """Durbin-Wu-Hausman contrast of fixed- and random-effects estimates.

    ``H = d' (V_fe - V_re)^+ d`` over the shared article-level coefficients,
    with a Moore-Penrose inverse taken over the positive eigen-directions of
    the variance difference; the degrees of freedom are their count. By
    default the classical (non-clustered) FE covariance is used, as the test
    assumes.
    Returns ``(statistic, dof, p_value)``.
    """
    common = [n for n in fe.names if n in re.names and n != INTERCEPT]
    if names is not None:
        common = [n for n in common if n in set(names)]
    if not common:
        raise InvalidInput("fits share no coefficients to compare")
    fi = [fe.names.index(n) for n in common]
    ri = [re.names.index(n) for n in common]
    v_fe = np.asarray(fe.vcov) if robust or "vcov_classic" not in fe.info \
        else np.asarray(fe.info["vcov_classic"])
    d = np.asarray(fe.coef)[fi] - np.asarray(re.coef)[ri]
    diff = v_fe[np.ix_(fi, fi)] - np.asarray(re.vcov)[np.ix_(ri, ri)]
    diff = (diff + diff.T) / 2
    eig, vec = np.linalg.eigh(diff)
    tol = max(diff.shape) * np.finfo(float).eps * max(float(np.abs(eig).max()), 1e-300)
    # pseudo-inverse restricted to the positive-definite part keeps H >= 0
    pos = eig > tol
    dof = int(pos.sum())
    if dof == 0:
        return 0.0, 0, 1.0
    proj = vec[:, pos].T @ d
    stat = float(np.sum(proj**2 / eig[pos]))
    return stat, dof, float(stats.chi2.sf(stat, dof))
