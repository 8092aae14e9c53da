"""Two-level Gaussian linear mixed models.

Random intercept: ``y = X b + u[g] + e`` with ``u ~ N(0, s_mu^2)`` and
``e ~ N(0, s_eps^2)``. The likelihood is profiled over ``b`` and
``s_eps^2`` and maximized over the variance ratio ``lam = s_mu^2 / s_eps^2``.
Every quantity is assembled from per-group sums because
``(I + lam 11')^-1 = I - lam / (1 + n lam) 11'``.

Random slopes: intercept plus selected slopes vary by group with an
unstructured covariance ``G``, fitted by ECME (GLS for ``b`` between EM
updates of ``G`` and ``s_eps^2``) on the sufficient statistics of each group.
"""

import logging

import numpy as np
from scipy import optimize
from sklearn.base import BaseEstimator, RegressorMixin

from ..exceptions import InvalidInput, NoConvergence, TooFewGroups
from .design import INTERCEPT, DesignMatrix, FitResult, check_rank

logger = logging.getLogger(__name__)

_LOG2PI = np.log(2 * np.pi)


class _InterceptProfile:
    """Profiled (restricted) log-likelihood of the random-intercept model in ``lam``."""

    def __init__(self, X, y, groups, method):
        self.X, self.y, self.groups = X, y, groups
        self.method = method
        self.N, self.p = X.shape
        self.n_g = np.bincount(groups).astype(float)
        G = len(self.n_g)
        self.sX = np.zeros((G, self.p))
        np.add.at(self.sX, groups, X)
        self.sy = np.bincount(groups, weights=y, minlength=G)
        self.XtX = X.T @ X
        self.Xty = X.T @ y

    def solve(self, lam):
        w = lam / (1.0 + self.n_g * lam)
        A = self.XtX - self.sX.T @ (w[:, None] * self.sX)
        b = self.Xty - self.sX.T @ (w * self.sy)
        beta = np.linalg.solve(A, b)
        r = self.y - self.X @ beta
        rsum = np.bincount(self.groups, weights=r, minlength=len(self.n_g))
        quad = float(r @ r - np.sum(w * rsum**2))
        return A, beta, rsum, quad

    def _dof(self):
        return self.N - self.p if self.method == "REML" else self.N

    def loglik(self, lam):
        A, _, _, quad = self.solve(lam)
        dof = self._dof()
        logdet_h = float(np.sum(np.log1p(self.n_g * lam)))
        ll = -0.5 * (dof * (_LOG2PI + np.log(quad / dof) + 1.0) + logdet_h)
        if self.method == "REML":
            ll -= 0.5 * np.linalg.slogdet(A)[1]
        return float(ll)

    def gradient(self, lam):
        A, _, rsum, quad = self.solve(lam)
        dof = self._dof()
        d = 1.0 + self.n_g * lam
        dquad = -float(np.sum(rsum**2 / d**2))
        dlogdet_h = float(np.sum(self.n_g / d))
        g = -0.5 * (dof * dquad / quad + dlogdet_h)
        if self.method == "REML":
            U = self.sX / d[:, None]
            g += 0.5 * float(np.trace(np.linalg.solve(A, U.T @ U)))
        return g


def _validate_groups(design):
    if design.n_groups < 2:
        raise TooFewGroups("need at least two groups")
    if np.bincount(design.groups).max() < 2:
        raise InvalidInput("need at least one group with two or more rows")


def _maximize_ratio(profile, xtol=1e-8, lam_max=1e6):
    grid = np.concatenate([[0.0], np.logspace(-6, np.log10(lam_max), 61)])
    values = np.array([profile.loglik(x) for x in grid])
    i = int(np.argmax(values))
    trace = list(zip(grid.tolist(), values.tolist()))
    if i == len(grid) - 1:
        raise NoConvergence("variance ratio ran to the upper bound; residual variance ~ 0", trace)
    lo = grid[max(i - 1, 0)]
    hi = grid[i + 1]
    res = optimize.minimize_scalar(lambda x: -profile.loglik(x), bounds=(lo, hi),
                                   method="bounded", options={"xatol": xtol, "maxiter": 500})
    if not res.success:
        raise NoConvergence(f"bounded search failed: {res.message}", trace)
    best, best_ll = float(res.x), -float(res.fun)
    for edge in (lo, hi):
        ll = profile.loglik(edge)
        if ll > best_ll:
            best, best_ll = edge, ll
    return best, best_ll, trace


def fit_random_intercept(design, method="REML"):
    """Random-intercept model by (restricted) maximum likelihood.

    Fixed effects are the GLS solution at the optimal variance ratio; their
    covariance is ``s_eps^2 (X' H^-1 X)^-1``.
    """
    method = method.upper()
    if method not in ("ML", "REML"):
        raise InvalidInput("method must be 'ML' or 'REML'")
    _validate_groups(design)
    X, names = design.with_intercept()
    check_rank(X, names)
    profile = _InterceptProfile(X, design.y, design.groups, method)
    lam, ll, trace = _maximize_ratio(profile)
    A, beta, _, quad = profile.solve(lam)
    s2 = quad / profile._dof()
    vcov = s2 * np.linalg.inv(A)
    vcov = (vcov + vcov.T) / 2
    return FitResult(
        names, beta, np.sqrt(np.diag(vcov)), vcov,
        sigma_mu=float(np.sqrt(lam * s2)), sigma_eps=float(np.sqrt(s2)), loglik=ll,
        method=method,
        info={"lambda": lam, "n_obs": design.n_obs, "n_groups": design.n_groups,
              "dropped": design.dropped, "search_evaluations": len(trace)},
    )


def profile_loglik(design, lam, method="ML"):
    """Profiled log-likelihood and its analytic derivative at variance ratio ``lam``."""
    X, _ = design.with_intercept()
    profile = _InterceptProfile(X, design.y, design.groups, method.upper())
    return profile.loglik(lam), profile.gradient(lam)


def _group_sums(groups, n_groups, *arrays):
    out = []
    for a in arrays:
        s = np.zeros((n_groups,) + a.shape[1:])
        np.add.at(s, groups, a)
        out.append(s)
    return out


def _slopes_profile(theta, q, stats_):
    """ML log-likelihood with beta and s_eps^2 profiled out, at G = s_eps^2 L L'.

    Returns ``(loglik, beta, s2, G, X'V^-1 X)``.
    """
    ZZ, ZX, Zy, XX, Xy, yy, N = stats_
    L = np.zeros((q, q))
    L[np.tril_indices(q)] = theta
    lam = L @ L.T
    A = np.eye(q) + lam @ ZZ
    M = np.linalg.solve(A, np.broadcast_to(lam, ZZ.shape))
    M = (M + np.swapaxes(M, 1, 2)) / 2
    XVX = XX - np.einsum("gia,gij,gjb->ab", ZX, M, ZX)
    XVy = Xy - np.einsum("gia,gij,gj->a", ZX, M, Zy)
    beta = np.linalg.solve(XVX, XVy)
    Zr = Zy - ZX @ beta
    quad = yy - 2 * beta @ Xy + beta @ XX @ beta - float(np.einsum("gi,gij,gj->", Zr, M, Zr))
    s2 = quad / N
    ll = -0.5 * (N * (_LOG2PI + np.log(s2) + 1.0) + float(np.sum(np.linalg.slogdet(A)[1])))
    return float(ll), beta, s2, s2 * lam, XVX / s2


def fit_random_slopes(design, slope_columns, max_iter=2000, tol=1e-6):
    """Random intercept and slopes with unstructured covariance, ML via ECME.

    If EM has not met ``tol`` after ``max_iter`` iterations (typical when a
    variance component is near zero), a quasi-Newton search on the profiled
    likelihood finishes the fit and ``info['polished']`` is set.

    Reports fixed effects with GLS standard errors, the random-effect SDs
    (``sigma_mu`` aligned with ``re_names``), their correlation matrix and
    the residual SD.
    """
    slope_columns = list(slope_columns)
    absent = [c for c in slope_columns if c not in design.names]
    if absent:
        raise InvalidInput(f"slope columns not in the design: {absent}")
    if not slope_columns:
        raise InvalidInput("no slope columns given")
    X, names = design.with_intercept()
    check_rank(X, names)
    y, groups = design.y, design.groups
    N, p = X.shape
    Z = X[:, [0] + [names.index(c) for c in slope_columns]]
    q = Z.shape[1]
    n_groups = design.n_groups
    if n_groups < q + 1:
        raise TooFewGroups(f"{n_groups} groups cannot identify a {q}x{q} random-effect covariance")
    sizes = np.bincount(groups)
    small = int(np.sum(sizes < 2 + len(slope_columns)))
    if small:
        logger.info("%d groups have fewer than %d rows", small, 2 + len(slope_columns))

    ZZ, ZX, Zy = _group_sums(groups, n_groups,
                             np.einsum("ni,nj->nij", Z, Z), np.einsum("ni,nj->nij", Z, X),
                             Z * y[:, None])
    XX = X.T @ X
    Xy = X.T @ y
    yy = float(y @ y)

    start = fit_random_intercept(design, method="ML")
    s2 = start.sigma_eps**2
    G = np.eye(q) * 0.1 * s2
    G[0, 0] = max(start.sigma_mu**2, 0.1 * s2)
    eye = np.eye(q)
    prev = -np.inf
    trace = []
    converged = False
    for it in range(1, max_iter + 1):
        M = np.linalg.solve(s2 * eye + G @ ZZ, np.broadcast_to(G, ZZ.shape))
        M = (M + np.swapaxes(M, 1, 2)) / 2
        XVX = (XX - np.einsum("gia,gij,gjb->ab", ZX, M, ZX)) / s2
        XVy = (Xy - np.einsum("gia,gij,gj->a", ZX, M, Zy)) / s2
        beta = np.linalg.solve(XVX, XVy)
        Zr = Zy - ZX @ beta
        rr = yy - 2 * beta @ Xy + beta @ XX @ beta
        quad_m = float(np.einsum("gi,gij,gj->", Zr, M, Zr))
        logdet = np.linalg.slogdet(s2 * eye + G @ ZZ)[1]
        ll = -0.5 * (N * _LOG2PI + N * np.log(s2) + float(np.sum(logdet)) - q * n_groups * np.log(s2)
                     + (rr - quad_m) / s2)
        trace.append(float(ll))
        if abs(ll - prev) < tol:
            converged = True
            break
        prev = ll
        b = np.einsum("gij,gj->gi", M, Zr)
        G = (np.einsum("gi,gj->ij", b, b) + s2 * M.sum(axis=0)) / n_groups
        G = (G + G.T) / 2
        s2 = (rr - 2 * float(np.sum(b * Zr)) + float(np.einsum("gi,gij,gj->", b, ZZ, b))
              + s2 * float(np.einsum("gij,gji->", ZZ, M))) / N
    polished = False
    if not converged:
        # EM crawls when a variance heads for zero; finish on the profiled likelihood
        # in Cholesky coordinates, where that boundary is an interior point
        stats_ = (ZZ, ZX, Zy, XX, Xy, yy, N)
        chol = np.linalg.cholesky(G / s2 + 1e-10 * eye)
        res = optimize.minimize(lambda t: -_slopes_profile(t, q, stats_)[0], chol[np.tril_indices(q)],
                                method="L-BFGS-B", options={"maxiter": 5000, "ftol": 1e-14,
                                                            "gtol": 1e-8})
        ll_p, beta, s2, G, XVX = _slopes_profile(res.x, q, stats_)
        if not (res.success and ll_p >= ll - tol):
            raise NoConvergence(f"EM did not reach |dloglik| < {tol} in {max_iter} iterations "
                                f"and the quasi-Newton finish failed: {res.message}", trace)
        ll, polished = ll_p, True
        trace.append(float(ll))

    vcov = np.linalg.inv(XVX)
    vcov = (vcov + vcov.T) / 2
    sds = np.sqrt(np.clip(np.diag(G), 0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = G / np.outer(sds, sds)
    corr[~np.isfinite(corr)] = 0.0
    np.fill_diagonal(corr, 1.0)
    return FitResult(
        names, beta, np.sqrt(np.diag(vcov)), vcov,
        sigma_mu=sds, sigma_eps=float(np.sqrt(s2)), loglik=float(ll), method="ML",
        re_names=[INTERCEPT, *slope_columns], re_corr=corr,
        info={"n_obs": N, "n_groups": n_groups, "iterations": it, "polished": polished,
              "small_groups": small,
              "re_cov": G.tolist(), "dropped": design.dropped},
    )


class MixedLM(RegressorMixin, BaseEstimator):
    """Estimator front-end: ``fit(X, y, groups=...)`` then ``predict(X)``.

    ``slopes`` lists column positions or names (when ``X`` is a DataFrame)
    that receive random slopes; empty means a random-intercept model.
    Predictions are population-level (fixed effects only).
    """

    def __init__(self, method="REML", slopes=(), publisher_columns=()):
        self.method = method
        self.slopes = slopes
        self.publisher_columns = publisher_columns

    def fit(self, X, y, groups=None):
        if groups is None:
            raise InvalidInput("MixedLM.fit needs groups")
        names = list(getattr(X, "columns", [f"x{i}" for i in range(np.shape(X)[1])]))
        design = DesignMatrix(np.asarray(y), np.asarray(X, dtype=float), names, np.asarray(groups),
                              publisher_columns=tuple(self.publisher_columns))
        slopes = [names[s] if isinstance(s, (int, np.integer)) else s for s in self.slopes]
        if slopes:
            self.result_ = fit_random_slopes(design, slopes)
        else:
            self.result_ = fit_random_intercept(design, self.method)
        self.coef_ = self.result_.coef[1:]
        self.intercept_ = float(self.result_.coef[0])
        self.feature_names_in_ = np.array(names, dtype=object)
        return self

    def predict(self, X):
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self, "result_")
        return np.asarray(X, dtype=float) @ self.coef_ + self.intercept_
