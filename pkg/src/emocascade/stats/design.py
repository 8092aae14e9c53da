"""Design matrices, fit results and shared least-squares helpers."""

import json
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import stats

from ..exceptions import Collinear, InvalidInput

INTERCEPT = "(Intercept)"


@dataclass
class DesignMatrix:
    """Outcome, named predictors and a grouping factor.

    ``X`` never contains the intercept; models add it as needed.
    ``publisher_columns`` names the columns that are constant within groups
    by construction (absorbed by fixed effects).
    """

    y: np.ndarray
    X: np.ndarray
    names: list
    groups: np.ndarray
    group_labels: list = field(default_factory=list)
    publisher_columns: tuple = ()
    outcome: str = "y"
    dropped: int = 0

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float).ravel()
        self.X = np.asarray(self.X, dtype=float).reshape(len(self.y), -1)
        self.names = list(self.names)
        if self.X.shape[1] != len(self.names):
            raise InvalidInput("one name per predictor column required")
        labels, codes = np.unique(np.asarray(self.groups), return_inverse=True)
        self.groups = codes.astype(np.int64)
        if not self.group_labels:
            self.group_labels = [str(g) for g in labels]
        if not (np.all(np.isfinite(self.y)) and np.all(np.isfinite(self.X))):
            raise InvalidInput("design contains missing or non-finite values")
        unknown = set(self.publisher_columns) - set(self.names)
        if unknown:
            raise InvalidInput(f"publisher columns not among predictors: {sorted(unknown)}")
        self.publisher_columns = tuple(self.publisher_columns)

    @property
    def n_obs(self):
        return len(self.y)

    @property
    def n_groups(self):
        return int(self.groups.max()) + 1 if self.n_obs else 0

    @classmethod
    def from_frame(cls, frame, outcome, predictors, group="publisher_id", publisher_columns=()):
        """Build from a DataFrame, dropping rows with missing values listwise."""
        cols = [outcome, *predictors, group]
        missing = [c for c in cols if c not in frame.columns]
        if missing:
            raise InvalidInput(f"columns not in table: {missing}")
        sub = frame[cols]
        num = sub[[outcome, *predictors]].apply(pd.to_numeric, errors="coerce")
        ok = np.isfinite(num.to_numpy(dtype=float)).all(axis=1) & sub[group].notna().to_numpy()
        dropped = int((~ok).sum())
        num = num[ok]
        return cls(num[outcome].to_numpy(float), num[list(predictors)].to_numpy(float),
                   list(predictors), sub[group][ok].astype(str).to_numpy(),
                   publisher_columns=tuple(c for c in publisher_columns if c in predictors),
                   outcome=outcome, dropped=dropped)

    def with_intercept(self):
        X = np.column_stack([np.ones(self.n_obs), self.X])
        return X, [INTERCEPT, *self.names]

    def subset_columns(self, names):
        idx = [self.names.index(n) for n in names]
        return DesignMatrix(self.y, self.X[:, idx], list(names), self.groups, self.group_labels,
                            tuple(c for c in self.publisher_columns if c in names),
                            self.outcome, self.dropped)


def stars(p):
    if not np.isfinite(p):
        return ""
    return "***" if p < 0.001 else "**" if p < 0.01 else "*" if p < 0.05 else ""


@dataclass
class FitResult:
    names: list
    coef: np.ndarray
    se: np.ndarray
    vcov: np.ndarray
    sigma_mu: object = 0.0
    sigma_eps: float = float("nan")
    loglik: float = float("nan")
    method: str = "ML"
    df_resid: float = None
    re_names: list = None
    re_corr: np.ndarray = None
    info: dict = field(default_factory=dict)

    @property
    def stat(self):
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.coef / self.se

    @property
    def pvalues(self):
        s = np.abs(self.stat)
        if self.df_resid is None:
            return 2 * stats.norm.sf(s)
        return 2 * stats.t.sf(s, self.df_resid)

    def __getitem__(self, name):
        return float(self.coef[self.names.index(name)])

    def se_of(self, name):
        return float(self.se[self.names.index(name)])

    def p_of(self, name):
        return float(self.pvalues[self.names.index(name)])

    def table(self):
        p = self.pvalues
        return pd.DataFrame({
            "term": self.names,
            "estimate": self.coef,
            "se": self.se,
            "stat": self.stat,
            "p": p,
            "stars": [stars(x) for x in p],
        })

    def variance_table(self):
        rows = []
        if self.re_names is not None:
            for name, sd in zip(self.re_names, np.atleast_1d(self.sigma_mu)):
                rows.append({"component": f"sd[{name}]", "value": float(sd)})
        elif self.method != "FE":
            rows.append({"component": "sigma_mu", "value": float(self.sigma_mu)})
        rows.append({"component": "sigma_eps", "value": float(self.sigma_eps)})
        rows.append({"component": "loglik", "value": float(self.loglik)})
        rows.append({"component": "n_obs", "value": float(self.info.get("n_obs", np.nan))})
        rows.append({"component": "n_groups", "value": float(self.info.get("n_groups", np.nan))})
        return pd.DataFrame(rows)

    def to_dict(self):
        def plain(v):
            if isinstance(v, np.ndarray):
                return v.tolist()
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            return v
        out = {k: plain(getattr(self, k)) for k in
               ("names", "coef", "se", "vcov", "sigma_mu", "sigma_eps", "loglik", "method",
                "df_resid", "re_names", "re_corr")}
        out["info"] = {k: plain(v) for k, v in self.info.items()}
        return out

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_dict(cls, d):
        kw = dict(d)
        for k in ("coef", "se", "vcov"):
            kw[k] = np.asarray(kw[k], dtype=float)
        if isinstance(kw.get("sigma_mu"), list):
            kw["sigma_mu"] = np.asarray(kw["sigma_mu"])
        if kw.get("re_corr") is not None:
            kw["re_corr"] = np.asarray(kw["re_corr"])
        return cls(**kw)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def check_rank(X, names, rtol=1e-8):
    """Raise ``Collinear`` naming every column that is a combination of earlier ones."""
    X = np.asarray(X, dtype=float)
    basis = []
    bad = []
    for j in range(X.shape[1]):
        v = X[:, j].copy()
        norm0 = np.linalg.norm(v)
        if norm0 == 0.0:
            bad.append(names[j])
            continue
        for _ in range(2):
            for q in basis:
                v -= (q @ v) * q
        r = np.linalg.norm(v)
        if r <= rtol * norm0:
            bad.append(names[j])
        else:
            basis.append(v / r)
    if bad:
        raise Collinear(f"design is rank deficient; dependent columns: {bad}", bad)


def fit_ols(design, intercept=True):
    """Ordinary least squares with classical standard errors."""
    X, names = design.with_intercept() if intercept else (design.X, list(design.names))
    check_rank(X, names)
    beta, *_ = np.linalg.lstsq(X, design.y, rcond=None)
    resid = design.y - X @ beta
    n, p = X.shape
    s2 = float(resid @ resid) / (n - p)
    vcov = s2 * np.linalg.inv(X.T @ X)
    ll = -0.5 * n * (np.log(2 * np.pi * (resid @ resid) / n) + 1)
    return FitResult(names, beta, np.sqrt(np.diag(vcov)), vcov, 0.0, np.sqrt(s2), float(ll),
                     "OLS", df_resid=n - p,
                     info={"n_obs": n, "n_groups": design.n_groups, "dropped": design.dropped})
