"""Three-step (Baron-Kenny) mediation with coefficient-comparison classification."""

from dataclasses import asdict, dataclass, field

import numpy as np
import pandas as pd

from ..exceptions import InvalidInput
from .design import DesignMatrix, fit_ols
from .mixed import fit_random_intercept

NONE, PARTIAL, COMPLETE = "None", "Partial", "Complete"


@dataclass
class MediationRow:
    emotion: str
    mediator: str
    outcome: str
    path_a: float
    path_a_p: float
    total: float
    total_p: float
    direct: float
    direct_p: float
    mediator_coef: float
    mediator_p: float
    classification: str
    identity_gap: float


@dataclass
class MediationReport:
    rows: list
    dropped: int = 0
    mode: str = "mixed"
    significance: float = 0.05
    fits: dict = field(default_factory=dict, repr=False)

    def to_frame(self):
        return pd.DataFrame([asdict(r) for r in self.rows])

    def classification(self, emotion):
        for r in self.rows:
            if r.emotion == emotion:
                return r.classification
        raise KeyError(emotion)


def classify(a_p, total, total_p, direct, direct_p, significance=0.05):
    """Complete: a and step-2 significant, step-3 not. Partial: all three significant
    and the step-3 coefficient shrinks in magnitude. None otherwise."""
    a_sig = a_p < significance
    total_sig = total_p < significance
    direct_sig = direct_p < significance
    if a_sig and total_sig and not direct_sig:
        return COMPLETE
    if a_sig and total_sig and direct_sig and abs(direct) < abs(total):
        return PARTIAL
    return NONE


def mediation_analysis(frame, outcome, mediator, emotions, controls=(), group="publisher_id",
                       publisher_columns=(), mode="mixed", method="REML", significance=0.05):
    """Run the mediator, total-effect and direct-effect regressions for each emotion.

    ``mode='mixed'`` fits random-intercept models (the default);
    ``mode='ols'`` fits pooled OLS, where ``total = direct + a * b`` holds
    exactly. Rows missing the mediator or outcome are dropped listwise first.
    """
    emotions = list(emotions)
    controls = [c for c in controls if c not in emotions]
    predictors = emotions + controls
    needed = [outcome, mediator, *predictors, group]
    missing = [c for c in needed if c not in frame.columns]
    if missing:
        raise InvalidInput(f"columns not in table: {missing}")
    num = frame[[outcome, mediator, *predictors]].apply(pd.to_numeric, errors="coerce")
    ok = np.isfinite(num.to_numpy(dtype=float)).all(axis=1)
    data = frame.loc[ok]
    dropped = int((~ok).sum())

    if mode == "mixed":
        fit = lambda d: fit_random_intercept(d, method)  # noqa: E731
    elif mode == "ols":
        fit = fit_ols
    else:
        raise InvalidInput("mode must be 'mixed' or 'ols'")
    pubs = tuple(publisher_columns)

    step1 = fit(DesignMatrix.from_frame(data, mediator, predictors, group, pubs))
    step2 = fit(DesignMatrix.from_frame(data, outcome, predictors, group, pubs))
    step3 = fit(DesignMatrix.from_frame(data, outcome, predictors + [mediator], group, pubs))
    b, b_p = step3[mediator], step3.p_of(mediator)

    rows = []
    for e in emotions:
        a, a_p = step1[e], step1.p_of(e)
        total, total_p = step2[e], step2.p_of(e)
        direct, direct_p = step3[e], step3.p_of(e)
        rows.append(MediationRow(
            emotion=e, mediator=mediator, outcome=outcome, path_a=a, path_a_p=a_p,
            total=total, total_p=total_p, direct=direct, direct_p=direct_p,
            mediator_coef=b, mediator_p=b_p,
            classification=classify(a_p, total, total_p, direct, direct_p, significance),
            identity_gap=total - (direct + a * b),
        ))
    return MediationReport(rows, dropped, mode, significance,
                           fits={"mediator": step1, "total": step2, "direct": step3})
