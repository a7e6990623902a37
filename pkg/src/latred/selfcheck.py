"""Built-in verification: fast numerical checks against known answers.

Runs in seconds with no test dependencies, meant as a post-install smoke
test (``latred --mode selfcheck``). Each check prints one ok/FAIL line;
the full oracle-driven suite lives in the package's tests.
"""
from __future__ import annotations

import numpy as np

from .data import ClassLabels, ExpressionMatrix
from .evaluate import EvalConfig, roc_auc, run_evaluation
from .lda import fit_lda, predict_lda
from .pca import pca_fit
from .rasch import RaschPartitionModel, eap_score, fit_rasch, gauss_hermite_normal
from .rng import substream
from .synth import SynthSpec, gen_rasch_responses, gen_two_class


def _ranks(x: np.ndarray) -> np.ndarray:
    # average ranks with tie midranks
    order = np.argsort(x, kind="stable")
    ranks = np.empty(x.size)
    ranks[order] = np.arange(1, x.size + 1)
    _, inv, counts = np.unique(x, return_inverse=True, return_counts=True)
    sums = np.bincount(inv, weights=ranks)
    return sums[inv] / counts[inv]


def _spearman(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.corrcoef(_ranks(a), _ranks(b))[0, 1])


def _check_rasch_recovery() -> str:
    rng = substream(2024, 1)
    beta_true = rng.uniform(-2.0, 2.0, size=30)
    responses, _ = gen_rasch_responses(500, beta_true, seed=7)
    model = fit_rasch(responses)
    rmse = float(np.sqrt(np.mean((model.beta - beta_true) ** 2)))
    if rmse >= 0.15:
        return f"item recovery rmse {rmse:.4f} >= 0.15"
    diffs = np.diff(model.loglik_trace)
    if diffs.size and diffs.min() < -1e-8:
        return f"log-likelihood decreased by {-diffs.min():.2e}"
    return ""


def _check_eap_sufficiency() -> str:
    eta, w = gauss_hermite_normal(21)
    pm = RaschPartitionModel(np.zeros(5), eta.copy(), w.copy(), 0.0, 0, (0.0,))
    by_total = {}
    for code in range(32):
        pattern = [(code >> b) & 1 for b in range(5)]
        score = eap_score(pm, pattern)
        by_total.setdefault(sum(pattern), set()).add(round(score, 12))
    if any(len(v) > 1 for v in by_total.values()):
        return "EAP differs across patterns with equal totals"
    means = [min(by_total[t]) for t in sorted(by_total)]
    if any(b <= a for a, b in zip(means, means[1:])):
        return "EAP not increasing in the total score"
    if abs(means[2] + means[3]) > 1e-9:
        return "EAP not antisymmetric around half the items"
    return ""


def _check_pca_oracle() -> str:
    for trial in range(10):
        rng = substream(99, trial)
        x = rng.standard_normal((12, 6))
        m = ExpressionMatrix(x, [f"s{i}" for i in range(12)], [f"g{j}" for j in range(6)])
        red = pca_fit(m, 6)
        xc = x - x.mean(axis=0)
        cov = xc.T @ xc / 11
        resid = cov @ red.loadings - red.loadings * red.eigenvalues[:6]
        if np.abs(resid).max() > 1e-8:
            return f"eigenpair residual {np.abs(resid).max():.2e}"
        if abs(red.eigenvalues.sum() - np.trace(cov)) > 1e-8:
            return "eigenvalue sum != covariance trace"
    return ""


def _check_auc_pairwise() -> str:
    rng = substream(17)
    for _ in range(200):
        n = int(rng.integers(4, 30))
        truth = rng.integers(0, 2, size=n)
        if truth.min() == truth.max():
            continue
        scores = np.round(rng.standard_normal(n), 1)  # force ties
        pos = scores[truth == 1]
        neg = scores[truth == 0]
        wins = (pos[:, None] > neg[None, :]).sum() + 0.5 * (pos[:, None] == neg[None, :]).sum()
        direct = wins / (pos.size * neg.size)
        if abs(roc_auc(scores, truth) - direct) > 1e-12:
            return "trapezoidal AUC != pairwise comparison fraction"
    return ""


def _check_lda_blobs() -> str:
    rng = substream(5)
    train = np.vstack([rng.standard_normal((200, 2)) + (-2, 0),
                       rng.standard_normal((200, 2)) + (2, 0)])
    test = np.vstack([rng.standard_normal((1000, 2)) + (-2, 0),
                      rng.standard_normal((1000, 2)) + (2, 0)])
    y_train = ClassLabels(np.repeat([0, 1], 200), ("a", "b"))
    y_test = np.repeat([0, 1], 1000)
    model = fit_lda(train, y_train)
    err = float(np.mean(predict_lda(model, test) != y_test))
    return f"blob error {err:.3f} > 0.06" if err > 0.06 else ""


def _check_end_to_end() -> str:
    spec = SynthSpec(n=48, p=60, n_informative=12, shift=2.0, seed=3)
    m, labels = gen_two_class(spec)
    cfg = EvalConfig(n_learn=24, trials=3, p_stars=(20,), k_grid=(1, 2),
                     seed=11, preprocess_enabled=False)
    report = run_evaluation(m, labels, cfg)
    s = report.summary("RM", 20)
    if s.mer_mean >= 0.35:
        return f"end-to-end RM error {s.mer_mean:.3f} >= 0.35"
    if not np.isfinite(s.auc) or s.auc <= 0.6:
        return f"end-to-end RM AUC {s.auc:.3f} <= 0.6"
    return ""


CHECKS = (
    ("rasch item recovery", _check_rasch_recovery),
    ("eap total-score sufficiency", _check_eap_sufficiency),
    ("pca eigenpair oracle", _check_pca_oracle),
    ("auc pairwise identity", _check_auc_pairwise),
    ("lda gaussian blobs", _check_lda_blobs),
    ("end-to-end smoke", _check_end_to_end),
)


def run_selfcheck(out=print) -> int:
    """Run every check; returns the number of failures."""
    failures = 0
    for name, check in CHECKS:
        detail = check()
        if detail:
            failures += 1
            out(f"FAIL - {name}: {detail}")
        else:
            out(f"ok - {name}")
    return failures
