"""Re-randomization evaluation of reduce-then-classify pipelines.

Repeatedly re-splits the samples into learning and test sets; per trial it
selects genes, picks the factor count by LOOCV, fits the final reducer and
classifier on learning data, and scores the held-out samples. Reported per
(method, gene-count) cell: mean/sd of the test misclassification rate,
mean/sd of the chosen factor count, and the AUC of the ROC built from all
trials' test scores pooled together.

Every random draw is keyed by (seed, role, trial, ...), so reports are a
pure function of the inputs; the LATRED_THREADS environment variable only
sets how many worker processes share the trials, never the arithmetic.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .data import ClassLabels, ExpressionMatrix, Split, make_splits
from .features import SELECTION_MODES, SelectionConfig, select_random, select_supervised
from .lda import fit_lda, predict_lda, score_class1
from .model_select import DEFAULT_K_GRID, select_k
from .pipeline import DEFAULT_SETTINGS, METHODS, PipelineSettings, fit_reducer, transform
from .preprocess import PreprocessConfig, filter_genes, log_columns, standardize_columns, threshold
from .rng import ROLE_KMEANS_CV, ROLE_KMEANS_FINAL, ROLE_SELECT, derive_seed

STANDARDIZE_MODES = ("paper", "strict")


def mer(predicted, truth) -> float:
    """Misclassification error rate: fraction of labels predicted wrong."""
    p = np.asarray(predicted)
    t = np.asarray(truth)
    if p.shape != t.shape or p.ndim != 1:
        raise ValueError("predictions and truth must be 1-D and equal length")
    if p.size == 0:
        raise ValueError("cannot score an empty prediction set")
    return float(np.mean(p != t))


def roc_curve(scores, truth):
    """(fpr, tpr) arrays swept over the distinct scores, descending.

    truth is 0/1 with 1 the positive class. Tied scores move the curve
    diagonally in one step. The curve starts at (0, 0) and ends at (1, 1).
    """
    s = np.asarray(scores, dtype=np.float64)
    t = np.asarray(truth)
    if s.shape != t.shape or s.ndim != 1:
        raise ValueError("scores and truth must be 1-D and equal length")
    pos = t == 1
    n_pos = int(pos.sum())
    n_neg = int(t.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs at least one sample of each class")
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    hits = np.cumsum(pos[order])
    # last position of each distinct score = one curve vertex
    last = np.append(np.flatnonzero(np.diff(s_sorted) != 0), s.size - 1)
    tp = hits[last]
    fp = (last + 1) - tp
    fpr = np.concatenate(([0.0], fp / n_neg))
    tpr = np.concatenate(([0.0], tp / n_pos))
    return fpr, tpr


def roc_auc(scores, truth) -> float:
    """Trapezoidal area under the ROC curve.

    With tied scores handled diagonally this equals the Mann-Whitney
    statistic (ties counted half) of positives over negatives.
    """
    fpr, tpr = roc_curve(scores, truth)
    return float(np.trapezoid(tpr, fpr))


@dataclass(frozen=True)
class EvalConfig:
    """Everything a re-randomization run depends on."""

    n_learn: int
    trials: int = 100
    methods: tuple = METHODS
    p_stars: tuple = (50, 100, 200)
    select: str = "welch"
    k_grid: tuple = DEFAULT_K_GRID
    seed: int = 0
    preprocess_enabled: bool = True
    standardize: str = "paper"
    preprocess_cfg: PreprocessConfig = field(default_factory=PreprocessConfig)
    settings: PipelineSettings = field(default_factory=PipelineSettings)

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "p_stars", tuple(int(p) for p in self.p_stars))
        object.__setattr__(self, "k_grid", tuple(int(k) for k in self.k_grid))
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if not self.methods or any(m not in METHODS for m in self.methods):
            raise ValueError(f"methods must be drawn from {METHODS}")
        if len(set(self.methods)) != len(self.methods):
            raise ValueError("duplicate method")
        if not self.p_stars or any(p < 1 for p in self.p_stars):
            raise ValueError("p_stars must be positive")
        if len(set(self.p_stars)) != len(self.p_stars):
            raise ValueError("duplicate p_star")
        if self.select not in SELECTION_MODES:
            raise ValueError(f"select must be one of {SELECTION_MODES}")
        if self.standardize not in STANDARDIZE_MODES:
            raise ValueError(f"standardize must be one of {STANDARDIZE_MODES}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass(frozen=True, eq=False)
class TrialOutcome:
    """One (method, p_star, trial) cell of the evaluation."""

    method: str
    p_star: int
    trial: int
    k_star: int
    mer: float
    n_test: int
    scores: np.ndarray      # class-1 posterior per test sample (empty if G > 2)
    truth: np.ndarray       # true class index per test sample
    cv_error: float         # LOOCV error at the chosen k
    fallback_folds: int     # majority-vote folds inside LOOCV


@dataclass(frozen=True, eq=False)
class MethodSummary:
    """Aggregation of one (method, p_star) cell across all trials."""

    method: str
    p_star: int
    trials: int
    mer_mean: float
    mer_sd: float
    k_star_mean: float
    k_star_sd: float
    auc: float              # pooled over all trials' test scores (nan if G > 2)
    roc_fpr: tuple
    roc_tpr: tuple


@dataclass(frozen=True, eq=False)
class EvalReport:
    config: EvalConfig
    outcomes: tuple
    summaries: tuple

    def summary(self, method: str, p_star: int) -> MethodSummary:
        for s in self.summaries:
            if s.method == method and s.p_star == p_star:
                return s
        raise KeyError(f"no summary for ({method}, {p_star})")


def prepare_matrix(m: ExpressionMatrix, cfg: EvalConfig) -> ExpressionMatrix:
    """Run the data-independent preprocessing stages (threshold, filter, log).

    Standardization is left to the evaluation loop because its timing is
    mode-dependent; with preprocessing disabled the matrix passes through
    untouched.
    """
    if not cfg.preprocess_enabled:
        return m
    trimmed = filter_genes(threshold(m, cfg.preprocess_cfg), cfg.preprocess_cfg)
    return ExpressionMatrix(
        log_columns(trimmed.values, cfg.preprocess_cfg.log_base),
        trimmed.sample_ids, trimmed.gene_ids,
    )


def _run_trial(m_base: ExpressionMatrix, labels: ClassLabels, split: Split,
               r: int, cfg: EvalConfig) -> list:
    learn = np.asarray(split.learn_indices, dtype=np.intp)
    test = np.asarray(split.test_indices, dtype=np.intp)
    y_learn = labels.take(learn)
    y_test = labels.labels[test]

    if cfg.preprocess_enabled and cfg.standardize == "strict":
        # re-standardize with learning statistics only; test rows ride
        # through the same per-gene affine map
        _, mapped = standardize_columns(m_base.values[learn], m_base.values)
        m_std = ExpressionMatrix(mapped, m_base.sample_ids, m_base.gene_ids)
    else:
        m_std = m_base
    m_learn_all = m_std.take_samples(learn)
    m_test_all = m_std.take_samples(test)

    binary = labels.n_classes == 2
    outcomes = []
    for p_star in cfg.p_stars:
        scfg = SelectionConfig(cfg.select, p_star,
                               derive_seed(cfg.seed, ROLE_SELECT, r, p_star))
        if cfg.select == "welch":
            genes = select_supervised(m_learn_all, y_learn, scfg)
        else:
            genes = select_random(m_learn_all, scfg)
        m_learn = m_learn_all.take_genes(genes)
        m_test = m_test_all.take_genes(genes)
        for mi, method in enumerate(cfg.methods):
            chosen = select_k(method, m_learn, y_learn, cfg.k_grid,
                              derive_seed(cfg.seed, ROLE_KMEANS_CV, r, p_star, mi),
                              cfg.settings)
            red = fit_reducer(method, m_learn, chosen.k_star,
                              derive_seed(cfg.seed, ROLE_KMEANS_FINAL, r, p_star, mi),
                              cfg.settings)
            model = fit_lda(transform(red, m_learn), y_learn,
                            priors=cfg.settings.lda_priors,
                            ridge_eps=cfg.settings.lda_ridge_eps)
            f_test = transform(red, m_test)
            pred = predict_lda(model, f_test)
            scores = score_class1(model, f_test) if binary else np.empty(0)
            outcomes.append(TrialOutcome(
                method=method,
                p_star=p_star,
                trial=r,
                k_star=chosen.k_star,
                mer=mer(pred, y_test),
                n_test=int(test.size),
                scores=scores,
                truth=y_test.copy(),
                cv_error=chosen.error_by_k()[chosen.k_star],
                fallback_folds=chosen.fallback_folds,
            ))
    return outcomes


def _trial_task(args):
    return _run_trial(*args)


def worker_count() -> int:
    """Worker processes to use, from LATRED_THREADS (default 1)."""
    raw = os.environ.get("LATRED_THREADS", "1").strip()
    try:
        w = int(raw)
    except ValueError:
        raise ValueError(f"LATRED_THREADS must be an integer, got {raw!r}") from None
    return max(1, w)


def _summarize(cfg: EvalConfig, outcomes: list, binary: bool) -> tuple:
    summaries = []
    for method in cfg.methods:
        for p_star in cfg.p_stars:
            cell = [o for o in outcomes if o.method == method and o.p_star == p_star]
            cell.sort(key=lambda o: o.trial)
            mers = np.array([o.mer for o in cell])
            ks = np.array([o.k_star for o in cell], dtype=np.float64)
            sd = (float(np.std(mers, ddof=1)), float(np.std(ks, ddof=1))) \
                if len(cell) > 1 else (0.0, 0.0)
            auc = float("nan")
            fpr = tpr = ()
            if binary:
                pooled_s = np.concatenate([o.scores for o in cell])
                pooled_t = np.concatenate([o.truth for o in cell])
                if 0 < pooled_t.sum() < pooled_t.size:
                    f, t = roc_curve(pooled_s, pooled_t)
                    auc = float(np.trapezoid(t, f))
                    fpr, tpr = tuple(f), tuple(t)
            summaries.append(MethodSummary(
                method=method,
                p_star=p_star,
                trials=len(cell),
                mer_mean=float(mers.mean()),
                mer_sd=sd[0],
                k_star_mean=float(ks.mean()),
                k_star_sd=sd[1],
                auc=auc,
                roc_fpr=fpr,
                roc_tpr=tpr,
            ))
    return tuple(summaries)


def run_evaluation(m: ExpressionMatrix, labels: ClassLabels, cfg: EvalConfig) -> EvalReport:
    """Full re-randomization study on one dataset.

    Trials are independent given the seed, so they may be farmed out to
    LATRED_THREADS worker processes; results are reassembled in trial
    order and are byte-identical for any worker count.
    """
    if labels.labels.size != m.n_samples:
        raise ValueError("labels do not match the matrix")
    m_base = prepare_matrix(m, cfg)
    if cfg.preprocess_enabled and cfg.standardize == "paper":
        # one global standardization, replicating the original protocol
        # (test samples contribute to the per-gene statistics)
        m_base = ExpressionMatrix(standardize_columns(m_base.values),
                                  m_base.sample_ids, m_base.gene_ids)
    if max(cfg.p_stars) > m_base.n_genes:
        raise ValueError(
            f"p_star {max(cfg.p_stars)} exceeds the {m_base.n_genes} genes "
            "available after preprocessing"
        )

    splits = make_splits(m.n_samples, cfg.n_learn, labels, cfg.trials, cfg.seed)
    tasks = [(m_base, labels, splits[r], r, cfg) for r in range(cfg.trials)]
    workers = worker_count()
    if workers == 1 or cfg.trials == 1:
        per_trial = [_trial_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, cfg.trials)) as ex:
            per_trial = list(ex.map(_trial_task, tasks))

    outcomes = [o for chunk in per_trial for o in chunk]
    outcomes.sort(key=lambda o: (cfg.methods.index(o.method), o.p_star, o.trial))
    summaries = _summarize(cfg, outcomes, labels.n_classes == 2)
    return EvalReport(config=cfg, outcomes=tuple(outcomes), summaries=summaries)


def _fmt(v) -> str:
    return format(float(v), ".6g")


def write_report_csv(report: EvalReport, path) -> None:
    """Summary table: method,p_star,mer,mer_sd,k_star,k_star_sd,auc."""
    lines = ["method,p_star,mer,mer_sd,k_star,k_star_sd,auc"]
    for s in report.summaries:
        lines.append(",".join([
            s.method, str(s.p_star), _fmt(s.mer_mean), _fmt(s.mer_sd),
            _fmt(s.k_star_mean), _fmt(s.k_star_sd), _fmt(s.auc),
        ]))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_roc_csv(report: EvalReport, path) -> None:
    """Pooled ROC vertices: method,p_star,fpr,tpr (one row per vertex)."""
    lines = ["method,p_star,fpr,tpr"]
    for s in report.summaries:
        for f, t in zip(s.roc_fpr, s.roc_tpr):
            lines.append(f"{s.method},{s.p_star},{_fmt(f)},{_fmt(t)}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
