"""Run configuration: one flat key=value file plus CLI overrides.

The file format is intentionally plain: one ``key = value`` per line,
``#`` comments, blank lines ignored. Every key is checked against the
registry below so typos fail loudly instead of silently using a default.
Command-line flags always win over file values.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .evaluate import STANDARDIZE_MODES, EvalConfig
from .features import SELECTION_MODES
from .lda import PRIOR_MODES, RIDGE_EPS
from .modelio import FitConfig
from .pipeline import METHODS, PipelineSettings
from .preprocess import PreprocessConfig
from .rasch import BINARIZATION_SCOPES


class ConfigError(ValueError):
    """Raised for malformed config files or invalid values."""


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {raw!r}")


def _parse_int(raw: str) -> int:
    try:
        return int(raw.strip())
    except ValueError:
        raise ConfigError(f"expected an integer, got {raw!r}") from None


def _parse_float(raw: str) -> float:
    try:
        return float(raw.strip())
    except ValueError:
        raise ConfigError(f"expected a number, got {raw!r}") from None


def _parse_int_list(raw: str) -> tuple:
    return tuple(_parse_int(part) for part in raw.split(",") if part.strip())


def _parse_str(raw: str) -> str:
    return raw.strip()


def _parse_method(raw: str) -> tuple:
    choice = raw.strip().lower()
    mapping = {"rm": ("RM",), "pca": ("PCA",), "both": ("RM", "PCA")}
    if choice not in mapping:
        raise ConfigError(f"method must be rm, pca, or both, got {raw!r}")
    return mapping[choice]


@dataclass
class RunConfig:
    """Flat bag of every tunable, with library defaults.

    ``seed`` starts unset (-1): runs that draw random numbers refuse to
    start without an explicit seed, so no result is accidentally
    irreproducible.
    """

    seed: int = -1
    trials: int = 100
    n_learn: int = 0              # 0 means "not set"
    methods: tuple = METHODS
    p_stars: tuple = (50, 100, 200)
    select: str = "welch"
    k_grid: tuple = (1, 2, 3, 4, 5)
    k: int = 0                    # 0 means "choose by LOOCV"
    standardize: str = "paper"
    preprocess_enabled: bool = True
    floor: float = 100.0
    ceiling: float = 16000.0
    min_fold: float = 5.0
    min_range: float = 500.0
    log_base: float = 10.0
    scope: str = "global_median"
    nodes: int = 21
    beta_clip: float = 10.0
    em_tol: float = 1e-5
    em_max_iter: int = 500
    restarts: int = 10
    kmeans_max_iter: int = 300
    lda_priors: str = "empirical"
    lda_ridge_eps: float = RIDGE_EPS

    def preprocess_cfg(self) -> PreprocessConfig:
        return PreprocessConfig(floor=self.floor, ceiling=self.ceiling,
                                min_fold=self.min_fold, min_range=self.min_range,
                                log_base=self.log_base)

    def settings(self) -> PipelineSettings:
        return PipelineSettings(scope=self.scope, restarts=self.restarts,
                                kmeans_max_iter=self.kmeans_max_iter,
                                nodes=self.nodes, beta_clip=self.beta_clip,
                                em_tol=self.em_tol, em_max_iter=self.em_max_iter,
                                lda_priors=self.lda_priors,
                                lda_ridge_eps=self.lda_ridge_eps)

    def require_seed(self) -> int:
        if self.seed < 0:
            raise ConfigError("seed is required (flag --seed or key seed)")
        return self.seed

    def to_eval_config(self) -> EvalConfig:
        self.require_seed()
        if self.n_learn < 2:
            raise ConfigError("n_learn is required (flag --n-learn or key n_learn)")
        try:
            return EvalConfig(
                n_learn=self.n_learn, trials=self.trials, methods=self.methods,
                p_stars=self.p_stars, select=self.select, k_grid=self.k_grid,
                seed=self.seed, preprocess_enabled=self.preprocess_enabled,
                standardize=self.standardize,
                preprocess_cfg=self.preprocess_cfg(), settings=self.settings(),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def to_fit_config(self) -> FitConfig:
        self.require_seed()
        if len(self.methods) != 1:
            raise ConfigError("fitting needs exactly one method (rm or pca)")
        if len(self.p_stars) > 1:
            raise ConfigError("fitting needs a single p_star")
        select = self.select if self.p_stars else "none"
        try:
            return FitConfig(
                method=self.methods[0], select=select,
                p_star=self.p_stars[0] if self.p_stars else None,
                k=self.k or None, k_grid=self.k_grid, seed=self.seed,
                preprocess_enabled=self.preprocess_enabled,
                preprocess_cfg=self.preprocess_cfg(), settings=self.settings(),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


# key -> (RunConfig attribute, parser)
KNOWN_KEYS = {
    "seed": ("seed", _parse_int),
    "trials": ("trials", _parse_int),
    "n_learn": ("n_learn", _parse_int),
    "method": ("methods", _parse_method),
    "select.mode": ("select", _parse_str),
    "select.p_star": ("p_stars", _parse_int_list),
    "k_grid": ("k_grid", _parse_int_list),
    "k": ("k", _parse_int),
    "preprocess.mode": ("standardize", _parse_str),
    "preprocess.enabled": ("preprocess_enabled", _parse_bool),
    "preprocess.floor": ("floor", _parse_float),
    "preprocess.ceiling": ("ceiling", _parse_float),
    "preprocess.min_fold": ("min_fold", _parse_float),
    "preprocess.min_range": ("min_range", _parse_float),
    "preprocess.log_base": ("log_base", _parse_float),
    "binarize.scope": ("scope", _parse_str),
    "rasch.quadrature_nodes": ("nodes", _parse_int),
    "rasch.beta_clip": ("beta_clip", _parse_float),
    "rasch.em_tol": ("em_tol", _parse_float),
    "rasch.em_max_iter": ("em_max_iter", _parse_int),
    "kmeans.restarts": ("restarts", _parse_int),
    "kmeans.max_iter": ("kmeans_max_iter", _parse_int),
    "lda.priors": ("lda_priors", _parse_str),
    "lda.ridge_eps": ("lda_ridge_eps", _parse_float),
}

_CHOICE_KEYS = {
    "select.mode": SELECTION_MODES,
    "preprocess.mode": STANDARDIZE_MODES,
    "binarize.scope": BINARIZATION_SCOPES,
    "lda.priors": PRIOR_MODES,
}


def read_config_file(path) -> dict:
    """Parse a key=value file into {known key: raw string}."""
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigError(
                    f"bad config line {lineno}: {line.strip()!r} (expected key=value)"
                )
            key, raw = (part.strip() for part in text.split("=", 1))
            if key not in KNOWN_KEYS:
                raise ConfigError(f"unknown config key: {key!r}")
            values[key] = raw
    return values


def apply_values(cfg: RunConfig, values: dict) -> RunConfig:
    """Overlay raw key=value strings onto a RunConfig; returns a new one."""
    updates = {}
    for key, raw in values.items():
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown config key: {key!r}")
        attr, parser = KNOWN_KEYS[key]
        try:
            value = parser(raw)
        except ConfigError as exc:
            raise ConfigError(f"config key {key!r}: {exc}") from None
        allowed = _CHOICE_KEYS.get(key)
        if allowed and value not in allowed:
            raise ConfigError(f"config key {key!r} must be one of {allowed}")
        updates[attr] = value
    return replace(cfg, **updates)


def load_run_config(path=None, overrides: dict = None) -> RunConfig:
    """Defaults, then the file (if any), then explicit overrides."""
    cfg = RunConfig()
    if path is not None:
        cfg = apply_values(cfg, read_config_file(path))
    if overrides:
        cfg = apply_values(cfg, overrides)
    return cfg
