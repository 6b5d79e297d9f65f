"""Temporal evaluation protocol and significance statistics.

The experiment trains every configured model twice (soil-only columns vs.
soil+weather columns of the same instances), scores both with MAE on the
held-out year, compares models within a mode by z-scores against the
panel mean, and compares the two modes per model with a one-tailed paired
t-test on absolute errors.

The normal CDF comes from math.erf; the Student-t upper tail is computed
from the regularized incomplete beta function via its continued-fraction
expansion (Lentz's method), accurate to well below 1e-9 over the df range
used here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .domain import Instance
from .features import (
    DEFAULT_FEATURE_PARAMS,
    FeatureParams,
    MODE_SOIL,
    MODE_SOIL_WEATHER,
    DesignMatrix,
    build_matrix,
)
from .learners import ModelParams, predict, train_on_matrix

B_LESS_THAN_A = "b_less_than_a"
A_LESS_THAN_B = "a_less_than_b"


def normal_cdf(z: float) -> float:
    """Standard normal CDF."""
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (Lentz)."""
    max_iter = 300
    eps = 3e-16
    fpmin = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def incomplete_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_sf(t: float, df: float) -> float:
    """Upper-tail probability P(T > t) for Student-t with df degrees."""
    if df <= 0:
        raise ValueError("df must be positive")
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    x = df / (df + t * t)
    p = 0.5 * incomplete_beta(df / 2.0, 0.5, x)
    return p if t >= 0 else 1.0 - p


def temporal_split(
    instances: list[Instance],
    test_year: int,
    train_start: int | None = None,
    train_end: int | None = None,
) -> tuple[list[Instance], list[Instance]]:
    """Train on years before test_year (clamped to the configured range),
    test on test_year exactly. Raises when either side is empty."""
    train = [
        inst
        for inst in instances
        if inst.year < test_year
        and (train_start is None or inst.year >= train_start)
        and (train_end is None or inst.year <= train_end)
    ]
    test = [inst for inst in instances if inst.year == test_year]
    if not train:
        raise ValueError(f"empty training set for test year {test_year}")
    if not test:
        raise ValueError(f"no instances in test year {test_year}")
    return train, test


def mae(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    """Mean absolute error in t/ha."""
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise ValueError(f"length mismatch: {y_true.shape} vs {y_pred.shape}")
    if y_true.size == 0:
        raise ValueError("mae of empty vectors")
    return float(np.mean(np.abs(y_true - y_pred)))


def zscore_panel(maes: dict[str, float]) -> dict[str, tuple[float, float]]:
    """Per-model (z, p) against the panel of MAEs.

    z uses the population standard deviation of the panel; p is the
    upper-tail normal probability 1 - Phi(z). When every MAE is equal the
    convention is z = 0, p = 0.5 for all models.
    """
    if len(maes) < 2:
        raise ValueError("zscore_panel needs at least two models")
    values = np.array(list(maes.values()), dtype=np.float64)
    mean = float(values.mean())
    std = float(values.std())  # population std
    # a panel of identical values can still show a rounding-level std
    if std <= 1e-12 * max(1.0, abs(mean)):
        std = 0.0
    out: dict[str, tuple[float, float]] = {}
    for name, value in maes.items():
        z = 0.0 if std == 0.0 else (value - mean) / std
        out[name] = (z, 1.0 - normal_cdf(z))
    return out


def paired_t_one_tailed(
    err_a: np.ndarray,
    err_b: np.ndarray,
    alternative: str = B_LESS_THAN_A,
) -> tuple[float, float]:
    """One-tailed paired t-test on per-instance error vectors.

    With the default alternative, a small p supports "b has smaller
    errors than a". Zero-variance conventions: mean 0 -> (0, 0.5);
    nonzero mean -> (+-inf, 0 or 1) by sign.
    """
    err_a = np.asarray(err_a, dtype=np.float64)
    err_b = np.asarray(err_b, dtype=np.float64)
    if err_a.shape != err_b.shape or err_a.ndim != 1:
        raise ValueError("paired vectors must have identical shape")
    n = err_a.size
    if n < 2:
        raise ValueError("paired t-test needs n >= 2")
    if alternative == B_LESS_THAN_A:
        d = err_a - err_b
    elif alternative == A_LESS_THAN_B:
        d = err_b - err_a
    else:
        raise ValueError(f"unknown alternative: {alternative!r}")
    mean = float(d.mean())
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        if mean == 0.0:
            return 0.0, 0.5
        t = math.inf if mean > 0 else -math.inf
        return t, student_t_sf(t, n - 1)
    t = mean / (sd / math.sqrt(n))
    return t, student_t_sf(t, n - 1)


@dataclass(frozen=True)
class ReportRow:
    model: str
    mae_soil: float | None = None
    mae_sw: float | None = None
    z_soil: float | None = None
    p_soil: float | None = None
    z_sw: float | None = None
    p_sw: float | None = None
    t_paired: float | None = None
    p_paired: float | None = None


@dataclass
class Report:
    rows: list[ReportRow]
    train_years: tuple[int, ...]
    test_year: int
    seed: int
    config_digest: str
    n_train: int = 0
    n_test: int = 0

    def row(self, model: str) -> ReportRow:
        for r in self.rows:
            if r.model == model:
                return r
        raise KeyError(model)


@dataclass
class ExperimentConfig:
    """Everything run_experiment needs besides the instances."""

    models: list[str]
    model_params: dict[str, ModelParams]
    test_year: int = 2018
    train_start: int | None = 2013
    train_end: int | None = 2017
    seed: int = 0
    mode: str = "both"  # soil_only | soil_weather | both
    paired_alternative: str = B_LESS_THAN_A
    feature_params: FeatureParams = field(default_factory=lambda: DEFAULT_FEATURE_PARAMS)
    n_jobs: int = 1
    config_digest: str = ""


def run_experiment(instances: list[Instance], cfg: ExperimentConfig) -> Report:
    """Train every configured model per mode and assemble the report.

    Instances must carry weather features when a weather mode is
    requested; soil-only matrices reuse the same instances so the paired
    comparison is over identical zone-years.
    """
    if not cfg.models:
        raise ValueError("no models configured")
    train_insts, test_insts = temporal_split(
        instances, cfg.test_year, cfg.train_start, cfg.train_end
    )
    want_soil = cfg.mode in ("both", MODE_SOIL)
    want_sw = cfg.mode in ("both", MODE_SOIL_WEATHER)
    if not (want_soil or want_sw):
        raise ValueError(f"unknown mode: {cfg.mode!r}")

    matrices: dict[str, tuple[DesignMatrix, DesignMatrix]] = {}
    if want_soil:
        matrices[MODE_SOIL] = (
            build_matrix(train_insts, MODE_SOIL, cfg.feature_params),
            build_matrix(test_insts, MODE_SOIL, cfg.feature_params),
        )
    if want_sw:
        matrices[MODE_SOIL_WEATHER] = (
            build_matrix(train_insts, MODE_SOIL_WEATHER, cfg.feature_params),
            build_matrix(test_insts, MODE_SOIL_WEATHER, cfg.feature_params),
        )

    abs_errors: dict[str, dict[str, np.ndarray]] = {m: {} for m in cfg.models}
    maes: dict[str, dict[str, float]] = {m: {} for m in cfg.models}
    for kind in cfg.models:
        params = cfg.model_params[kind]
        for mode, (train_dm, test_dm) in matrices.items():
            model = train_on_matrix(kind, train_dm, params, n_jobs=cfg.n_jobs)
            pred = predict(model, test_dm)
            err = np.abs(test_dm.target - pred)
            abs_errors[kind][mode] = err
            maes[kind][mode] = float(np.mean(err))

    z_soil = z_sw = None
    if want_soil and len(cfg.models) >= 2:
        z_soil = zscore_panel({m: maes[m][MODE_SOIL] for m in cfg.models})
    if want_sw and len(cfg.models) >= 2:
        z_sw = zscore_panel({m: maes[m][MODE_SOIL_WEATHER] for m in cfg.models})

    rows: list[ReportRow] = []
    for kind in cfg.models:
        t_paired = p_paired = None
        if want_soil and want_sw:
            t_paired, p_paired = paired_t_one_tailed(
                abs_errors[kind][MODE_SOIL],
                abs_errors[kind][MODE_SOIL_WEATHER],
                cfg.paired_alternative,
            )
        rows.append(
            ReportRow(
                model=kind,
                mae_soil=maes[kind].get(MODE_SOIL),
                mae_sw=maes[kind].get(MODE_SOIL_WEATHER),
                z_soil=z_soil[kind][0] if z_soil else None,
                p_soil=z_soil[kind][1] if z_soil else None,
                z_sw=z_sw[kind][0] if z_sw else None,
                p_sw=z_sw[kind][1] if z_sw else None,
                t_paired=t_paired,
                p_paired=p_paired,
            )
        )
    return Report(
        rows=rows,
        train_years=tuple(sorted({i.year for i in train_insts})),
        test_year=cfg.test_year,
        seed=cfg.seed,
        config_digest=cfg.config_digest,
        n_train=len(train_insts),
        n_test=len(test_insts),
    )
