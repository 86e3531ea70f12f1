"""Fitted classifier: penalty modes, prediction, and a versioned text file format."""
import json
from dataclasses import dataclass, field

import numpy as np

from .data import Standardizer, standardize
from .errors import DataError
from .path import adaptive_weights
from .solver import PenaltySpec, SolverConfig, fit_fixed, kkt_residuals, objective

MODES = ("lasso", "enet", "aenet")
FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class DwdModel:
    """Coefficients live on the standardized scale of the retained columns."""
    beta0: float
    beta: np.ndarray
    standardizer: Standardizer
    penalty: PenaltySpec
    mode: str
    lambda1_selected: float
    meta: dict = field(default_factory=dict)
    label_names: tuple | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "lasso" and self.penalty.lambda2 != 0:
            raise ValueError("lasso mode requires lambda2 = 0")
        if self.mode in ("lasso", "enet") and self.penalty.weights is not None \
                and not np.all(self.penalty.weights == 1.0):
            raise ValueError(f"{self.mode} mode requires unit weights")
        beta = np.asarray(self.beta, dtype=np.float64)
        if beta.shape != (self.standardizer.kept.shape[0],):
            raise ValueError("coefficient length does not match the retained features")
        object.__setattr__(self, "beta", beta)

    @property
    def p(self):
        return self.standardizer.p_in

    @property
    def support(self):
        """Raw column indices with nonzero coefficients."""
        return self.standardizer.kept[np.flatnonzero(self.beta)]

    def original_scale(self):
        """(intercept, coefficients) acting on raw, unstandardized features."""
        kept = self.standardizer.kept
        coef = np.zeros(self.p)
        coef[kept] = self.beta / self.standardizer.scales[kept]
        return self.beta0 - float(coef @ self.standardizer.means), coef

    def label_for(self, cls):
        if self.label_names is None:
            return str(int(cls))
        return self.label_names[1] if cls > 0 else self.label_names[0]


def predict_score(m, raw):
    """beta0 + z' beta for one raw row or a matrix of rows."""
    z = m.standardizer.transform(raw)
    return m.beta0 + z @ m.beta


def predict_class(m, raw):
    """Sign of the score in {-1, +1}; a score of exactly 0 maps to +1."""
    s = predict_score(m, raw)
    out = np.where(s >= 0, 1, -1)
    return int(out) if np.ndim(out) == 0 else out


def _check_mode(mode, lambda2):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if mode == "lasso" and lambda2 != 0:
        raise ValueError("lasso mode forces lambda2 = 0")


def fit_model(raw, mode, lambda1, lambda2=0.0, stage1_lambda1=None, cfg=None, meta=None):
    """Standardize ``raw`` and fit one model at fixed (lambda1, lambda2).

    For ``aenet`` an elastic-net fit at (``stage1_lambda1`` or ``lambda1``,
    ``lambda2``) supplies the adaptive weights.
    """
    _check_mode(mode, lambda2)
    raw.check_fittable()
    data, std = standardize(raw)
    cfg = cfg or SolverConfig()
    weights = None
    info = {"n": data.n, "p": raw.p}
    if mode == "aenet":
        s1 = stage1_lambda1 if stage1_lambda1 is not None else lambda1
        first = fit_fixed(data, PenaltySpec(s1, lambda2), cfg=cfg)
        weights = adaptive_weights(first.beta, data.n)
        info["stage1_lambda1"] = float(s1)
    pen = PenaltySpec(lambda1, lambda2, weights)
    state = fit_fixed(data, pen, cfg=cfg)
    info["objective"] = objective(state, data, pen)
    info["kkt_max"] = float(np.max(kkt_residuals(state, data, pen), initial=0.0))
    info.update(meta or {})
    return DwdModel(state.beta0, state.beta, std, pen, mode, float(lambda1), info,
                    raw.label_names)


def model_from_path(sp, k, standardizer, mode, label_names=None, meta=None):
    pen = PenaltySpec(float(sp.lambda1_grid[k]), sp.lambda2,
                      None if mode != "aenet" else sp.weights)
    return DwdModel(float(sp.intercepts[k]), sp.coef(k), standardizer, pen, mode,
                    float(sp.lambda1_grid[k]), dict(meta or {}), label_names)


def _jsonable(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    return v


def save_model(m, path):
    """Write a JSON document; floats use Python's round-trip repr (bit exact)."""
    nz = np.flatnonzero(m.beta)
    doc = {
        "format": "sdwd-model",
        "format_version": FORMAT_VERSION,
        "mode": m.mode,
        "lambda1": m.penalty.lambda1,
        "lambda2": m.penalty.lambda2,
        "lambda1_selected": m.lambda1_selected,
        "weights": None if m.penalty.weights is None else m.penalty.weights.tolist(),
        "intercept": m.beta0,
        "n_coef": int(m.beta.shape[0]),
        "coefficients": [[int(j), float(m.beta[j])] for j in nz],
        "standardizer": {
            "means": m.standardizer.means.tolist(),
            "scales": m.standardizer.scales.tolist(),
            "dropped": sorted(m.standardizer.dropped),
        },
        "label_names": None if m.label_names is None else list(m.label_names),
        "meta": {k: _jsonable(v) for k, v in m.meta.items()},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_model(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"malformed model file {path}: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != "sdwd-model":
        raise DataError(f"{path} is not an sdwd model file")
    if doc.get("format_version") != FORMAT_VERSION:
        raise DataError(f"unsupported model format version {doc.get('format_version')!r}")
    try:
        st = doc["standardizer"]
        std = Standardizer(np.array(st["means"], dtype=np.float64),
                           np.array(st["scales"], dtype=np.float64),
                           frozenset(int(j) for j in st["dropped"]))
        beta = np.zeros(int(doc["n_coef"]))
        for j, v in doc["coefficients"]:
            beta[int(j)] = float(v)
        w = doc["weights"]
        pen = PenaltySpec(float(doc["lambda1"]), float(doc["lambda2"]),
                          None if w is None else np.array(w, dtype=np.float64))
        labels = doc["label_names"]
        return DwdModel(float(doc["intercept"]), beta, std, pen, doc["mode"],
                        float(doc["lambda1_selected"]), dict(doc["meta"]),
                        None if labels is None else tuple(labels))
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise DataError(f"malformed model file {path}: {exc}") from None
