"""Run configuration: a single JSON document, validated at load."""
import copy
import hashlib
import json

import numpy as np

from .errors import ConfigError, DomainError
from .kepler import MassConfig
from .perihelia import PDomain
from .rpspi import DomainParams

DEFAULTS = {
    "masses": {"m0": 1.0, "m1": 1.0, "m2": 0.05},
    "mu": 1e-3,
    "domain": {"chi": 2.0, "alpha_minus": 0.05, "alpha_plus": 0.2,
               "Lambda_minus": 0.02, "Lambda_plus": 0.1, "epsilon0": None,
               "c": 0.9, "G": 0.1},
    "quadrature": {"N": 64, "Nl": 32, "cauchy_N": 6},
    "seed": 0,
    "output_dir": "triad_out",
    "symplectic": {"points": 1000, "charts": ["jrd", "rps_pi", "p"], "h": 1e-5,
                   "tol": 1e-6},
    "torsion": {"n1": 60, "n2": 60, "delta": 0.01, "t_range": None},
    "equilibrium": {"Lambda1": [0.5, 1.0, 3.0], "Lambda2": 2.0, "G": [0.3, 0.6, 1.0],
                    "G2": [0.5, 1.2, 1.8], "level_grid": 41,
                    "whisker": {"masses": {"m0": 1.0, "m1": 100.0, "m2": 10.0},
                                "mu": 1e-4, "a1": 1.0, "a2": 20.0, "e1": 0.85,
                                "e2": 0.6, "eps_frac": 1e-3}},
    "secular": {"alpha": 0.05, "points": 8, "dalembert_Lambda": [[0.3, 0.05], [0.45, 0.07]],
                "sigma_masses": {"m0": 1.0, "m1": 1.0, "m2": 0.02},
                "sigma_Lambda": [0.14, 0.03], "emit_coefficients": False},
    "integrate": {"chart": "jrd", "point": None, "dt": 0.05, "T": 628.3185307179586,
                  "scheme": "dop853", "tol": 1e-9, "csv": True},
}


def _merge(base, over, path=""):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if k not in base:
            raise ConfigError(f"unknown config key {path + k!r}")
        if isinstance(base[k], dict) and base[k] and isinstance(v, dict):
            out[k] = _merge(base[k], v, path + k + ".")
        else:
            out[k] = v
    return out


def _num(x, name):
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not np.isfinite(x):
        raise ConfigError(f"{name} must be a finite number, got {x!r}")
    return float(x)


class RunConfig:
    """Validated configuration. `raw` keeps the merged document."""

    def __init__(self, doc=None):
        raw = _merge(DEFAULTS, doc or {})
        self.raw = raw
        m = raw["masses"]
        for k in ("m0", "m1", "m2"):
            _num(m[k], f"masses.{k}")
        self.mu = _num(raw["mu"], "mu")
        d = raw["domain"]
        for k in ("chi", "alpha_minus", "alpha_plus", "Lambda_minus", "Lambda_plus", "c", "G"):
            _num(d[k], f"domain.{k}")
        if not d["chi"] > 1:
            raise ConfigError("chi > 1 violated (domain.chi)")
        if not 0 < d["alpha_minus"] < d["alpha_plus"] < 1:
            raise ConfigError("0 < alpha_minus < alpha_plus < 1 violated")
        if not 0 < d["Lambda_minus"] < d["Lambda_plus"]:
            raise ConfigError("0 < Lambda_minus < Lambda_plus violated")
        if not 0 < d["c"] < 1:
            raise ConfigError("0 < c < 1 violated (domain.c)")
        if not d["G"] > 0:
            raise ConfigError("G > 0 violated (domain.G)")
        if d["epsilon0"] is not None and not _num(d["epsilon0"], "domain.epsilon0") > 0:
            raise ConfigError("epsilon0 > 0 violated")
        try:
            self.masses = MassConfig(float(m["m0"]), float(m["m1"]), float(m["m2"]), self.mu)
            self.domain = DomainParams(d["chi"], d["alpha_minus"], d["alpha_plus"],
                                       d["Lambda_minus"], d["Lambda_plus"], d["epsilon0"])
        except DomainError as e:
            raise ConfigError(str(e)) from None
        bad = self.domain.mass_violations(self.masses)
        if bad:
            raise ConfigError("; ".join(bad))
        self.pdomain = PDomain(G=d["G"], c=d["c"])
        q = raw["quadrature"]
        if int(q["cauchy_N"]) % 2:
            raise ConfigError("quadrature.cauchy_N must be even")
        if raw["symplectic"]["points"] < 1:
            raise ConfigError("symplectic.points must be >= 1")
        sch = raw["integrate"]["scheme"]
        if sch not in ("dop853", "wh", "wh4"):
            raise ConfigError(f"integrate.scheme must be dop853, wh or wh4, got {sch!r}")

    def __getitem__(self, k):
        return self.raw[k]

    def canonical(self):
        return json.dumps(self.raw, sort_keys=True, separators=(",", ":"), allow_nan=False)

    @property
    def hash(self):
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    def rng(self):
        return np.random.default_rng(int(self.raw["seed"]))


def load_config(path=None):
    if path is None:
        return RunConfig()
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    return RunConfig(doc)
