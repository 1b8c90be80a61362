"""Strict TOML experiment configs.

One document drives every experiment command. Unknown keys anywhere are
hard errors: a silently ignored typo in a sweep grid costs hours. Grids
must be nonempty, n must be m times a power of two, and the model kind
must name a known family.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .chain import MODEL_BUILDERS

CONFIG_SCHEMA_VERSION = 1


class ConfigError(Exception):
    """Config file rejected; the message carries the offending key or line."""


@dataclass(frozen=True)
class ModelSpec:
    kind: str = "tfim"
    coupling: float = 1.0
    field: float = 1.5
    boundary: str = "uniform"


@dataclass(frozen=True)
class EngineSpec:
    filter: str = "gaussian"
    gamma_grid: tuple[float, ...] = (2.0,)
    alpha_grid: tuple[int, ...] = (0,)  # 0 selects the full-width generator
    steps: int | str = "auto"
    order: str = "midpoint"


@dataclass(frozen=True)
class CertifySpec:
    field_start: float = 1.5
    field_end: float = 2.0
    grid_points: int = 41
    steps: int = 256
    ref_points: int = 257


@dataclass(frozen=True)
class TruncationSpec:
    s_points: int = 9


@dataclass(frozen=True)
class LRSpec:
    a_site: int = 0
    b_width: int = 1
    t_grid: tuple[float, ...] = (0.05, 0.1, 0.2, 0.4, 0.8)
    d_grid: tuple[int, ...] = (1, 2, 3)


@dataclass(frozen=True)
class BudgetSpec:
    kappa_lr: float | None = None
    v: float | None = None

    @property
    def constants(self) -> dict | None:
        if self.kappa_lr is None or self.v is None:
            return None
        return {"kappa_lr": self.kappa_lr, "v": self.v}


@dataclass(frozen=True)
class ExperimentConfig:
    m: int
    n: int
    seed: int = 0
    model: ModelSpec = field(default_factory=ModelSpec)
    engine: EngineSpec = field(default_factory=EngineSpec)
    certify: CertifySpec = field(default_factory=CertifySpec)
    truncation: TruncationSpec = field(default_factory=TruncationSpec)
    lr: LRSpec = field(default_factory=LRSpec)
    budget: BudgetSpec = field(default_factory=BudgetSpec)
    config_hash: str = ""


_SECTION_KEYS = {
    "model": {"kind", "coupling", "field", "boundary"},
    "geometry": {"m", "n"},
    "engine": {"filter", "gamma_grid", "alpha_grid", "steps", "order"},
    "certify": {"field_start", "field_end", "grid_points", "steps", "ref_points"},
    "truncation": {"s_points"},
    "lr": {"a_site", "b_width", "t_grid", "d_grid"},
    "budget": {"kappa_lr", "v"},
}
_TOP_KEYS = {"schema_version", "seed"} | set(_SECTION_KEYS)


def _reject_unknown(mapping: dict, allowed: set, where: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"unknown key '{where}{key}' (allowed: {sorted(allowed)})")


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def parse_config_text(text: str, config_hash: str = "") -> ExperimentConfig:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc

    _reject_unknown(doc, _TOP_KEYS, "")
    version = doc.get("schema_version", CONFIG_SCHEMA_VERSION)
    _require(version == CONFIG_SCHEMA_VERSION,
             f"unsupported schema_version {version}")
    for section in _SECTION_KEYS:
        if section in doc:
            _require(isinstance(doc[section], dict), f"[{section}] must be a table")
            _reject_unknown(doc[section], _SECTION_KEYS[section], f"{section}.")

    geometry = doc.get("geometry", {})
    _require("m" in geometry and "n" in geometry, "geometry.m and geometry.n are required")
    m, n = int(geometry["m"]), int(geometry["n"])
    _require(m >= 1, "geometry.m must be >= 1")
    ratio = n // m if m else 0
    _require(n > m and n % m == 0 and ratio & (ratio - 1) == 0,
             f"geometry.n={n} must equal m * 2^k for integer k >= 1 (m={m})")

    model = ModelSpec(**doc.get("model", {}))
    _require(model.kind in MODEL_BUILDERS, f"model.kind '{model.kind}' unknown")
    _require(model.boundary in ("full", "uniform"),
             f"model.boundary '{model.boundary}' unknown")

    eng = dict(doc.get("engine", {}))
    if "gamma_grid" in eng:
        eng["gamma_grid"] = tuple(float(g) for g in eng["gamma_grid"])
        _require(len(eng["gamma_grid"]) > 0, "engine.gamma_grid must be nonempty")
        _require(all(g > 0 for g in eng["gamma_grid"]), "engine.gamma_grid must be positive")
    if "alpha_grid" in eng:
        eng["alpha_grid"] = tuple(int(a) for a in eng["alpha_grid"])
        _require(len(eng["alpha_grid"]) > 0, "engine.alpha_grid must be nonempty")
        _require(all(a >= 0 for a in eng["alpha_grid"]),
                 "engine.alpha_grid entries must be >= 0 (0 = full width)")
    engine = EngineSpec(**eng)
    _require(engine.filter in ("gaussian", "compact_bump"),
             f"engine.filter '{engine.filter}' unknown")
    _require(engine.order in ("midpoint", "richardson"),
             f"engine.order '{engine.order}' unknown")
    if engine.steps != "auto":
        _require(isinstance(engine.steps, int) and engine.steps >= 1,
                 "engine.steps must be 'auto' or a positive integer")

    cert = CertifySpec(**doc.get("certify", {}))
    _require(cert.grid_points >= 2, "certify.grid_points must be >= 2")

    trunc = TruncationSpec(**doc.get("truncation", {}))
    _require(trunc.s_points >= 2, "truncation.s_points must be >= 2")

    lr = dict(doc.get("lr", {}))
    if "t_grid" in lr:
        lr["t_grid"] = tuple(float(t) for t in lr["t_grid"])
        _require(len(lr["t_grid"]) > 0, "lr.t_grid must be nonempty")
    if "d_grid" in lr:
        lr["d_grid"] = tuple(int(d) for d in lr["d_grid"])
        _require(len(lr["d_grid"]) > 0, "lr.d_grid must be nonempty")
    lr_spec = LRSpec(**lr)

    budget = BudgetSpec(**doc.get("budget", {}))

    return ExperimentConfig(m=m, n=n, seed=int(doc.get("seed", 0)), model=model,
                            engine=engine, certify=cert, truncation=trunc,
                            lr=lr_spec, budget=budget, config_hash=config_hash)


def parse_config(path) -> ExperimentConfig:
    with open(path, "rb") as fh:
        raw = fh.read()
    digest = hashlib.sha256(raw).hexdigest()[:16]
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ConfigError(f"config is not UTF-8: {exc}") from exc
    return parse_config_text(text, config_hash=digest)


def model_builder(cfg: ExperimentConfig, cap: int):
    """Size -> ChainHamiltonian closure for the configured family."""
    from .chain import heisenberg_chain, transverse_field_ising

    model = cfg.model
    if model.kind == "tfim":
        def build(k: int):
            return transverse_field_ising(k, coupling=model.coupling,
                                          field=model.field,
                                          boundary=model.boundary, cap=cap)
    else:
        def build(k: int):
            return heisenberg_chain(k, jx=model.coupling, jy=model.coupling,
                                    jz=model.coupling, field_z=model.field, cap=cap)
    return build
