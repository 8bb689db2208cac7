"""Sectioned key-value experiment configs.

Plain text, diff-friendly: `[section]` headers, `key = value` lines, `#`
comments.  Unknown sections/keys are rejected with line numbers; module
invariants are re-validated at load.  serialize() and parse_config() are
inverse to each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

from .errors import ConfigError
from .reaction import ReactionSpec
from .threshold import PsiShape


@dataclass
class ReactionConfig:
    theta: float = 0.3
    sigma: float = 0.02
    p: float = 2.0
    m: float = 2.0
    u_cap: float = 2.0

    def to_spec(self) -> ReactionSpec:
        return ReactionSpec(theta=self.theta, sigma=self.sigma, p=self.p,
                            m=self.m, u_cap=self.u_cap)


@dataclass
class GridConfig:
    x_max: float = 24.0
    n: int = 960


@dataclass
class RunConfig:
    horizon: float = 200.0
    sample_every: float = 1.0
    safety: float = 0.4


@dataclass
class PsiConfig:
    shape: str = "tent"
    width: float = 2.0
    height: float = 1.0

    def to_shape(self) -> PsiShape:
        return PsiShape(kind=self.shape, width=self.width, height=self.height)


@dataclass
class SolveConfig:
    lam: float = 1.0
    with_reaction: bool = True
    snapshot_stride: int = 0


@dataclass
class ShootXiConfig:
    tol: float = 1e-10
    dump_table: bool = False


@dataclass
class ProfileQbConfig:
    b_list: str = "0.005,0.01"
    dump_profiles: bool = False


@dataclass
class HwProfileConfig:
    p: float = 4.0
    gamma_frac: float = 0.3
    Y: float = 0.0          # 0 -> span default for the exponent


@dataclass
class FindLambdaConfig:
    tol: float = 1e-6
    dwell_frac: float = 0.1
    extend_factor: float = 4.0


@dataclass
class AsymptoticsConfig:
    y0: float = 0.0         # 0 -> computed by the profile shoot
    trace: str = ""


@dataclass
class SweepConfig:
    command: str = "shoot-xi"
    vary: str = ""          # "reaction.p=2,5; reaction.m=2,3"
    workers: int = 1


_SECTIONS = {
    "reaction": ReactionConfig,
    "grid": GridConfig,
    "run": RunConfig,
    "psi": PsiConfig,
    "solve": SolveConfig,
    "shoot_xi": ShootXiConfig,
    "profile_qb": ProfileQbConfig,
    "hw_profile": HwProfileConfig,
    "find_lambda": FindLambdaConfig,
    "asymptotics": AsymptoticsConfig,
    "sweep": SweepConfig,
}


@dataclass
class ExperimentConfig:
    reaction: ReactionConfig = field(default_factory=ReactionConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    run: RunConfig = field(default_factory=RunConfig)
    psi: PsiConfig = field(default_factory=PsiConfig)
    solve: SolveConfig = field(default_factory=SolveConfig)
    shoot_xi: ShootXiConfig = field(default_factory=ShootXiConfig)
    profile_qb: ProfileQbConfig = field(default_factory=ProfileQbConfig)
    hw_profile: HwProfileConfig = field(default_factory=HwProfileConfig)
    find_lambda: FindLambdaConfig = field(default_factory=FindLambdaConfig)
    asymptotics: AsymptoticsConfig = field(default_factory=AsymptoticsConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)


def _parse_value(raw: str, target_type, where: str):
    if target_type is bool:
        low = raw.lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ConfigError([f"{where}: expected a boolean, got {raw!r}"])
    if target_type is int:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError([f"{where}: expected an integer, got {raw!r}"])
    if target_type is float:
        try:
            return float(raw)
        except ValueError:
            raise ConfigError([f"{where}: expected a number, got {raw!r}"])
    return raw


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate; raises ConfigError listing every problem found."""
    cfg = ExperimentConfig()
    errors: list[str] = []
    section = None
    sec_obj = None
    sec_fields = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in _SECTIONS:
                errors.append(f"line {lineno}: unknown section [{name}]")
                section, sec_obj = None, None
                continue
            section = name
            sec_obj = getattr(cfg, name)
            sec_fields = {f.name: f.type for f in fields(sec_obj)}
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        if sec_obj is None:
            errors.append(f"line {lineno}: key outside any known section")
            continue
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in sec_fields:
            errors.append(f"line {lineno}: unknown key {key!r} in [{section}]")
            continue
        current = getattr(sec_obj, key)
        try:
            setattr(sec_obj, key, _parse_value(val, type(current), f"line {lineno}"))
        except ConfigError as e:
            errors.extend(e.messages)
    if errors:
        raise ConfigError(errors)
    _validate(cfg, errors)
    if errors:
        raise ConfigError(errors)
    return cfg


def _validate(cfg: ExperimentConfig, errors: list):
    try:
        cfg.reaction.to_spec()
    except ValueError as e:
        errors.append(f"[reaction] {e}")
    if cfg.grid.x_max <= 0.0:
        errors.append("[grid] x_max must be positive")
    if cfg.grid.n < 16:
        errors.append("[grid] n must be at least 16")
    if cfg.run.horizon <= 0.0:
        errors.append("[run] horizon must be positive")
    if cfg.run.sample_every <= 0.0:
        errors.append("[run] sample_every must be positive")
    if not 0.0 < cfg.run.safety <= 1.0:
        errors.append("[run] safety must be in (0, 1]")
    try:
        cfg.psi.to_shape()
    except ValueError as e:
        errors.append(f"[psi] {e}")
    if cfg.find_lambda.tol <= 0.0:
        errors.append("[find_lambda] tol must be positive")
    if cfg.sweep.workers < 1:
        errors.append("[sweep] workers must be >= 1")


def serialize(cfg: ExperimentConfig) -> str:
    out = []
    for name in _SECTIONS:
        out.append(f"[{name}]")
        sec = getattr(cfg, name)
        for f in fields(sec):
            v = getattr(sec, f.name)
            if isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, float):
                v = repr(v)
            out.append(f"{f.name} = {v}")
        out.append("")
    return "\n".join(out)


def parse_vary(vary: str) -> dict:
    """Parse a sweep grid like 'reaction.p=2,5; reaction.m=2,3'."""
    grid: dict[str, list[str]] = {}
    if not vary.strip():
        return grid
    for chunk in vary.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "=" not in chunk:
            raise ConfigError([f"[sweep] vary entry {chunk!r} lacks '='"])
        path, vals = (part.strip() for part in chunk.split("=", 1))
        if "." not in path:
            raise ConfigError([f"[sweep] vary path {path!r} must be section.key"])
        values = [v.strip() for v in vals.split(",") if v.strip()]
        if not values:
            raise ConfigError([f"[sweep] vary entry {chunk!r} has no values"])
        grid[path] = values
    return grid


def apply_override(cfg: ExperimentConfig, path: str, value: str):
    section, _, key = path.partition(".")
    if section not in _SECTIONS:
        raise ConfigError([f"unknown section {section!r} in override {path!r}"])
    sec = getattr(cfg, section)
    names = {f.name for f in fields(sec)}
    if key not in names:
        raise ConfigError([f"unknown key {key!r} in override {path!r}"])
    current = getattr(sec, key)
    setattr(sec, key, _parse_value(value, type(current), f"override {path}"))
