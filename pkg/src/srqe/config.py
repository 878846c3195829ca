"""Run configuration: defaults, file parsing and validation.

Config files are a flat key = value subset of TOML: strings quoted, numbers
bare, booleans true/false, lists in brackets. Command-line flags override
file values, and every command echoes its effective configuration into its
outputs.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields

from .errors import ConfigurationError, InvalidInputError

POOLING_MODES = ("multiplication", "summation", "combination")


@dataclass
class RunConfig:
    weights: str | None = None
    style_dict: str | None = None
    content_dict: str | None = None
    target_size: int = 512
    z_count: int = 3
    o_count: int = 4
    sigma_list: tuple = (0.0, 1.0, 1.6, 2.56, 4.096)
    k: float = 1.6
    patch_size: int = 6
    tau: int = 8
    style_atoms: tuple = (256, 256, 512, 1024, 1024)
    content_atoms: int = 256
    patch_count: int = 1000
    blocks_per_layer: tuple = (4, 4, 9, 16, 16)
    epochs: int = 10
    batch_size: int = 256
    eta: float = 1e-4
    w1: float = 0.4
    w2: float = 0.6
    w3: float = 0.4
    w4: float = 0.6
    c: float = 1.0
    d: float = 0.0
    pooling_mode: str = "multiplication"
    normalized_pooling: bool = False
    similarity_form: str = "as-written"
    seed: int = 0
    workers: int = 1
    extra: dict = field(default_factory=dict, repr=False)

    def validate(self, require_files: tuple = ()) -> "RunConfig":
        if not 1 <= self.z_count <= 5 or self.z_count > len(self.sigma_list):
            raise ConfigurationError(
                f"z_count must be in 1..min(5, len(sigma_list)), got {self.z_count}"
            )
        if self.o_count < 1:
            raise ConfigurationError("o_count must be >= 1")
        if self.patch_size not in (6, 8):
            raise ConfigurationError(f"patch_size must be 6 or 8, got {self.patch_size}")
        if self.k <= 1:
            raise ConfigurationError("scale ratio k must exceed 1")
        if min(self.w1, self.w2, self.w3, self.w4) <= 0:
            raise ConfigurationError("pooling weights must be positive")
        if self.eta <= 0:
            raise ConfigurationError("eta must be positive")
        if self.tau < 1 or self.epochs < 1 or self.workers < 1:
            raise ConfigurationError("tau, epochs and workers must be >= 1")
        if self.target_size < 32:
            raise ConfigurationError("target_size below the 32px network minimum")
        if self.pooling_mode not in POOLING_MODES:
            raise ConfigurationError(f"pooling_mode must be one of {POOLING_MODES}")
        if self.similarity_form not in ("as-written", "ssim-form"):
            raise ConfigurationError("similarity_form must be as-written or ssim-form")
        if len(self.style_atoms) != 5 or len(self.blocks_per_layer) != 5:
            raise ConfigurationError("style_atoms and blocks_per_layer need 5 entries")
        for name in require_files:
            path = getattr(self, name)
            if not path:
                raise InvalidInputError(f"{name} is required but not set")
            if not os.path.exists(path):
                raise InvalidInputError(f"{name} file not found: {path}")
        return self

    def as_dict(self) -> dict:
        out = {}
        for f in fields(self):
            if f.name == "extra":
                continue
            value = getattr(self, f.name)
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out

    def apply(self, overrides: dict) -> "RunConfig":
        known = {f.name for f in fields(self)}
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in known:
                self.extra[key] = value
                continue
            current = getattr(self, key)
            if isinstance(current, tuple) and not isinstance(value, tuple):
                value = tuple(value)
            setattr(self, key, value)
        return self


def _parse_scalar(token: str, where: str):
    token = token.strip()
    if token.startswith('"') and token.endswith('"') and len(token) >= 2:
        return token[1:-1]
    if token.startswith("'") and token.endswith("'") and len(token) >= 2:
        return token[1:-1]
    low = token.lower()
    if low == "true":
        return True
    if low == "false":
        return False
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        raise ConfigurationError(f"{where}: cannot parse value {token!r}") from None


def _strip_comment(line: str) -> str:
    out = []
    in_quote = None
    for ch in line:
        if in_quote:
            if ch == in_quote:
                in_quote = None
        elif ch in "\"'":
            in_quote = ch
        elif ch == "#":
            break
        out.append(ch)
    return "".join(out)


def load_config(path) -> RunConfig:
    """Parse a flat key = value file into a RunConfig."""
    config = RunConfig()
    overrides: dict = {}
    with open(path) as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = _strip_comment(raw).strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}: line {line_no}: expected key = value")
            key, _, rest = line.partition("=")
            key = key.strip().replace("-", "_")
            rest = rest.strip()
            where = f"{path}: line {line_no}"
            if rest.startswith("[") and rest.endswith("]"):
                inner = rest[1:-1].strip()
                value = tuple(
                    _parse_scalar(tok, where) for tok in inner.split(",") if tok.strip()
                )
            else:
                value = _parse_scalar(rest, where)
            overrides[key] = value
    return config.apply(overrides)
