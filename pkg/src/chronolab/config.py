"""Run configuration: a TOML file with a ``[spectrum]`` block and analyses.

Example::

    seed = 7

    [spectrum]
    kind = "harmonic"        # power_law | harmonic | box | explicit
    omega0 = 1
    M = 1
    hbar = 1
    exactness = "exact"      # exact | float64; omitted -> automatic

    [[analysis]]
    kind = "ccr"
    L = 6

    [output]
    report = "report.json"

Numeric parameters may be TOML numbers or ``"p/q"`` strings.  Explicit
spectra take ``values = [...]`` or ``file = "levels.txt"`` (relative to
the config file).
"""

from __future__ import annotations

import hashlib
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ChronolabError, ConfigError
from .spectra import Spectrum, from_list, make_box, make_harmonic, make_power_law, read_levels_file

ANALYSES = ("check", "build", "ccr", "spectrum", "deficiency", "kernel", "class_gen")

_FAMILY_PARAMS = {
    "power_law": ("c", "p"),
    "harmonic": ("omega0",),
    "box": ("scale",),
    "explicit": (),
}


@dataclass(frozen=True)
class RunConfig:
    spectrum: Spectrum
    analyses: list = field(default_factory=list)
    outputs: dict = field(default_factory=dict)
    seed: int = 0
    config_hash: str = ""
    base_dir: Path = Path(".")

    def output_path(self, key: str) -> Optional[Path]:
        value = self.outputs.get(key)
        return None if value is None else self.base_dir / value


def _number(value, location: str):
    if isinstance(value, bool):
        raise ConfigError(location, "must be a number")
    if isinstance(value, (int, float)):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError:
            raise ConfigError(location, f"cannot parse number {value!r}") from None
    raise ConfigError(location, "must be a number")


def spectrum_from_block(block: Any, base_dir: Path = Path(".")) -> Spectrum:
    if not isinstance(block, dict):
        raise ConfigError("spectrum", "block required")
    kind = block.get("kind")
    if kind is None:
        raise ConfigError("spectrum.kind", "required")
    kind = str(kind).lower()
    if kind not in _FAMILY_PARAMS:
        raise ConfigError("spectrum.kind", f"unknown kind {kind!r}; expected one of "
                          + ", ".join(_FAMILY_PARAMS))
    params = []
    for name in _FAMILY_PARAMS[kind]:
        if name not in block:
            raise ConfigError(f"spectrum.{name}", "required")
        params.append(_number(block[name], f"spectrum.{name}"))
    M = block.get("M", 1)
    if not isinstance(M, int) or isinstance(M, bool):
        raise ConfigError("spectrum.M", "must be an integer")
    hbar = _number(block.get("hbar", 1), "spectrum.hbar")
    exactness = block.get("exactness")
    zero_mode = block.get("zero_mode", False)
    if not isinstance(zero_mode, bool):
        raise ConfigError("spectrum.zero_mode", "must be true or false")
    try:
        if kind == "power_law":
            return make_power_law(params[0], params[1], M, hbar, exactness)
        if kind == "harmonic":
            return make_harmonic(params[0], M, hbar, exactness)
        if kind == "box":
            return make_box(params[0], M, hbar, exactness)
        if "values" in block and "file" in block:
            raise ConfigError("spectrum", "give either values or file, not both")
        if "values" in block:
            values = block["values"]
            if not isinstance(values, list):
                raise ConfigError("spectrum.values", "must be an array")
        elif "file" in block:
            path = base_dir / str(block["file"])
            try:
                values = read_levels_file(path)
            except OSError as exc:
                raise ConfigError("spectrum.file", f"cannot read {path}: {exc}") from None
        else:
            raise ConfigError("spectrum.values", "required for explicit spectra")
        return from_list(values, M, hbar, exactness, zero_mode)
    except ConfigError:
        raise
    except ChronolabError as exc:
        raise ConfigError("spectrum", str(exc)) from None


def _check_positive_ints(analysis: dict, location: str) -> None:
    for key, val in analysis.items():
        if key in ("N", "L", "R", "K", "horizon", "nodes", "top", "n_random"):
            low = 0 if key == "n_random" else 1
            vals = val if isinstance(val, list) else [val]
            for v in vals:
                if not isinstance(v, int) or isinstance(v, bool) or v < low:
                    what = "a non-negative" if low == 0 else "a positive"
                    raise ConfigError(f"{location}.{key}", f"must be {what} integer")


def parse_config(text: str, base_dir: Path = Path(".")) -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"TOML parse error: {exc}") from None
    if "spectrum" not in data:
        raise ConfigError("spectrum", "block required")
    spec = spectrum_from_block(data["spectrum"], base_dir)
    analyses = data.get("analysis", [])
    if isinstance(analyses, dict):
        analyses = [analyses]
    if not isinstance(analyses, list):
        raise ConfigError("analysis", "must be an array of tables")
    for idx, analysis in enumerate(analyses):
        loc = f"analysis[{idx}]"
        if not isinstance(analysis, dict):
            raise ConfigError(loc, "must be a table")
        kind = analysis.get("kind")
        if kind is None:
            raise ConfigError(f"{loc}.kind", "required")
        if kind not in ANALYSES:
            raise ConfigError(f"{loc}.kind", f"unknown analysis {kind!r}; expected one of "
                              + ", ".join(ANALYSES))
        _check_positive_ints(analysis, loc)
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("seed", "must be an integer")
    outputs = data.get("output", {})
    if not isinstance(outputs, dict):
        raise ConfigError("output", "must be a table")
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]
    return RunConfig(spec, analyses, outputs, seed, digest, base_dir)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from None
    return parse_config(text, path.parent)
