"""Scenario files: a flat ``key = value`` format with ``#`` comments.

Per-species values are addressed as ``species.<j>.<field>`` with j counted
from 1; ``species.<j>.b`` holds row j of the interaction matrix.  Example::

    n_species = 1
    species.1.a = 0.103
    species.1.b = 0.000147
    species.1.tau = 1
    species.1.diffusion = 1.33
    species.1.initial = const 140
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .control import SWITCH_RULES
from .errors import ConfigError, ConfigSyntaxError, MissingRequiredKey, UnknownKey
from .model import Discretization, ModelSpec, make_model

GLOBAL_KEYS = {
    "name", "description", "n_species", "length", "n_space", "horizon", "n_time",
    "output_stride", "control", "switch_rule", "output_dir", "formats",
}
SPECIES_KEYS = {"name", "a", "b", "tau", "diffusion", "initial"}
REQUIRED_SPECIES_KEYS = ("a", "b", "tau", "diffusion", "initial")
FORMATS = ("csv", "plot-script")
IC_KINDS = ("const", "linear", "nodes")

ALIASES = {
    "eichhornia": "eichhornia-const140",
    "two-plant-low": "two-plant-low-280-80",
    "two-plant-high": "two-plant-high-700-350",
}


@dataclass(frozen=True)
class InitialCondition:
    """``const v``, ``linear c`` (w = c x) or ``nodes v_1 ... v_n``."""

    kind: str
    values: tuple[float, ...]

    def sample(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "const":
            return np.full(x.shape, self.values[0])
        if self.kind == "linear":
            return self.values[0] * x
        return np.array(self.values, dtype=float)

    def render(self) -> str:
        return " ".join([self.kind] + [repr(v) for v in self.values])


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    model: ModelSpec
    disc: Discretization
    initial: tuple[InitialCondition, ...]
    description: str = ""
    species_names: tuple[str, ...] = ()
    control_enabled: bool = True
    switch_rule: str = "coupled"
    output_stride: int = 10
    output_dir: str | None = None
    formats: tuple[str, ...] = FORMATS

    @property
    def n_species(self) -> int:
        return self.model.n_species

    def initial_field(self) -> np.ndarray:
        x = self.disc.x
        return np.stack([ic.sample(x) for ic in self.initial])

    def with_overrides(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)


def _number(raw, line, cast=float):
    try:
        value = cast(raw)
    except ValueError:
        raise ConfigSyntaxError(f"expected a number, got {raw!r}", line) from None
    if cast is float and not np.isfinite(value):
        raise ConfigSyntaxError(f"expected a finite number, got {raw!r}", line)
    return value


def _integer(raw, line):
    value = _number(raw, line)
    if value != int(value):
        raise ConfigSyntaxError(f"expected an integer, got {raw!r}", line)
    return int(value)


def _numbers(raw, line):
    return [_number(tok, line) for tok in raw.split()]


def _initial(raw, line, n_space):
    parts = raw.split()
    if not parts or parts[0] not in IC_KINDS:
        raise ConfigSyntaxError(
            f"initial condition must start with one of {IC_KINDS}, got {raw!r}", line)
    kind, values = parts[0], tuple(_number(tok, line) for tok in parts[1:])
    if kind in ("const", "linear") and len(values) != 1:
        raise ConfigSyntaxError(f"'{kind}' takes exactly one value", line)
    if kind == "nodes" and len(values) != n_space:
        raise ConfigSyntaxError(f"'nodes' needs {n_space} values, got {len(values)}", line)
    if any(v < 0 for v in values):
        raise ConfigSyntaxError("initial densities and slopes must be non-negative", line)
    return InitialCondition(kind, values)


def _tokenize(text):
    entries = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigSyntaxError(f"expected 'key = value', got {line!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigSyntaxError("empty key", lineno)
        if key in entries:
            raise ConfigSyntaxError(f"duplicate key {key!r}", lineno)
        entries[key] = (value, lineno)
    return entries


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a scenario.  Errors carry the offending line number."""
    entries = _tokenize(text)
    species = {}
    glob = {}
    for key, (value, lineno) in entries.items():
        if key.startswith("species."):
            parts = key.split(".")
            if len(parts) != 3 or parts[2] not in SPECIES_KEYS:
                raise UnknownKey(key, lineno)
            j = _integer(parts[1], lineno)
            if j < 1:
                raise ConfigSyntaxError(f"species are numbered from 1, got {j}", lineno)
            species.setdefault(j, {})[parts[2]] = (value, lineno)
        elif key in GLOBAL_KEYS:
            glob[key] = (value, lineno)
        else:
            raise UnknownKey(key, lineno)

    def get(key, default=None, cast=None):
        if key not in glob:
            if default is None:
                raise MissingRequiredKey(key)
            return default
        value, lineno = glob[key]
        return cast(value, lineno) if cast else value

    n = get("n_species", cast=_integer)
    if n < 1:
        raise ConfigSyntaxError("n_species must be >= 1", glob["n_species"][1])
    extra = sorted(set(species) - set(range(1, n + 1)))
    if extra:
        raise UnknownKey(f"species.{extra[0]}")

    disc_defaults = Discretization()
    disc = Discretization(
        length=get("length", disc_defaults.length, _number),
        n_space=get("n_space", disc_defaults.n_space, _integer),
        horizon=get("horizon", disc_defaults.horizon, _number),
        n_time=get("n_time", disc_defaults.n_time, _integer),
    )

    rows = {name: [] for name in ("a", "b", "tau", "diffusion")}
    initial, names = [], []
    for j in range(1, n + 1):
        fields = species.get(j, {})
        for name in REQUIRED_SPECIES_KEYS:
            if name not in fields:
                raise MissingRequiredKey(f"species.{j}.{name}")
        for name in ("a", "tau", "diffusion"):
            rows[name].append(_number(*fields[name]))
        b_row = _numbers(*fields["b"])
        if len(b_row) != n:
            raise ConfigSyntaxError(
                f"species.{j}.b needs {n} values (row {j} of the interaction matrix)",
                fields["b"][1])
        rows["b"].append(b_row)
        initial.append(_initial(*fields["initial"], disc.n_space))
        names.append(fields["name"][0] if "name" in fields else f"species {j}")

    model = make_model(rows["a"], rows["b"], rows["tau"], rows["diffusion"])

    control = get("control", "on").lower()
    if control not in ("on", "off"):
        raise ConfigSyntaxError("control must be 'on' or 'off'", glob["control"][1])
    rule = get("switch_rule", "coupled")
    if rule not in SWITCH_RULES:
        raise ConfigSyntaxError(f"switch_rule must be one of {SWITCH_RULES}",
                                glob["switch_rule"][1])
    stride = get("output_stride", 10, _integer)
    if stride < 1:
        raise ConfigSyntaxError("output_stride must be >= 1", glob["output_stride"][1])
    formats = tuple(get("formats", " ".join(FORMATS)).replace(",", " ").split())
    for fmt in formats:
        if fmt not in FORMATS:
            raise ConfigSyntaxError(f"unknown output format {fmt!r}", glob["formats"][1])

    return ScenarioConfig(
        name=get("name", "scenario"),
        description=get("description", ""),
        model=model,
        disc=disc,
        initial=tuple(initial),
        species_names=tuple(names),
        control_enabled=control == "on",
        switch_rule=rule,
        output_stride=stride,
        output_dir=glob["output_dir"][0] if "output_dir" in glob else None,
        formats=formats,
    )


def render_config(config: ScenarioConfig) -> str:
    """Inverse of :func:`parse_config`; floats are written with ``repr``."""
    m, d = config.model, config.disc
    lines = [
        f"name = {config.name}",
    ]
    if config.description:
        lines.append(f"description = {config.description}")
    lines += [
        f"n_species = {m.n_species}",
        f"length = {d.length!r}",
        f"n_space = {d.n_space}",
        f"horizon = {d.horizon!r}",
        f"n_time = {d.n_time}",
        f"output_stride = {config.output_stride}",
        f"control = {'on' if config.control_enabled else 'off'}",
        f"switch_rule = {config.switch_rule}",
        f"formats = {' '.join(config.formats)}",
    ]
    if config.output_dir is not None:
        lines.append(f"output_dir = {config.output_dir}")
    for j in range(m.n_species):
        prefix = f"species.{j + 1}"
        lines.append("")
        if j < len(config.species_names):
            lines.append(f"{prefix}.name = {config.species_names[j]}")
        lines += [
            f"{prefix}.a = {float(m.a[j])!r}",
            f"{prefix}.b = {' '.join(repr(float(v)) for v in m.b[j])}",
            f"{prefix}.tau = {float(m.tau[j])!r}",
            f"{prefix}.diffusion = {float(m.diffusion[j])!r}",
            f"{prefix}.initial = {config.initial[j].render()}",
        ]
    return "\n".join(lines) + "\n"


def _preset_dir():
    return resources.files("pondharvest") / "presets"


def list_presets() -> list[tuple[str, str]]:
    """(name, description) of every bundled scenario, sorted by name."""
    out = []
    for entry in sorted(_preset_dir().iterdir(), key=lambda p: p.name):
        if entry.name.endswith(".cfg"):
            out.append((entry.name[:-4], parse_config(entry.read_text()).description))
    return out


def load_preset(name: str) -> ScenarioConfig:
    name = ALIASES.get(name.removesuffix(".cfg"), name.removesuffix(".cfg"))
    entry = _preset_dir() / f"{name}.cfg"
    if not entry.is_file():
        raise ConfigError(f"no preset named {name!r}")
    return parse_config(entry.read_text())


def load_config(source: str) -> ScenarioConfig:
    """Read a scenario from a file path, falling back to a bundled preset name."""
    path = Path(source)
    if path.is_file():
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise ConfigError(f"cannot read {source}: {exc}") from None
        return parse_config(text)
    try:
        return load_preset(source)
    except ConfigError:
        raise ConfigError(f"{source!r} is neither a readable file nor a preset name") from None
