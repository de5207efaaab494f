"""Solver adapter configuration read from TOML."""

from __future__ import annotations

import os
import re
import sys
from dataclasses import dataclass, field
from importlib.resources import files
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..encode import CHC, COCHC, MUCLP, SMT

ENV_VAR = "MUSE_SOLVER_CONFIG"
LOCAL_FILE = "solvers.toml"

# which encodings each adapter kind accepts, in preference order
KIND_ENCODINGS = {"smt": (SMT,), "horn": (CHC,), "muclp": (MUCLP, COCHC)}

DEFAULT_REGEX = {
    "smt": (r"^unsat\b", r"^sat\b"),
    "horn": (r"^sat\b", r"^unsat\b"),
    "muclp": (r"^valid\b", r"^invalid\b"),
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    name: str
    kind: str
    cmd: str
    args: tuple[str, ...] = ("{file}",)
    valid_regex: str = ""
    invalid_regex: str = ""
    timeout_s: float = 300.0
    memory_mb: int = 6144  # advisory only

    def __post_init__(self) -> None:
        if self.kind not in KIND_ENCODINGS:
            raise ConfigError(f"backend {self.name}: kind must be one of {sorted(KIND_ENCODINGS)}")
        if not self.timeout_s > 0:
            raise ConfigError(f"backend {self.name}: timeout_s must be positive")
        valid, invalid = DEFAULT_REGEX[self.kind]
        object.__setattr__(self, "valid_regex", self.valid_regex or valid)
        object.__setattr__(self, "invalid_regex", self.invalid_regex or invalid)
        for rx in (self.valid_regex, self.invalid_regex):
            try:
                re.compile(rx)
            except re.error as e:
                raise ConfigError(f"backend {self.name}: bad regex {rx!r}: {e}") from None

    @property
    def encodings(self) -> tuple[str, ...]:
        return KIND_ENCODINGS[self.kind]

    def command(self, file: str | Path) -> list[str]:
        subst = {"file": str(file), "python": sys.executable}
        return [self.cmd.format(**subst), *(a.format(**subst) for a in self.args)]

    def with_timeout(self, timeout_s: float) -> SolverConfig:
        return SolverConfig(
            self.name, self.kind, self.cmd, self.args, self.valid_regex, self.invalid_regex,
            timeout_s, self.memory_mb,
        )


@dataclass
class SolverSet:
    backends: list[SolverConfig] = field(default_factory=list)
    source: str = "<empty>"

    def for_encoding(self, kind: str) -> SolverConfig | None:
        return next((b for b in self.backends if kind in b.encodings), None)

    def named(self, name: str) -> SolverConfig:
        for b in self.backends:
            if b.name == name:
                return b
        raise ConfigError(f"no backend named {name!r} in {self.source}")

    def with_timeout(self, timeout_s: float | None) -> SolverSet:
        if timeout_s is None:
            return self
        return SolverSet([b.with_timeout(timeout_s) for b in self.backends], self.source)


def parse_config(text: str, source: str = "<string>") -> SolverSet:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{source}: {e}") from None
    out = []
    for name, table in data.get("backend", {}).items():
        if not isinstance(table, dict) or "kind" not in table or "cmd" not in table:
            raise ConfigError(f"{source}: backend {name} needs kind and cmd")
        extra = set(table) - {"kind", "cmd", "args", "valid_regex", "invalid_regex", "timeout_s", "memory_mb"}
        if extra:
            raise ConfigError(f"{source}: backend {name}: unknown key {sorted(extra)[0]!r}")
        out.append(
            SolverConfig(
                name=name,
                kind=table["kind"],
                cmd=table["cmd"],
                args=tuple(table.get("args", ["{file}"])),
                valid_regex=table.get("valid_regex", ""),
                invalid_regex=table.get("invalid_regex", ""),
                timeout_s=float(table.get("timeout_s", 300)),
                memory_mb=int(table.get("memory_mb", 6144)),
            )
        )
    return SolverSet(out, source)


def config_path(explicit: str | Path | None = None) -> Path | None:
    """Explicit path, then ``$MUSE_SOLVER_CONFIG``, then ``./solvers.toml``."""
    for cand in (explicit, os.environ.get(ENV_VAR)):
        if cand:
            return Path(cand)
    local = Path(LOCAL_FILE)
    return local if local.is_file() else None


def load_config(explicit: str | Path | None = None) -> SolverSet:
    path = config_path(explicit)
    if path is None:
        res = files("muse.solve").joinpath("default_solvers.toml")
        return parse_config(res.read_text(), "built-in defaults")
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read solver config {path}: {e.strerror}") from None
    return parse_config(text, str(path))
