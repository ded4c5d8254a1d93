"""Run configuration: flat line-oriented key-value files with sections.

Grammar (INI-style, parsed with the stdlib configparser):

    # comment (';' also works)
    [section]
    key = value

* values are bare strings; numbers use C locale ('.' decimal point)
* list values are whitespace-separated, e.g. ``n_values = 1024 2048 4096``
* booleans: true/false (case-insensitive), 1/0, yes/no
* section and key names are case-sensitive and lower-case by convention

Every run file needs a ``[run]`` section with at least ``command``; the
remaining sections depend on the command (see README).  Parsed configs
round-trip losslessly through :meth:`RunConfig.to_text` (comments are not
data and are dropped; keys, sections and their order are preserved).
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .errors import ConfigError

__all__ = ["RunConfig", "COMMANDS"]

COMMANDS = ("ground-qfi", "dyn-qfi", "sweep", "fit", "oracle-check", "phase")


def _parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(
        interpolation=None, delimiters=("=",), comment_prefixes=("#", ";"),
        inline_comment_prefixes=None, strict=True)
    cp.optionxform = str  # keep key case
    return cp


@dataclass
class RunConfig:
    """Parsed run configuration plus typed accessors."""

    command: str
    sections: Dict[str, Dict[str, str]]
    path: Optional[str] = None
    seed: int = 0
    version: str = "1"
    prefix: str = field(default="run")

    # -- construction ------------------------------------------------------

    @classmethod
    def from_text(cls, text: str, path: Optional[str] = None) -> "RunConfig":
        cp = _parser()
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"config parse failure: {exc}") from exc
        sections = {s: dict(cp.items(s)) for s in cp.sections()}
        if "run" not in sections:
            raise ConfigError("config needs a [run] section")
        run = sections["run"]
        command = run.get("command", "").strip()
        if command not in COMMANDS:
            raise ConfigError(
                f"[run] command must be one of {', '.join(COMMANDS)}; "
                f"got {command!r}")
        cfg = cls(command=command, sections=sections, path=path)
        cfg.seed = cfg.get_int("run", "seed", default=0)
        if cfg.seed < 0:
            raise ConfigError("[run] seed must be a non-negative integer")
        cfg.version = run.get("version", "1").strip()
        cfg.prefix = run.get("prefix", command.replace("-", "_")).strip()
        return cfg

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
        return cls.from_text(text, path=path)

    def to_text(self) -> str:
        cp = _parser()
        for name, kv in self.sections.items():
            cp.add_section(name)
            for k, v in kv.items():
                cp.set(name, k, v)
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    # -- typed accessors ----------------------------------------------------

    _MISSING = object()

    def _raw(self, section: str, key: str, default):
        sec = self.sections.get(section)
        if sec is None or key not in sec:
            if default is RunConfig._MISSING:
                raise ConfigError(f"missing [{section}] {key}")
            return None
        return sec[key]

    def has(self, section: str, key: str) -> bool:
        return key in self.sections.get(section, {})

    def get_str(self, section: str, key: str, default=_MISSING) -> Optional[str]:
        raw = self._raw(section, key, default)
        return (default if default is not RunConfig._MISSING else None) \
            if raw is None else raw.strip()

    def get_float(self, section: str, key: str, default=_MISSING) -> Optional[float]:
        raw = self._raw(section, key, default)
        if raw is None:
            return None if default is RunConfig._MISSING else default
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r} is not a number") from exc

    def get_int(self, section: str, key: str, default=_MISSING) -> Optional[int]:
        raw = self._raw(section, key, default)
        if raw is None:
            return None if default is RunConfig._MISSING else default
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r} is not an integer") from exc

    def get_bool(self, section: str, key: str, default=_MISSING) -> Optional[bool]:
        raw = self._raw(section, key, default)
        if raw is None:
            return None if default is RunConfig._MISSING else default
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"[{section}] {key} = {raw!r} is not a boolean")

    def get_floats(self, section: str, key: str, default=_MISSING) -> Optional[List[float]]:
        raw = self._raw(section, key, default)
        if raw is None:
            return None if default is RunConfig._MISSING else default
        try:
            return [float(tok) for tok in raw.split()]
        except ValueError as exc:
            raise ConfigError(
                f"[{section}] {key} = {raw!r} is not a list of numbers") from exc

    def get_ints(self, section: str, key: str, default=_MISSING) -> Optional[List[int]]:
        raw = self._raw(section, key, default)
        if raw is None:
            return None if default is RunConfig._MISSING else default
        try:
            return [int(tok) for tok in raw.split()]
        except ValueError as exc:
            raise ConfigError(
                f"[{section}] {key} = {raw!r} is not a list of integers") from exc
