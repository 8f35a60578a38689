"""Run configuration files.

Grammar (INI, read with :mod:`configparser`)::

    [run]                 ; applies to every subcommand
    seed = 0
    workers = 2
    sigma = 0.01, 0.02    ; lists are comma separated

    [shor-sweep]          ; applies to one subcommand, overrides [run]
    realizations = 20
    model = relative
    category = typed-sym, non-typed

Keys are the long command-line flag names without the leading dashes, with
``-`` or ``_`` accepted interchangeably. Command-line flags override file
values. Unknown sections or keys are rejected.
"""

from __future__ import annotations

import configparser

KNOWN_KEYS = {
    "sigma", "seed", "realizations", "delta_l", "model", "category", "out", "workers",
    "emit_svg", "n", "base", "allow_large", "limit", "min_per_band", "s", "a", "l",
    "eta", "x0", "window", "input",
}


class ConfigError(ValueError):
    pass


def load_config(path, command: str) -> dict[str, str]:
    """Raw string values for ``command``: the ``[run]`` section overlaid with ``[command]``."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    from .cli import COMMANDS

    values: dict[str, str] = {}
    for section in parser.sections():
        if section != "run" and section not in COMMANDS:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key in parser[section]:
            if key.replace("-", "_") not in KNOWN_KEYS:
                raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")
    for section in ("run", command):
        if parser.has_section(section):
            for key, value in parser[section].items():
                values[key.replace("-", "_")] = value.strip()
    return values


def split_list(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def parse_bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {value!r}")
