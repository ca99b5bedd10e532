# calcs/utils.py

import json
import logging
import os
from dataclasses import dataclass, replace
from typing import Any, List, Optional

import galois


class IntresError(ValueError):
    """Base class for every error raised on bad user input."""


class InputFormatError(IntresError):
    """A document does not follow the poset/module schema."""

    def __init__(self, message: str, path: str = "", line: Optional[int] = None):
        self.path = path
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if path:
            where.append(f"field '{path}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class PosetError(IntresError):
    """Relations do not define a partial order, or family parameters are invalid."""


class ModuleValidationError(IntresError):
    """Maps of a module have the wrong shape or a square does not commute."""

    def __init__(self, message: str, square: Optional[tuple] = None):
        self.square = square
        super().__init__(message)


class CapExceededError(IntresError):
    """An exhaustive search was asked to run beyond its configured cap."""


class InvariantError(RuntimeError):
    """An internal certificate failed. Always a bug, never bad input."""


class StepLimitError(InvariantError):
    """A resolution did not terminate within the step cap."""


@dataclass(frozen=True)
class Settings:
    field: int = 2
    reduce_support: bool = True
    max_steps: int = 64
    brute_force_max_dim: int = 10
    brute_force_max_elements: int = 6
    brute_force_max_family: int = 24
    iso_exhaustive_max_dim: int = 6
    iso_random_trials: int = 4000
    certify_covers: bool = True
    seed: int = 0
    log_level: str = "WARNING"

    def with_overrides(self, **overrides: Any) -> "Settings":
        """
        Returns a copy with the given fields replaced; None values are ignored.
        """
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def load_settings() -> Settings:
    """
    Builds Settings from the defaults and the environment.

    Environment:
    - INTRES_FIELD: prime characteristic of the base field.
    - INTRES_LOG_LEVEL: logging level name.

    Returns:
    - Settings instance.
    """
    settings = Settings()
    raw_field = os.environ.get("INTRES_FIELD")
    if raw_field:
        try:
            p = int(raw_field)
        except ValueError:
            raise InputFormatError(f"INTRES_FIELD must be an integer, got {raw_field!r}.")
        if not galois.is_prime(p):
            raise InputFormatError(f"INTRES_FIELD must be prime, got {p}.")
        settings = settings.with_overrides(field=p)
    level = os.environ.get("INTRES_LOG_LEVEL")
    if level:
        settings = settings.with_overrides(log_level=level.upper())
    return settings


def configure_logging(level: str) -> None:
    numeric = getattr(logging, level.upper(), None)
    if not isinstance(numeric, int):
        raise InputFormatError(f"Unknown log level {level!r}.")
    logging.basicConfig(
        level=numeric,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    logging.getLogger().setLevel(numeric)


def parse_json_text(text: str, source: str = "<input>") -> Any:
    """
    Parses JSON text, turning syntax errors into InputFormatError with a line number.
    """
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputFormatError(f"{source}: invalid JSON ({e.msg}, column {e.colno}).", line=e.lineno)


def dump_json(doc: Any) -> str:
    """
    Serializes a document the one way the CLI emits JSON: sorted keys, two-space indent.
    """
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def split_labels(raw: str) -> List[str]:
    """
    Splits a comma-separated label list, dropping blanks.
    """
    labels = [part.strip() for part in raw.split(",") if part.strip()]
    if not labels:
        raise InputFormatError("Expected a non-empty comma-separated list of element labels.")
    return labels


def expect_type(value: Any, kind: type, path: str) -> Any:
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        raise InputFormatError(f"expected {kind.__name__}, got {type(value).__name__}", path=path)
    return value
