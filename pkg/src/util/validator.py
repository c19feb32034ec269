"""Field rules for the training and experiment configs.

A ConfigSchema maps field names to rules. Each rule returns an error message
or None; only the first failing rule of a field is reported.
"""
import math
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Sequence

from src.error_handling.error_handling import ConfigurationError


class FieldRule:

    def check(self, name: str, value: Any) -> Optional[str]:
        raise NotImplementedError("FieldRule subclasses implement check")


class Present(FieldRule):

    def check(self, name: str, value: Any) -> Optional[str]:
        if value is None or (isinstance(value, str) and not value.strip()):
            return f"{name} is required"
        return None


class Bounded(FieldRule):
    """Numeric interval check. NaN never passes."""

    def __init__(self, low: Optional[float] = None, high: Optional[float] = None, open_low: bool = False):
        self.low = low
        self.high = high
        self.open_low = open_low

    def interval(self) -> str:
        left = "(" if self.open_low or self.low is None else "["
        low = "-inf" if self.low is None else f"{self.low:g}"
        high = "inf)" if self.high is None else f"{self.high:g}]"
        return f"{left}{low}, {high}"

    def check(self, name: str, value: Any) -> Optional[str]:
        if value is None:
            return None
        try:
            number = float(value)
        except (TypeError, ValueError):
            return f"{name} must be a number, got {value!r}"

        too_low = self.low is not None and (number < self.low or (self.open_low and number == self.low))
        too_high = self.high is not None and number > self.high
        if math.isnan(number) or too_low or too_high:
            return f"{name} must lie in {self.interval()}, got {value!r}"
        return None


class OneOf(FieldRule):

    def __init__(self, choices: Iterable[Any]):
        self.choices = tuple(choices)

    def check(self, name: str, value: Any) -> Optional[str]:
        if value is None or value in self.choices:
            return None
        return f"{name} must be one of {', '.join(map(str, self.choices))}, got {value!r}"


class Satisfies(FieldRule):
    """Predicate rule; `message` may use {name} and {value}."""

    def __init__(self, predicate: Callable[[Any], bool], message: str):
        self.predicate = predicate
        self.message = message

    def check(self, name: str, value: Any) -> Optional[str]:
        if value is None or self.predicate(value):
            return None
        return self.message.format(name=name, value=value)


class ConfigSchema:

    def __init__(self, label: str, rules: Dict[str, Sequence[FieldRule]]):
        self.label = label
        self.rules = rules

    def errors(self, record: Mapping[str, Any]) -> List[str]:
        found = []
        for name, rules in self.rules.items():
            value = record.get(name)
            for rule in rules:
                message = rule.check(name, value)
                if message:
                    found.append(message)
                    break
        return found

    def enforce(self, record: Mapping[str, Any], extra: Iterable[str] = ()):
        """Raise ConfigurationError listing field errors plus any cross-field `extra` errors."""
        errors = self.errors(record) + list(extra)
        if errors:
            raise ConfigurationError(f"Invalid {self.label} config: " + "; ".join(errors),
                                     details={"errors": errors})
