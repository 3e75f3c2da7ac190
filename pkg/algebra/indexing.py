"""
Linear index references.
Contains the ``array[k*i + b]`` reference shared by qubit operands and gate-array factors.
"""

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class LinearRef:
    """Reference ``array[slope * i + intercept]`` relative to the loop variable ``i``."""

    array: str
    slope: int
    intercept: int

    @property
    def is_concrete(self) -> bool:
        return self.slope == 0

    def at(self, value: int) -> int:
        """Concrete index at iteration ``value``."""
        return self.slope * value + self.intercept

    def shift(self, delta: int):
        """Re-express the reference after substituting ``i -> i + delta``."""
        if delta == 0:
            return self
        return replace(self, intercept=self.intercept + self.slope * delta)

    def reindex(self, scale: int, offset: int):
        """Substitute ``i -> scale * j + offset``."""
        return replace(self, slope=self.slope * scale, intercept=self.slope * offset + self.intercept)

    def freeze(self, value: int):
        """Pin the reference to the concrete iteration ``value``."""
        return replace(self, slope=0, intercept=self.at(value))

    def __str__(self) -> str:
        return f"{self.array}[{format_linear(self.slope, 'i', self.intercept)}]"


def format_linear(slope: int, var: str, intercept: int) -> str:
    """Render ``slope * var + intercept`` compactly, e.g. ``2*i-1`` or ``i``."""
    if slope == 0:
        return str(intercept)
    if slope == 1:
        text = var
    elif slope == -1:
        text = f"-{var}"
    else:
        text = f"{slope}*{var}"
    if intercept > 0:
        text += f"+{intercept}"
    elif intercept < 0:
        text += f"-{-intercept}"
    return text
