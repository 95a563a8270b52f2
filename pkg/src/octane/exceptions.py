from typing import Optional


class OctaneError(ValueError):
    def __init__(self, msg: Optional[str] = None) -> None:
        self.msg = msg
        if msg is not None:
            super().__init__(msg)
        else:
            super().__init__()


class ConfigError(OctaneError):
    """Invalid configuration text, override or value."""

    def __init__(self, msg: str, line: Optional[int] = None, key: Optional[str] = None) -> None:
        self.line = line
        self.key = key
        location = f"line {line}: " if line is not None else ""
        super().__init__(f"{location}{msg}")


class ConstellationError(OctaneError):
    pass


class ConstellationFileError(ConstellationError):
    pass


class FormatError(OctaneError):
    pass


class BitLengthError(FormatError):
    pass


class MetricError(OctaneError):
    pass


class BracketError(MetricError):
    pass


class ConvergenceError(MetricError):
    pass


class WaveformError(OctaneError):
    pass


class GridCapacityError(WaveformError):
    pass


class PropagationError(WaveformError):
    """Raised when the field stops being finite during propagation."""

    pass


class LinkParameterError(OctaneError):
    """Invalid fibre span, amplifier or link parameter."""

    pass


class ThresholdNotReachedError(OctaneError):
    pass


class SweepError(OctaneError):
    pass
