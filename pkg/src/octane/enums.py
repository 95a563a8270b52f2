from enum import Enum


class ParityType(str, Enum):
    """Parity rule used to drop the 12th bit of two concatenated 6-bit labels."""

    T1 = "T1"
    T2 = "T2"


class FormatKind(str, Enum):
    PLAIN_4D = "plain4d"
    PARITY_8D = "parity8d"
    TIME_HYBRID = "time_hybrid"


class LlrMethod(str, Enum):
    EXACT = "exact"
    MAXLOG = "maxlog"


class SweepAxis(str, Enum):
    SNR_DB = "snr_db"
    DISTANCE_SPANS = "distance_spans"
    LAUNCH_POWER_DBM = "launch_power_dbm"


class Qam8Geometry(str, Enum):
    RECT = "rect"
    STAR = "star"


class Subcommand(str, Enum):
    INSPECT_FORMAT = "inspect-format"
    AWGN_SWEEP = "awgn-sweep"
    REACH_SWEEP = "reach-sweep"
    POWER_SWEEP = "power-sweep"
