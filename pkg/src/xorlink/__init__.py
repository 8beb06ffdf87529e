"""Application-layer XOR erasure coding under intermittent cumulative feedback.

Simulates a sender that packs one fresh symbol plus up to b-1 repair slots
into each packet, a peeling receiver with per-symbol deadlines, and lossy
channels (Bernoulli, Gilbert-Elliott, LoRa-style interference). Two engines
produce identical results: a plain-object reference and a numba kernel.
"""

from ._accel import using_numba
from .channels import (
    BernoulliChannel,
    BernoulliParams,
    GilbertElliottChannel,
    GilbertElliottParams,
    LoRaChannel,
    LoRaParams,
    channel_kind,
    make_channel,
)
from .core import (
    CodedSlot,
    Feedback,
    Packet,
    SymbolSource,
    TimeConfig,
    UncodedSlot,
    oldest_unexpired,
    packet_cost,
    xor_payloads,
)
from .degree import DegreeTable, build_table, degree_select, recovery_probability
from .engine import (
    RunConfig,
    RunMetrics,
    RunTrace,
    StopRule,
    SweepResult,
    apply_axis,
    run,
    run_reference,
    sweep,
)
from .experiments import (
    CSV_HEADER,
    ExperimentError,
    ExperimentFile,
    dump_experiment,
    load_experiment,
    loads_experiment,
    run_experiment,
    write_csv,
)
from .receiver import Receiver
from .rng import Stream
from .schemes import SCHEMES, make_sender

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "using_numba",
    "BernoulliChannel",
    "BernoulliParams",
    "GilbertElliottChannel",
    "GilbertElliottParams",
    "LoRaChannel",
    "LoRaParams",
    "channel_kind",
    "make_channel",
    "CodedSlot",
    "Feedback",
    "Packet",
    "SymbolSource",
    "TimeConfig",
    "UncodedSlot",
    "oldest_unexpired",
    "packet_cost",
    "xor_payloads",
    "DegreeTable",
    "build_table",
    "degree_select",
    "recovery_probability",
    "RunConfig",
    "RunMetrics",
    "RunTrace",
    "StopRule",
    "SweepResult",
    "apply_axis",
    "run",
    "run_reference",
    "sweep",
    "CSV_HEADER",
    "ExperimentError",
    "ExperimentFile",
    "dump_experiment",
    "load_experiment",
    "loads_experiment",
    "run_experiment",
    "write_csv",
    "Receiver",
    "Stream",
    "SCHEMES",
    "make_sender",
]
