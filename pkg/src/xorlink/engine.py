"""Run orchestration: configs, the per-interval loop, metrics, sweeps.

Event order within interval i is fixed:

  1. receiver adjudicates the symbol whose deadline is i
  2. sender consumes interval i-1's feedback outcome and builds packet i
     (one fresh symbol is generated per interval)
  3. channel draw
  4. if delivered, the receiver processes the packet (decode + peel)
  5. receiver computes cumulative feedback for this interval
  6. the feedback reaches the sender for interval i+1 with prob. p_feedback

A run stops once at least stop.min_failures failures accumulated (or at the
interval cap) and is then drained for delta_max further expiry-only intervals
so every generated symbol is adjudicated: generated == delivered + failures.

Three independent RNG substreams (channel, feedback, scheme) derive from the
run seed, so e.g. the erasure pattern is invariant to p_feedback.

run() executes on the flat-array kernel by default; run_reference() is the
object-level twin used for auditing. Both produce identical RunMetrics.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from .channels import (
    BernoulliParams,
    ChannelParams,
    GilbertElliottParams,
    LoRaParams,
    channel_kind,
    feedback_arrives,
    make_channel,
)
from .core import Feedback, SymbolSource, TimeConfig, packet_cost
from .receiver import Receiver
from .rng import Stream
from .schemes import SCHEMES, make_sender

__all__ = [
    "StopRule",
    "RunConfig",
    "RunMetrics",
    "RunTrace",
    "SweepResult",
    "AXES",
    "run",
    "run_reference",
    "apply_axis",
    "sweep",
    "default_workers",
]

CHANNEL_STREAM = 0
FEEDBACK_STREAM = 1
SCHEME_STREAM = 2

_MAX_SEED = 2**63 - 1


@dataclass(frozen=True)
class StopRule:
    """Stop after min_failures failures, but never beyond max_intervals."""

    min_failures: int = 100
    max_intervals: int = 1_000_000

    def __post_init__(self):
        if self.min_failures < 1:
            raise ValueError("min_failures must be >= 1")
        if self.max_intervals < 1:
            raise ValueError("max_intervals must be >= 1")


@dataclass(frozen=True)
class RunConfig:
    scheme: str
    channel: ChannelParams
    time: TimeConfig
    p_feedback: float = 1.0
    seed: int = 0
    stop: StopRule = field(default_factory=StopRule)
    blind_degree: int | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if not 0.0 <= self.p_feedback <= 1.0:
            raise ValueError(f"p_feedback must be in [0, 1], got {self.p_feedback}")
        if not 0 <= self.seed <= _MAX_SEED:
            raise ValueError("seed must be a non-negative 63-bit integer")
        if self.blind_degree is not None and not 1 <= self.blind_degree <= self.time.delta_max:
            raise ValueError(
                f"blind_degree must be in [1, {self.time.delta_max}], got {self.blind_degree}"
            )


@dataclass(frozen=True)
class RunMetrics:
    generated: int
    delivered: int
    failures: int
    dfr: float
    packets_sent: int
    symbols_combined_total: int
    xor_ops_total: int
    avg_xors_per_packet: float
    intervals_run: int
    seed: int


@dataclass
class RunTrace:
    """Per-interval observables, for equivalence and invariant tests."""

    channel_delivered: list = field(default_factory=list)
    feedback_seen: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    delivered: list = field(default_factory=list)


def _finish_metrics(cfg: RunConfig, generated, delivered, failures, combined, ops) -> RunMetrics:
    return RunMetrics(
        generated=generated,
        delivered=delivered,
        failures=failures,
        dfr=failures / generated,
        packets_sent=generated,
        symbols_combined_total=combined,
        xor_ops_total=ops,
        avg_xors_per_packet=ops / generated,
        intervals_run=generated,
        seed=cfg.seed,
    )


def run_reference(cfg: RunConfig, trace: RunTrace | None = None) -> RunMetrics:
    """Object-level twin of the kernel; authoritative for semantics."""
    time = cfg.time
    source = SymbolSource(cfg.seed, time.symbol_bytes)
    channel = make_channel(cfg.channel, Stream.from_seed(cfg.seed, CHANNEL_STREAM))
    fb_stream = Stream.from_seed(cfg.seed, FEEDBACK_STREAM)
    sender = make_sender(
        cfg.scheme,
        time,
        Stream.from_seed(cfg.seed, SCHEME_STREAM),
        source,
        blind_degree=cfg.blind_degree,
    )
    recv = Receiver(time)

    combined = 0
    ops = 0
    pending_fb: Feedback | None = None
    i = 0
    while True:
        recv.expire_and_count(i)

        sender.observe_feedback(i, pending_fb)
        packet = sender.build_packet(i)
        c, o = packet_cost(packet)
        combined += c
        ops += o

        ok = channel.transmit()
        if ok:
            for seq in recv.process_packet(packet, i):
                if recv.payload_of(seq) != source.payload(seq):
                    raise RuntimeError(f"decoded payload for symbol {seq} is not bit-exact")

        fb = recv.make_feedback(ok, last_pkt_seq=i, now=i)
        seen = feedback_arrives(cfg.p_feedback, fb_stream)
        pending_fb = fb if seen else None

        if trace is not None:
            trace.channel_delivered.append(ok)
            trace.feedback_seen.append(seen)
            trace.failures.append(recv.failure_count)
            trace.delivered.append(recv.delivered_count)

        i += 1
        if recv.failure_count >= cfg.stop.min_failures or i >= cfg.stop.max_intervals:
            break

    for j in range(i, i + time.delta_max):
        recv.expire_and_count(j)

    return _finish_metrics(cfg, i, recv.delivered_count, recv.failure_count, combined, ops)


def run(cfg: RunConfig, backend: str = "auto", trace: RunTrace | None = None) -> RunMetrics:
    """Execute one run. backend: "auto"/"kernel" (fast path) or "reference"."""
    if backend == "reference":
        return run_reference(cfg, trace)
    if backend not in ("auto", "kernel"):
        raise ValueError(f"unknown backend {backend!r}")

    from .kernels import run_kernel

    totals, ktrace = run_kernel(cfg, want_trace=trace is not None)
    if trace is not None:
        trace.channel_delivered.extend(ktrace["channel_delivered"])
        trace.feedback_seen.extend(ktrace["feedback_seen"])
        trace.failures.extend(ktrace["failures"])
        trace.delivered.extend(ktrace["delivered"])
    return _finish_metrics(
        cfg, int(totals[0]), int(totals[1]), int(totals[2]), int(totals[3]), int(totals[4])
    )


# --- sweeps -------------------------------------------------------------------

AXES = ("p_feedback", "b", "delta_max", "p_success", "p_gb", "p_bg", "n_interferers")
_INT_AXES = {"b", "delta_max", "n_interferers"}


def _as_int(axis: str, value: float) -> int:
    if float(value) != int(value):
        raise ValueError(f"axis {axis!r} takes integer values, got {value}")
    return int(value)


def apply_axis(cfg: RunConfig, axis: str, value: float) -> RunConfig:
    """New config with one swept parameter replaced (validates axis/channel fit)."""
    if axis == "p_feedback":
        return replace(cfg, p_feedback=float(value))
    if axis == "b":
        return replace(cfg, time=replace(cfg.time, b=_as_int(axis, value)))
    if axis == "delta_max":
        return replace(cfg, time=replace(cfg.time, delta_max=_as_int(axis, value)))
    if axis == "p_success":
        if not isinstance(cfg.channel, BernoulliParams):
            raise ValueError("axis p_success needs a bernoulli channel")
        return replace(cfg, channel=replace(cfg.channel, p_success=float(value)))
    if axis == "p_gb":
        if not isinstance(cfg.channel, GilbertElliottParams):
            raise ValueError("axis p_gb needs a gilbert_elliott channel")
        return replace(cfg, channel=replace(cfg.channel, p_gb=float(value)))
    if axis == "p_bg":
        if not isinstance(cfg.channel, GilbertElliottParams):
            raise ValueError("axis p_bg needs a gilbert_elliott channel")
        return replace(cfg, channel=replace(cfg.channel, p_bg=float(value)))
    if axis == "n_interferers":
        if not isinstance(cfg.channel, LoRaParams):
            raise ValueError("axis n_interferers needs a lora channel")
        return replace(cfg, channel=replace(cfg.channel, n_interferers=_as_int(axis, value)))
    raise ValueError(f"unknown sweep axis {axis!r}; expected one of {AXES}")


@dataclass(frozen=True)
class SweepResult:
    axis: str
    value: float
    replicate: int
    config: RunConfig
    metrics: RunMetrics


def default_workers() -> int:
    """Worker count from XORLINK_WORKERS (default 1)."""
    raw = os.environ.get("XORLINK_WORKERS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"XORLINK_WORKERS must be an integer, got {raw!r}") from None
    return max(1, n)


def sweep(
    base: RunConfig,
    axis: str,
    values,
    replicates: int,
    backend: str = "auto",
    workers: int | None = None,
) -> list[SweepResult]:
    """Grid of runs: every value x replicate, seeds base.seed + replicate.

    Result order is deterministic (value-major, then replicate) regardless of
    the worker count. The compiled kernel releases the GIL, so threads give
    real parallelism when numba is enabled.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    jobs = []
    for value in values:
        pointed = apply_axis(base, axis, value)
        for rep in range(replicates):
            jobs.append((value, rep, replace(pointed, seed=base.seed + rep)))

    if workers is None:
        workers = default_workers()

    if workers <= 1 or len(jobs) <= 1:
        metrics = [run(cfg, backend=backend) for _, _, cfg in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run, cfg, backend) for _, _, cfg in jobs]
            metrics = [f.result() for f in futures]

    return [
        SweepResult(axis=axis, value=value, replicate=rep, config=cfg, metrics=m)
        for (value, rep, cfg), m in zip(jobs, metrics)
    ]


def describe_channel(params: ChannelParams) -> str:
    return channel_kind(params)
