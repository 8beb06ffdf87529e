"""Experiment files and result emission.

An experiment is a flat INI document: a [run] section (scheme(s), timing,
feedback, stopping, seed, output path), a [channel] section (the one nested
block), and an optional [sweep] section (axis, values, replicates). Parsing
is strict: unknown sections or keys are errors, and a parsed experiment
serializes back to an equivalent document (parse -> serialize -> parse is
lossless).

Results are written as CSV with a fixed header; floats use fixed-point
decimal so identical configs produce byte-identical files.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, replace

from .channels import (
    BernoulliParams,
    ChannelParams,
    GilbertElliottParams,
    LoRaParams,
    channel_kind,
)
from .core import TimeConfig
from .engine import RunConfig, RunMetrics, StopRule, apply_axis, run, sweep
from .schemes import SCHEMES

__all__ = [
    "ExperimentFile",
    "load_experiment",
    "loads_experiment",
    "dump_experiment",
    "run_experiment",
    "write_csv",
    "CSV_HEADER",
]

CSV_HEADER = (
    "scheme,channel,axis_value,replicate,seed,b,delta_max,p_feedback,"
    "generated,failures,dfr,packets_sent,symbols_combined_total,xor_ops_total,"
    "avg_xors_per_packet,intervals_run"
)

_RUN_KEYS = {
    "scheme",
    "schemes",
    "seed",
    "b",
    "delta_max",
    "symbol_bytes",
    "p_feedback",
    "min_failures",
    "max_intervals",
    "blind_degree",
    "output",
}
_CHANNEL_KEYS = {
    "bernoulli": {"kind", "p_success"},
    "gilbert_elliott": {"kind", "p_gb", "p_bg", "initial_state"},
    "lora": {
        "kind",
        "n_interferers",
        "sender_x",
        "sender_y",
        "box_low",
        "box_high",
        "tx_power_dbm",
        "sensitivity_dbm",
        "capture_db",
        "path_loss_exponent",
        "ref_distance_m",
        "ref_loss_db",
        "nakagami_m",
        "interferer_tx_prob",
    },
}
_SWEEP_KEYS = {"axis", "values", "replicates"}


@dataclass(frozen=True)
class ExperimentFile:
    base: RunConfig  # scheme field holds schemes[0]
    schemes: tuple[str, ...]
    output: str
    axis: str | None = None
    values: tuple[float, ...] | None = None
    replicates: int = 1

    @property
    def has_sweep(self) -> bool:
        return self.axis is not None


class ExperimentError(ValueError):
    """Malformed or contradictory experiment file."""


def _fail(where: str, msg: str):
    raise ExperimentError(f"[{where}] {msg}")


def _get(section, where: str, key: str, conv, default=None, required=False):
    if key not in section:
        if required:
            _fail(where, f"missing required key {key!r}")
        return default
    raw = section[key].strip()
    try:
        return conv(raw)
    except ValueError:
        _fail(where, f"bad value for {key}: {raw!r}")


def _float_list(raw: str) -> tuple[float, ...]:
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    if not parts:
        raise ValueError("empty list")
    return tuple(float(p) for p in parts)


def _check_keys(section, where: str, allowed: set[str]) -> None:
    unknown = set(section) - allowed
    if unknown:
        _fail(where, f"unknown keys: {', '.join(sorted(unknown))}")


def _parse_channel(section) -> ChannelParams:
    kind = _get(section, "channel", "kind", str, required=True)
    if kind not in _CHANNEL_KEYS:
        _fail("channel", f"unknown kind {kind!r}; expected one of {sorted(_CHANNEL_KEYS)}")
    _check_keys(section, "channel", _CHANNEL_KEYS[kind])
    try:
        if kind == "bernoulli":
            return BernoulliParams(p_success=_get(section, "channel", "p_success", float, required=True))
        if kind == "gilbert_elliott":
            return GilbertElliottParams(
                p_gb=_get(section, "channel", "p_gb", float, required=True),
                p_bg=_get(section, "channel", "p_bg", float, required=True),
                initial_state=_get(section, "channel", "initial_state", str, default="good"),
            )
        defaults = LoRaParams()
        return LoRaParams(
            n_interferers=_get(section, "channel", "n_interferers", int, defaults.n_interferers),
            sender_pos=(
                _get(section, "channel", "sender_x", float, defaults.sender_pos[0]),
                _get(section, "channel", "sender_y", float, defaults.sender_pos[1]),
            ),
            interferer_box=(
                _get(section, "channel", "box_low", float, defaults.interferer_box[0]),
                _get(section, "channel", "box_high", float, defaults.interferer_box[1]),
            ),
            tx_power_dbm=_get(section, "channel", "tx_power_dbm", float, defaults.tx_power_dbm),
            sensitivity_dbm=_get(section, "channel", "sensitivity_dbm", float, defaults.sensitivity_dbm),
            capture_db=_get(section, "channel", "capture_db", float, defaults.capture_db),
            path_loss_exponent=_get(
                section, "channel", "path_loss_exponent", float, defaults.path_loss_exponent
            ),
            ref_distance_m=_get(section, "channel", "ref_distance_m", float, defaults.ref_distance_m),
            ref_loss_db=_get(section, "channel", "ref_loss_db", float, defaults.ref_loss_db),
            nakagami_m=_get(section, "channel", "nakagami_m", float, defaults.nakagami_m),
            interferer_tx_prob=_get(
                section, "channel", "interferer_tx_prob", float, defaults.interferer_tx_prob
            ),
        )
    except ExperimentError:
        raise
    except ValueError as exc:
        _fail("channel", str(exc))


def loads_experiment(text: str) -> ExperimentFile:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ExperimentError(f"not valid INI: {exc}") from None

    sections = set(parser.sections())
    if not {"run", "channel"} <= sections:
        _fail("file", "sections [run] and [channel] are required")
    extra = sections - {"run", "channel", "sweep"}
    if extra:
        _fail("file", f"unknown sections: {', '.join(sorted(extra))}")

    run_sec = parser["run"]
    _check_keys(run_sec, "run", _RUN_KEYS)
    if ("scheme" in run_sec) == ("schemes" in run_sec):
        _fail("run", "exactly one of 'scheme' or 'schemes' is required")
    if "scheme" in run_sec:
        schemes = (run_sec["scheme"].strip(),)
    else:
        schemes = tuple(s.strip() for s in run_sec["schemes"].split(",") if s.strip())
    if not schemes:
        _fail("run", "no schemes given")
    for s in schemes:
        if s not in SCHEMES:
            _fail("run", f"unknown scheme {s!r}; expected one of {SCHEMES}")
    if len(set(schemes)) != len(schemes):
        _fail("run", "duplicate scheme")

    channel = _parse_channel(parser["channel"])

    try:
        time = TimeConfig(
            delta_max=_get(run_sec, "run", "delta_max", int, required=True),
            b=_get(run_sec, "run", "b", int, required=True),
            symbol_bytes=_get(run_sec, "run", "symbol_bytes", int, default=1),
        )
        stop = StopRule(
            min_failures=_get(run_sec, "run", "min_failures", int, default=100),
            max_intervals=_get(run_sec, "run", "max_intervals", int, default=1_000_000),
        )
        base = RunConfig(
            scheme=schemes[0],
            channel=channel,
            time=time,
            p_feedback=_get(run_sec, "run", "p_feedback", float, required=True),
            seed=_get(run_sec, "run", "seed", int, required=True),
            stop=stop,
            blind_degree=_get(run_sec, "run", "blind_degree", int, default=None),
        )
    except ExperimentError:
        raise
    except ValueError as exc:
        _fail("run", str(exc))

    output = _get(run_sec, "run", "output", str, default="results.csv")

    axis = None
    values = None
    replicates = 1
    if "sweep" in sections:
        sweep_sec = parser["sweep"]
        _check_keys(sweep_sec, "sweep", _SWEEP_KEYS)
        axis = _get(sweep_sec, "sweep", "axis", str, required=True)
        values = _get(sweep_sec, "sweep", "values", _float_list, required=True)
        replicates = _get(sweep_sec, "sweep", "replicates", int, default=1)
        if replicates < 1:
            _fail("sweep", "replicates must be >= 1")
        for v in values:
            try:
                apply_axis(base, axis, v)
            except ValueError as exc:
                _fail("sweep", str(exc))

    return ExperimentFile(
        base=base, schemes=schemes, output=output, axis=axis, values=values, replicates=replicates
    )


def load_experiment(path: str) -> ExperimentFile:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ExperimentError(f"cannot read {path}: {exc}") from None
    return loads_experiment(text)


def _fmt_float(v: float) -> str:
    if math.isinf(v):
        return "inf"
    return repr(float(v))


def dump_experiment(exp: ExperimentFile) -> str:
    """Canonical INI text; loads_experiment(dump_experiment(e)) == e."""
    base = exp.base
    out = io.StringIO()
    w = out.write
    w("[run]\n")
    if len(exp.schemes) == 1:
        w(f"scheme = {exp.schemes[0]}\n")
    else:
        w(f"schemes = {', '.join(exp.schemes)}\n")
    w(f"seed = {base.seed}\n")
    w(f"b = {base.time.b}\n")
    w(f"delta_max = {base.time.delta_max}\n")
    w(f"symbol_bytes = {base.time.symbol_bytes}\n")
    w(f"p_feedback = {_fmt_float(base.p_feedback)}\n")
    w(f"min_failures = {base.stop.min_failures}\n")
    w(f"max_intervals = {base.stop.max_intervals}\n")
    if base.blind_degree is not None:
        w(f"blind_degree = {base.blind_degree}\n")
    w(f"output = {exp.output}\n")

    ch = base.channel
    w("\n[channel]\n")
    w(f"kind = {channel_kind(ch)}\n")
    if isinstance(ch, BernoulliParams):
        w(f"p_success = {_fmt_float(ch.p_success)}\n")
    elif isinstance(ch, GilbertElliottParams):
        w(f"p_gb = {_fmt_float(ch.p_gb)}\n")
        w(f"p_bg = {_fmt_float(ch.p_bg)}\n")
        w(f"initial_state = {ch.initial_state}\n")
    else:
        w(f"n_interferers = {ch.n_interferers}\n")
        w(f"sender_x = {_fmt_float(ch.sender_pos[0])}\n")
        w(f"sender_y = {_fmt_float(ch.sender_pos[1])}\n")
        w(f"box_low = {_fmt_float(ch.interferer_box[0])}\n")
        w(f"box_high = {_fmt_float(ch.interferer_box[1])}\n")
        w(f"tx_power_dbm = {_fmt_float(ch.tx_power_dbm)}\n")
        w(f"sensitivity_dbm = {_fmt_float(ch.sensitivity_dbm)}\n")
        w(f"capture_db = {_fmt_float(ch.capture_db)}\n")
        w(f"path_loss_exponent = {_fmt_float(ch.path_loss_exponent)}\n")
        w(f"ref_distance_m = {_fmt_float(ch.ref_distance_m)}\n")
        w(f"ref_loss_db = {_fmt_float(ch.ref_loss_db)}\n")
        w(f"nakagami_m = {_fmt_float(ch.nakagami_m)}\n")
        w(f"interferer_tx_prob = {_fmt_float(ch.interferer_tx_prob)}\n")

    if exp.has_sweep:
        w("\n[sweep]\n")
        w(f"axis = {exp.axis}\n")
        w(f"values = {', '.join(_fmt_float(v) for v in exp.values)}\n")
        w(f"replicates = {exp.replicates}\n")
    return out.getvalue()


# --- execution and CSV --------------------------------------------------------


def _fmt_axis(v) -> str:
    if v == "":
        return ""
    f = float(v)
    return str(int(f)) if f.is_integer() else repr(f)


def _row(scheme: str, cfg: RunConfig, axis_value, replicate: int, m: RunMetrics) -> str:
    return ",".join(
        [
            scheme,
            channel_kind(cfg.channel),
            _fmt_axis(axis_value),
            str(replicate),
            str(m.seed),
            str(cfg.time.b),
            str(cfg.time.delta_max),
            _fmt_float(cfg.p_feedback),
            str(m.generated),
            str(m.failures),
            f"{m.dfr:.10f}",
            str(m.packets_sent),
            str(m.symbols_combined_total),
            str(m.xor_ops_total),
            f"{m.avg_xors_per_packet:.6f}",
            str(m.intervals_run),
        ]
    )


def run_experiment(
    exp: ExperimentFile,
    mode: str,
    backend: str = "auto",
    workers: int | None = None,
) -> list[str]:
    """CSV rows (without header) for `xorlink run` or `xorlink sweep`."""
    if mode == "run":
        rows = []
        for scheme in exp.schemes:
            cfg = replace(exp.base, scheme=scheme)
            rows.append(_row(scheme, cfg, "", 0, run(cfg, backend=backend)))
        return rows
    if mode == "sweep":
        if not exp.has_sweep:
            raise ExperimentError("[sweep] section is required for the sweep command")
        rows = []
        for scheme in exp.schemes:
            base = replace(exp.base, scheme=scheme)
            for res in sweep(
                base, exp.axis, exp.values, exp.replicates, backend=backend, workers=workers
            ):
                rows.append(_row(scheme, res.config, res.value, res.replicate, res.metrics))
        return rows
    raise ValueError(f"unknown mode {mode!r}")


def write_csv(rows: list[str], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(row + "\n")
