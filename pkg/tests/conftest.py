"""Shared fixtures: one-time kernel warm-up so timed tests measure simulation,
not JIT compilation. Hypothesis runs derandomized so the suite is reproducible."""

import sys

import pytest
from hypothesis import HealthCheck, settings

from xorlink._accel import using_numba

settings.register_profile(
    "repo",
    max_examples=60,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")
from xorlink.channels import BernoulliParams, GilbertElliottParams, LoRaParams
from xorlink.core import TimeConfig
from xorlink.engine import RunConfig, StopRule
from xorlink.kernels import ge_loss_fraction, run_kernel


@pytest.fixture(scope="session", autouse=True)
def warm_kernel():
    """Compile every kernel entry point once before anything is timed."""
    channels = [
        BernoulliParams(p_success=0.5),
        GilbertElliottParams(p_gb=0.3, p_bg=0.5),
        LoRaParams(n_interferers=2),
    ]
    for scheme in ("windowed", "selective", "repetition", "blind"):
        for ch in channels:
            cfg = RunConfig(
                scheme=scheme,
                channel=ch,
                time=TimeConfig(b=2, delta_max=4, symbol_bytes=1),
                p_feedback=0.5,
                seed=0,
                stop=StopRule(min_failures=1, max_intervals=64),
            )
            run_kernel(cfg, want_trace=True)
    ge_loss_fraction(0, 0.2, 0.6, 0, 100)
    return using_numba()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the acceptance battery's one-line verdicts after the test run."""
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "REPORT", []) if mod else []
    if lines:
        terminalreporter.write_sep("-", "acceptance summary")
        for line in lines:
            terminalreporter.write_line(line)
