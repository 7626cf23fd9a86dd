"""Choose between the mixed-precision and binary64 normal-equation solvers.

In ``auto`` mode the solver starts mixed and moves to binary64 for good once
the CG phase of an iteration costs more than ``switch_factor`` times the mean
build-plus-factor time seen so far, or as soon as the mixed route signals a
fallback.
"""

from __future__ import annotations

import dataclasses

MIXED = "mixed"
DOUBLE = "double"
AUTO = "auto"
MODES = (MIXED, DOUBLE, AUTO)


@dataclasses.dataclass
class PolicyState:
    policy: str = AUTO
    switch_factor: float = 0.75
    mode: str = MIXED
    mean_build_factor: float = 0.0
    last_cg: float = 0.0
    samples: int = 0
    fallback: bool = False
    k_switch: int | None = None

    def __post_init__(self):
        if self.policy not in MODES:
            raise ValueError(f"policy must be one of {MODES}, got {self.policy!r}")
        if not self.switch_factor > 0:
            raise ValueError("switch_factor must be positive")
        self.mode = DOUBLE if self.policy == DOUBLE else MIXED


def record_mixed_iteration(state: PolicyState, build_factor_time: float, cg_time: float) -> PolicyState:
    if build_factor_time < 0 or cg_time < 0:
        raise ValueError("timings must be nonnegative")
    if state.mode != MIXED:
        raise ValueError("record_mixed_iteration called while in double mode")
    state.samples += 1
    state.mean_build_factor += (build_factor_time - state.mean_build_factor) / state.samples
    state.last_cg = cg_time
    return state


def signal_fallback(state: PolicyState) -> PolicyState:
    state.fallback = True
    return state


def should_switch(state: PolicyState) -> bool:
    if state.mode == DOUBLE:
        return False
    if state.fallback:
        return True
    if state.policy != AUTO or state.samples == 0:
        return False
    return state.last_cg > state.switch_factor * state.mean_build_factor


def switch_to_double(state: PolicyState, k: int) -> PolicyState:
    """Enter binary64 mode; ``k`` is the first iteration solved in binary64."""
    if state.mode == DOUBLE:
        return state
    state.mode = DOUBLE
    state.k_switch = k
    return state
