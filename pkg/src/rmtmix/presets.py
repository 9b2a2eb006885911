"""Named experiment configurations.

Desk presets are sized so each run finishes in minutes on one core while
still meeting its statistical targets; paper-scale presets reproduce the
full-size experiments and declare their much larger budgets explicitly.
"""

from __future__ import annotations

from .config import ExperimentConfig, parse_config

_PRESETS = {
    "goe-desk-256": (
        "GOE mix at N = 256 with ~1.7e5 bulk eigenvalues per time (plateau and number-variance checks)",
        """\
[experiment]
name = goe-desk-256
kind = goe-mix
size = 256
realizations = 654
seed = 20260817

[times]
mode = list
units = nt
values = 0.01 1 10
""",
    ),
    "goe-curve-256": (
        "GOE mix at N = 256 on a 10-point log grid (crossover curve, fit and histogram tests)",
        """\
[experiment]
name = goe-curve-256
kind = goe-mix
size = 256
realizations = 131
seed = 20260818

[times]
mode = log
units = nt
start = 0.01
stop = 10
count = 10
""",
    ),
    "goe-curve-128": (
        "GOE mix at N = 128, crossover-location grid",
        """\
[experiment]
name = goe-curve-128
kind = goe-mix
size = 128
realizations = 260
seed = 20260819

[times]
mode = log
units = nt
start = 0.1
stop = 10
count = 9
""",
    ),
    "goe-curve-512": (
        "GOE mix at N = 512, crossover-location grid",
        """\
[experiment]
name = goe-curve-512
kind = goe-mix
size = 512
realizations = 50
seed = 20260820

[times]
mode = log
units = nt
start = 0.1
stop = 10
count = 9
""",
    ),
    "gue-desk-256": (
        "GUE control at N = 256: unitary-class statistics at every time",
        """\
[experiment]
name = gue-desk-256
kind = gue-mix
size = 256
realizations = 100
seed = 20260821

[times]
mode = list
units = nt
values = 0.01 1 10
""",
    ),
    "goe-chi2-256": (
        "GOE mix at N = 256 with a small sample sized for distribution-shape chi-squared tests",
        """\
[experiment]
name = goe-chi2-256
kind = goe-mix
size = 256
realizations = 25
seed = 20260828

[times]
mode = list
units = nt
values = 0.01 1 10
""",
    ),
    "crossover-desk-256": (
        "Partially broken symmetry (alpha = 0.5) at N = 256 on the log grid",
        """\
[experiment]
name = crossover-desk-256
kind = crossover-mix
size = 256
realizations = 100
alpha = 0.5
seed = 20260822

[times]
mode = log
units = nt
start = 0.01
stop = 10
count = 10
""",
    ),
    "spin-hf-desk": (
        "Half-filled disordered Heisenberg ring, L = 10 (sector dimension 252), h = 0.5",
        """\
[experiment]
name = spin-hf-desk
kind = spin-hf
size = 10
disorder = 0.5
initial_state = random-real
realizations = 64
seed = 20260823

[times]
mode = list
units = t
values = 0.01 0.02 0.05 0.1 0.2 0.3 0.5 1 2 5 30 100
""",
    ),
    "spin-oe-desk": (
        "One-excitation disordered Heisenberg ring, L = 256, h = 0.1",
        """\
[experiment]
name = spin-oe-desk
kind = spin-oe
size = 256
disorder = 0.1
initial_state = random-real
realizations = 56
seed = 20260824

[times]
mode = list
units = t
values = 0.02 0.05 0.2 0.5 1 2 5 20 100
""",
    ),
    "goe-paper-1024": (
        "Full-scale GOE mix at N = 1024 (hours of compute; budget raised accordingly)",
        """\
[experiment]
name = goe-paper-1024
kind = goe-mix
size = 1024
realizations = 488
seed = 20260825

[times]
mode = log
units = nt
start = 0.01
stop = 10
count = 13

[run]
budget_gflops = 20000000
""",
    ),
    "spin-hf-paper": (
        "Full-scale half-filled ring, L = 12 (sector dimension 924), h = 0.5",
        """\
[experiment]
name = spin-hf-paper
kind = spin-hf
size = 12
disorder = 0.5
initial_state = random-real
realizations = 541
seed = 20260826

[times]
mode = log
units = t
start = 0.01
stop = 100
count = 13

[run]
budget_gflops = 20000000
""",
    ),
    "spin-oe-paper": (
        "Full-scale one-excitation ring, L = 924, h = 0.1",
        """\
[experiment]
name = spin-oe-paper
kind = spin-oe
size = 924
disorder = 0.1
initial_state = random-real
realizations = 541
seed = 20260827

[times]
mode = log
units = t
start = 0.01
stop = 100
count = 13

[run]
budget_gflops = 20000000
""",
    ),
}


def preset_names():
    return sorted(_PRESETS)


def preset_description(name: str) -> str:
    _require(name)
    return _PRESETS[name][0]


def preset_text(name: str) -> str:
    _require(name)
    return _PRESETS[name][1]


def preset_config(name: str) -> ExperimentConfig:
    return parse_config(preset_text(name))


def _require(name: str) -> None:
    if name not in _PRESETS:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
