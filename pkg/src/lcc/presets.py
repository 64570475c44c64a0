"""Named end-to-end reproduction runs, each writing CSV artifacts.

Every preset pins its full parameterization (chain layout, gains,
perturbation, seed) and runs from a clean checkout with no arguments
beyond its name.  The gain cases A-D step through progressively wider
communication patterns: two vehicles ahead, then one and two vehicles
behind added on top.
"""

from __future__ import annotations

from pathlib import Path
from typing import Callable, Dict, List

from .analysis import energy_scaling_study
from .metrics import aave, total_fuel
from .output import write_csv_atomic, write_events_csv, write_trace_csv
from .sim import (
    CavController,
    FollowerBrake,
    HeadSinusoid,
    HeterogeneitySpec,
    ScenarioConfig,
    simulate,
)
from .stability import FrequencyGrid, TransferSpec, is_string_stable, magnitude_curve
from .systems import FeedbackGains, SystemVariant
from .vehicles import DriverParams, equilibrium_spacing, linearize

__all__ = [
    "GAIN_CASES",
    "FD_CONTROLLER",
    "CF_CONTROLLER",
    "PRESETS",
    "run_preset",
]

# Feedback-gain setups of the four studied communication patterns,
# id -> (mu, k); "hdv" is the all-zero reference.
GAIN_CASES: Dict[str, Dict[int, tuple]] = {
    "hdv": {},
    "caseA": {-2: (1.0, -1.0)},
    "caseB": {-2: (1.0, -1.0), -1: (1.0, -1.0)},
    "caseC": {-2: (1.0, -1.0), -1: (1.0, -1.0), 1: (-1.0, -1.0)},
    "caseD": {-2: (1.0, -1.0), -1: (1.0, -1.0), 1: (-1.0, -1.0), 2: (-1.0, -1.0)},
}

# Explicit feedback rows of the two leading-the-chain controllers:
# the free-driving CAV damps its own velocity and tracks two followers;
# the car-following variant adds a weak pull toward its equilibrium
# spacing behind the head vehicle.
FD_CONTROLLER = CavController(
    gains=FeedbackGains(mu={1: -0.2, 2: -0.1}, k={0: -0.5, 1: 0.05, 2: 0.05}),
    mode="explicit",
)
CF_CONTROLLER = CavController(
    gains=FeedbackGains(mu={0: 0.1, 1: -0.2, 2: -0.1}, k={0: -0.5, 1: 0.05, 2: 0.05}),
    mode="explicit",
)
ZERO_RESPONSE = CavController(mode="explicit")

HETEROGENEITY_SEED = 5


def _default_coeffs(v_star: float = 15.0):
    p = DriverParams()
    return linearize(equilibrium_spacing(v_star, p), p)


def _case_spec(case: str) -> TransferSpec:
    return TransferSpec(
        m=2, n=2, coeffs=_default_coeffs(), gains=FeedbackGains.from_pairs(GAIN_CASES[case])
    )


def _sinusoid_scenario(case: str, dt: float) -> ScenarioConfig:
    return ScenarioConfig(
        variant=SystemVariant.GENERAL_LCC,
        m=2,
        n=2,
        horizon=100.0,
        dt=dt,
        perturbation=HeadSinusoid(),
        cav=CavController(
            gains=FeedbackGains.from_pairs(GAIN_CASES[case]), mode="hdv-baseline"
        ),
    )


def _brake_scenario(controller: CavController, dt: float, heterogeneous: bool) -> ScenarioConfig:
    variant = (
        SystemVariant.CF_LCC if 0 in controller.gains.mu else SystemVariant.FD_LCC
    )
    return ScenarioConfig(
        variant=variant,
        m=0,
        n=10,
        horizon=40.0,
        dt=dt,
        perturbation=FollowerBrake(),
        heterogeneity=HeterogeneitySpec() if heterogeneous else None,
        cav=controller,
        seed=HETEROGENEITY_SEED,
    )


def preset_fig5(outdir: Path, dt: float = 0.01) -> List[Path]:
    rows = energy_scaling_study(_default_coeffs(), range(1, 9), [10.0, 20.0, 30.0], dt=dt)
    return [
        write_csv_atomic(outdir / "fig5.csv", ("n", "t", "lambda_min", "trace_inv"), rows)
    ]


def preset_fig8(outdir: Path, dt: float = 0.01) -> List[Path]:
    omegas = FrequencyGrid().omegas()
    paths = []
    for case in GAIN_CASES:
        mags = magnitude_curve(_case_spec(case), omegas)
        paths.append(
            write_csv_atomic(
                outdir / f"fig8-{case}.csv",
                ("omega", "mag"),
                zip(omegas.tolist(), mags.tolist()),
            )
        )
    return paths


def _preset_fig9(case: str):
    def run(outdir: Path, dt: float = 0.01) -> List[Path]:
        trace = simulate(_sinusoid_scenario(case, dt))
        return [
            write_trace_csv(outdir / f"fig9-{case}.csv", trace),
            write_events_csv(outdir / f"fig9-{case}-events.csv", trace),
        ]

    return run


def _preset_fig10(label: str, controller: CavController):
    def run(outdir: Path, dt: float = 0.01) -> List[Path]:
        trace = simulate(_brake_scenario(controller, dt, heterogeneous=False))
        return [
            write_trace_csv(outdir / f"fig10-{label}.csv", trace),
            write_events_csv(outdir / f"fig10-{label}-events.csv", trace),
        ]

    return run


def preset_table1(outdir: Path, dt: float = 0.01) -> List[Path]:
    header = ["case"]
    for vid in (-2, -1, 1, 2):
        header += [f"mu_{vid}", f"k_{vid}"]
    header += ["peak_mag", "string_stable"]
    rows = []
    for case, pairs in GAIN_CASES.items():
        res = is_string_stable(_case_spec(case))
        row = [case]
        for vid in (-2, -1, 1, 2):
            mu, k = pairs.get(vid, (0.0, 0.0))
            row += [float(mu), float(k)]
        row += [res.peak_mag, str(res.stable).lower()]
        rows.append(row)
    return [write_csv_atomic(outdir / "table1.csv", header, rows)]


def _performance_rows(dt: float, heterogeneous: bool) -> List[list]:
    window = (20.0, 40.0)
    vehicles = list(range(0, 11))
    strategies = [
        ("looking-ahead", ZERO_RESPONSE),
        ("fd-lcc", FD_CONTROLLER),
        ("cf-lcc", CF_CONTROLLER),
    ]
    results = {}
    for label, controller in strategies:
        trace = simulate(_brake_scenario(controller, dt, heterogeneous))
        results[label] = (
            aave(trace, window, vehicles=vehicles),
            total_fuel(trace, window, vehicles=vehicles),
        )
    base_aave, base_fc = results["looking-ahead"]
    rows = []
    for label, _ in strategies:
        a, f = results[label]
        if label == "looking-ahead":
            rows.append([label, a, f, None, None])
        else:
            rows.append(
                [label, a, f, 100.0 * (1.0 - a / base_aave), 100.0 * (1.0 - f / base_fc)]
            )
    return rows


def preset_table2(outdir: Path, dt: float = 0.01) -> List[Path]:
    rows = _performance_rows(dt, heterogeneous=False)
    return [
        write_csv_atomic(
            outdir / "table2.csv",
            ("strategy", "aave", "fc", "aave_reduction_pct", "fc_reduction_pct"),
            rows,
        )
    ]


def preset_appendix_c(outdir: Path, dt: float = 0.01) -> List[Path]:
    rows = _performance_rows(dt, heterogeneous=True)
    return [
        write_csv_atomic(
            outdir / "appendixC.csv",
            ("strategy", "aave", "fc", "aave_reduction_pct", "fc_reduction_pct"),
            rows,
        )
    ]


PRESETS: Dict[str, Callable] = {
    "fig5": preset_fig5,
    "fig8": preset_fig8,
    "fig9-caseA": _preset_fig9("caseA"),
    "fig9-caseB": _preset_fig9("caseB"),
    "fig9-caseC": _preset_fig9("caseC"),
    "fig9-caseD": _preset_fig9("caseD"),
    "fig10-fd": _preset_fig10("fd", FD_CONTROLLER),
    "fig10-cf": _preset_fig10("cf", CF_CONTROLLER),
    "table1": preset_table1,
    "table2": preset_table2,
    "appendixC": preset_appendix_c,
}


def run_preset(name: str, outdir, dt: float = 0.01) -> List[Path]:
    """Run one preset into ``outdir`` and return the files written."""
    if name not in PRESETS:
        raise KeyError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        )
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    return PRESETS[name](outdir, dt=dt)
