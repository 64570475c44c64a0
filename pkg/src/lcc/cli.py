"""Command-line front end.

Subcommands map one-to-one onto the library layers: ``analyze``
(controllability/observability), ``energy`` (Gramian scaling study),
``stability`` (head-to-tail verdict and magnitude curve), ``scan``
(gain-region map), ``simulate`` (nonlinear chain), and ``reproduce``
(named end-to-end presets).  Every command reads the same JSON config
document (all keys optional, see ``--help``), accepts ``--set`` dotted
overrides, and writes CSV artifacts atomically into the output
directory (``-o``, or the LCC_OUTDIR environment variable).

Exit codes: 0 success, 2 usage error, 3 bad configuration, 4 domain or
topology error, 5 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    build_output_matrix,
    energy_scaling_study,
    pbh_controllability,
    pbh_observability,
)
from .config import (
    apply_overrides,
    axes_from_config,
    coeffs_from_config,
    grid_from_config,
    load_config,
    parse_config,
    scenario_from_config,
    transfer_spec_from_config,
    variant_from_config,
)
from .errors import ConfigError, LccError, NumericalError, SingularGramianError
from .output import write_csv_atomic, write_events_csv, write_trace_csv
from .presets import PRESETS, run_preset
from .sim import simulate
from .stability import is_string_stable, magnitude_curve, scan_region
from .systems import build_system

EXIT_OK = 0
EXIT_CONFIG = 3
EXIT_DOMAIN = 4
EXIT_NUMERICAL = 5

_CONFIG_HELP = """\
configuration keys (JSON; every key optional):
  schema                 document version, must be 1
  variant                chain type: fd | cf | general | ccc
  m, n                   HDVs ahead / behind the CAV (counts)
  v_star                 equilibrium velocity (m/s)
  dt                     integration / Gramian step (s)
  horizon                simulation length (s)
  seed                   RNG seed for heterogeneity sampling
  driver.alpha           OVM desired-velocity gain (1/s)
  driver.beta            OVM relative-velocity gain (1/s)
  driver.v_max           free-flow velocity (m/s)
  driver.s_st, .s_go     standstill / free-flow spacing (m)
  driver.delay           HDV reaction delay (s)
  gains                  {"id": [mu, k]} spacing (1/s^2) and velocity (1/s)
                         feedback gains, id in -m..-1, 1..n (0: own state,
                         explicit mode only)
  controller.mode        hdv-baseline | explicit
  controller.ovm_baseline  stack nonlinear OVM response under explicit row
  perturbation.kind      none | head-sinusoid | follower-brake
    head-sinusoid:       amplitude (m/s), period (s), start (s)
    follower-brake:      vehicle (id), decel (m/s^2), duration (s), start (s)
  heterogeneity          null, or jitter spec: alpha_jitter (1/s),
                         beta_jitter (1/s), s_go_jitter (m),
                         delay_base (s), delay_jitter (s)
  frequency              omega_min/omega_max (rad/s), points
  scan.axis1, .axis2     {vehicle, component: mu|k, lo, hi, points}
"""


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lcc",
        description=__doc__,
        epilog=_CONFIG_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"lcc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add_common(sp, config=True):
        sp.add_argument(
            "-o",
            "--output",
            default=None,
            help="output directory (default: $LCC_OUTDIR or ./lcc-out)",
        )
        if config:
            sp.add_argument("--config", default=None, help="JSON configuration file")
            sp.add_argument(
                "--set",
                dest="overrides",
                action="append",
                default=[],
                metavar="KEY=VALUE",
                help="override a config key (dotted path, JSON value)",
            )

    sp = sub.add_parser("analyze", help="controllability / observability report")
    add_common(sp)
    sp.add_argument("--variant", choices=["fd", "cf", "general", "ccc"], default=None)
    sp.add_argument("--m", type=int, default=None)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--v-star", type=float, default=None, help="equilibrium velocity (m/s)")
    sp.add_argument(
        "--k", type=int, default=None, help="also report observability measuring vehicle k"
    )

    sp = sub.add_parser("energy", help="Gramian energy metrics across chain sizes")
    add_common(sp)
    sp.add_argument("--n-range", default="1:5", help="chain sizes, as lo:hi or comma list")
    sp.add_argument("--t", default="10,20,30", help="comma list of horizons (s)")

    sp = sub.add_parser("stability", help="head-to-tail string-stability verdict")
    add_common(sp)
    sp.add_argument("--m", type=int, default=None)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--label", default="spec", help="label used in the magnitude CSV name")

    sp = sub.add_parser("scan", help="string-stable region over a 2-D gain grid")
    add_common(sp)

    sp = sub.add_parser("simulate", help="nonlinear chain simulation")
    add_common(sp)

    sp = sub.add_parser("reproduce", help="run a named reproduction preset")
    add_common(sp, config=False)
    sp.add_argument("preset", choices=sorted(PRESETS), metavar="PRESET",
                    help=f"one of: {', '.join(sorted(PRESETS))}")
    sp.add_argument("--dt", type=float, default=0.01, help="integration step (s)")
    return parser


def _outdir(args) -> Path:
    out = args.output or os.environ.get("LCC_OUTDIR") or "lcc-out"
    return Path(out)


def _load_cfg(args, **cli_keys) -> dict:
    doc = load_config(args.config) if args.config else {}
    doc = apply_overrides(doc, getattr(args, "overrides", []))
    for key, value in cli_keys.items():
        if value is not None:
            doc[key] = value
    return parse_config(doc)


def _cmd_analyze(args) -> int:
    cfg = _load_cfg(args, variant=args.variant, m=args.m, n=args.n, v_star=args.v_star)
    coeffs = coeffs_from_config(cfg)
    model = build_system(variant_from_config(cfg), cfg["m"], cfg["n"], coeffs)
    rep = pbh_controllability(model.A, model.B, coeffs=coeffs)
    print(
        f"controllable={str(rep.controllable).lower()} "
        f"dim={rep.controllable_dim} condition={rep.condition_value:.4g}"
    )
    if rep.uncontrollable_mode_eigenvalues:
        modes = " ".join(f"{z:.4g}" for z in rep.uncontrollable_mode_eigenvalues)
        print(f"uncontrollable_modes={modes}")
    if args.k is not None:
        C = build_output_matrix(model, args.k)
        orep = pbh_observability(model.A, C, model=model)
        ids = ",".join(str(v) for v in orep.unobservable_vehicle_ids)
        print(
            f"observable={str(orep.observable).lower()} dim={orep.observable_dim} "
            f"unobservable_vehicles=[{ids}]"
        )
    return EXIT_OK


def _parse_n_range(text: str):
    if ":" in text:
        lo, hi = text.split(":")
        return range(int(lo), int(hi) + 1)
    return [int(x) for x in text.split(",") if x]


def _cmd_energy(args) -> int:
    cfg = _load_cfg(args)
    rows = energy_scaling_study(
        coeffs_from_config(cfg),
        _parse_n_range(args.n_range),
        [float(x) for x in args.t.split(",") if x],
        dt=cfg["dt"],
    )
    path = write_csv_atomic(
        _outdir(args) / "energy.csv", ("n", "t", "lambda_min", "trace_inv"), rows
    )
    for n, t, lam, tr in rows:
        tr_text = f"{tr:.6g}" if tr is not None else "singular"
        print(f"n={n} t={t:g} lambda_min={lam:.6g} trace_inv={tr_text}")
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_stability(args) -> int:
    cfg = _load_cfg(args, m=args.m, n=args.n)
    spec = transfer_spec_from_config(cfg)
    grid = grid_from_config(cfg)
    res = is_string_stable(spec, grid)
    print(
        f"string_stable={str(res.stable).lower()} peak_mag={res.peak_mag:.6g} "
        f"peak_omega={res.peak_omega:.6g} "
        f"asymptotically_stable={str(res.asymptotically_stable).lower()}"
    )
    omegas = grid.omegas()
    mags = magnitude_curve(spec, omegas)
    path = write_csv_atomic(
        _outdir(args) / f"magnitude-{args.label}.csv",
        ("omega", "mag"),
        zip(omegas.tolist(), mags.tolist()),
    )
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_scan(args) -> int:
    cfg = _load_cfg(args)
    spec = transfer_spec_from_config(cfg)
    axis1, axis2 = axes_from_config(cfg)
    region = scan_region(spec, axis1, axis2, grid_from_config(cfg))
    rows = []
    vals1, vals2 = axis1.values(), axis2.values()
    for i, g1 in enumerate(vals1):
        for j, g2 in enumerate(vals2):
            rows.append((float(g1), float(g2), region.classes[i, j]))
    path = write_csv_atomic(_outdir(args) / "region.csv", ("axis1", "axis2", "class"), rows)
    counts = {
        code: int(np.sum(region.classes == code)) for code in ("SS", "SU", "AU")
    }
    print(f"cells SS={counts['SS']} SU={counts['SU']} AU={counts['AU']}")
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    cfg = _load_cfg(args)
    trace = simulate(scenario_from_config(cfg))
    out = _outdir(args)
    p1 = write_trace_csv(out / "trace.csv", trace)
    p2 = write_events_csv(out / "events.csv", trace)
    print(f"wrote {p1}")
    print(f"wrote {p2}")
    return EXIT_OK


def _cmd_reproduce(args) -> int:
    for path in run_preset(args.preset, _outdir(args), dt=args.dt):
        print(f"wrote {path}")
    return EXIT_OK


_COMMANDS = {
    "analyze": _cmd_analyze,
    "energy": _cmd_energy,
    "stability": _cmd_stability,
    "scan": _cmd_scan,
    "simulate": _cmd_simulate,
    "reproduce": _cmd_reproduce,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"lcc: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SingularGramianError, NumericalError) as exc:
        print(f"lcc: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (LccError, ValueError, KeyError) as exc:
        print(f"lcc: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
