#!/usr/bin/env python3
"""Generate the standard result tables by driving the phonoscat CLI.

Each canonical study is written as a JSON config into the output directory
and executed in-process; the CSVs land next to the configs so a run is fully
reproducible from the directory contents alone.

Usage:
    python scripts/run_sweeps.py [--outdir results] [--quick]

--quick trades quadrature nodes for speed; the defaults reproduce the
reference numbers to the engine's reported tolerance.
"""

import argparse
import json
import sys
from pathlib import Path

from phonoscat.cli import main as cli_main

XCUT = {"matrix": [[0, 0, -1], [0, 1, 0], [1, 0, 0]]}

WAVEGUIDE = {
    "material": "lithium_niobate",
    "dimensions_um": [0.5, 1.0, 5.0],
    "orientation": XCUT,
}

MODE_10GHZ = {"frequency_GHz": 10.0, "mode_volume_um3": 8000.0, "field_direction": [0, 1, 0]}


def studies(quick: bool) -> dict[str, dict]:
    quad = {"n_theta": 32, "n_phi": 64} if quick else {"n_theta": 64, "n_phi": 128}
    small_cube = {
        "material": "lithium_niobate",
        "dimensions_um": [0.008, 0.008, 0.008],
        "orientation": XCUT,
    }
    return {
        # Q(f) of a deeply sub-wavelength scatterer: the f^-3 law.
        "frequency_scaling": {
            "scenario": "rayleigh",
            "substrate": "sapphire_iso",
            "mode": MODE_10GHZ,
            "inclusions": [small_cube],
            "sweep": {"axis": "frequency_GHz", "grid": "log", "start": 1.0, "stop": 10.0, "count": 25},
        },
        # Q(h) across the interference orders of a half-wavelength-scale bar.
        "height_resonances": {
            "scenario": "mie",
            "substrate": "sapphire_iso",
            "mode": MODE_10GHZ,
            "inclusions": [dict(WAVEGUIDE)],
            "sweep": {"axis": "height_um", "grid": "linear", "start": 0.32, "stop": 1.92, "count": 41},
            "quadrature": quad,
        },
        # Film-thickness scaling in the thin limit, t^2 in the rate.
        "film_thickness": {
            "scenario": "rayleigh",
            "substrate": "sapphire_iso",
            "mode": {**MODE_10GHZ, "frequency_GHz": 1.0},
            "inclusions": [
                {
                    "material": "lithium_niobate",
                    "dimensions_um": [0.15, 0.15, 0.001],
                    "orientation": XCUT,
                }
            ],
            "sweep": {"axis": "thickness_um", "grid": "log", "start": 0.001, "stop": 0.01, "count": 15},
        },
        # Antiparallel pair: suppression ratio versus separation.
        "pair_interference": {
            "scenario": "dual_waveguide",
            "substrate": "sapphire_iso",
            "mode": MODE_10GHZ,
            "inclusions": [
                {
                    "material": "lithium_niobate",
                    "dimensions_um": [0.0063917, 0.02, 0.02],
                    "orientation": XCUT,
                }
            ],
            "dual": {"direction": [1, 0, 0], "relative_sign": -1},
            "sweep": {
                "axis": "separation_um",
                "grid": "log",
                "start": 0.0063917,
                "stop": 0.3,
                "count": 21,
            },
            "quadrature": quad,
        },
        # Quarter-wave mirror: transmittance and Q gain versus period count.
        "bragg_mirror": {
            "scenario": "bragg",
            "substrate": "sapphire_iso",
            "mode": {**MODE_10GHZ, "frequency_GHz": 11.0},
            "inclusions": [dict(WAVEGUIDE)],
            "bragg": {"low": "silicon", "high": "sapphire", "center_frequency_GHz": 11.0},
            "sweep": {"axis": "n_periods", "grid": "linear", "start": 0, "stop": 6, "count": 7},
            "quadrature": quad,
        },
        # g^2 Q figure of merit across the first interference orders.
        "figure_of_merit": {
            "scenario": "figure_of_merit",
            "substrate": "sapphire_iso",
            "mode": MODE_10GHZ,
            "inclusions": [dict(WAVEGUIDE)],
            "eo": {"g0_Hz": 2000.0, "v_ref_um3": 8000.0, "overlap": 1.0},
            "sweep": {"axis": "height_um", "grid": "linear", "start": 0.32, "stop": 1.92, "count": 41},
            "quadrature": quad,
        },
        # Crystal-orientation dependence about the film normal.
        "orientation_scan": {
            "scenario": "orientation",
            "substrate": "sapphire_iso",
            "mode": MODE_10GHZ,
            "inclusions": [dict(WAVEGUIDE)],
            "orientation_axis": [0, 0, 1],
            "sweep": {"axis": "angle_deg", "grid": "linear", "start": 0.0, "stop": 180.0, "count": 37},
            "quadrature": quad,
        },
        # Independent broadened-delta cross-check of the production engine.
        "oracle_check": {
            "scenario": "oracle_check",
            "substrate": "sapphire_iso",
            "mode": MODE_10GHZ,
            "inclusions": [small_cube],
            "sweep": {"axis": "frequency_GHz", "grid": "log", "start": 1.0, "stop": 10.0, "count": 3},
            "quadrature": quad,
        },
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--outdir", default="results", help="directory for configs and CSVs")
    parser.add_argument("--quick", action="store_true", help="coarser quadrature, faster run")
    parser.add_argument(
        "--only", nargs="*", metavar="NAME", help="run a subset of the studies by name"
    )
    args = parser.parse_args(argv)

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    table = studies(args.quick)
    names = args.only if args.only else list(table)
    unknown = [n for n in names if n not in table]
    if unknown:
        parser.error(f"unknown study names {unknown}; available: {list(table)}")

    failed = []
    for name in names:
        cfg = dict(table[name])
        cfg["output"] = str(outdir / f"{name}.csv")
        cfg_path = outdir / f"{name}.json"
        cfg_path.write_text(json.dumps(cfg, indent=1) + "\n")
        print(f"=== {name} ===")
        code = cli_main(["run", str(cfg_path)])
        if code != 0:
            failed.append((name, code))
        print()
    if failed:
        print(f"failed studies: {failed}", file=sys.stderr)
        return 1
    print(f"all {len(names)} studies written to {outdir}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
