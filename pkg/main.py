#! usr/bin/env python

import argparse
import os
import sys

import yaml
import numpy as np
import pandas as pd

from qubus.channels.steps import run_sequence
from qubus.evaluate.evaluate import (
    COHERENCE_COLUMNS,
    CZ_COLUMNS,
    ENTANGLEMENT_COLUMNS,
    PEAK_COLUMNS,
    evaluate_coherence,
    evaluate_cz,
    evaluate_entanglement,
    evaluate_peak,
)
from qubus.oracle.lindblad import compare_with_engine
from qubus.state.hybridstate import new_product_state, observed_kernel, reduce_qubits
from qubus.utils.constructors import (
    LOSS_GRID_KEYS,
    build_alpha_grid,
    build_l_grid,
    build_points,
    build_time_grid,
    parse_input_state,
    parse_sequence_file,
)
from qubus.utils.errors import OracleError, ValidationError
from qubus.utils.utils import Progress, check_positive, map_rows, rows_to_frame, write_csv


# Suppress scientific notation
np.set_printoptions(suppress=True)

# Presets live next to this file
CONFIG_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "configs")

# Used when neither a preset nor a flag gives a value
DEFAULTS = {
    "coherence": {"alpha": [1.0], "gamma over chi": [1.0], "chit max": 10.0, "steps": 101},
    "entanglement": {
        "alpha": [100.0],
        "gamma over chi": [1.0],
        "chit max": 0.1,
        "steps": 201,
        "scan": False,
    },
    "cz": {"l tot": [0.0, 0.9, 91], "iterated": False},
    "run": {"input": "plus", "probe": 0.0, "oracle": False},
}


def _drop(config, keys):
    for key in keys:
        config.pop(key, None)


def load_config(args):
    """Defaults, then the preset file, then explicit flags."""
    preset = {}
    path = args["config"]
    if args["fig"] is not None:
        path = os.path.join(CONFIG_DIR, f"fig{args['fig']}.yaml")
    if path is not None:
        if not os.path.exists(path):
            raise ValidationError(f"no preset file at {path}")
        with open(path, "r") as cf:
            preset = yaml.full_load(cf)

    mode = args["mode"] or preset.get("mode")
    if mode is None:
        raise ValidationError("give a mode or a preset that names one")
    if preset.get("mode", mode) != mode:
        raise ValidationError(f"preset is for mode '{preset['mode']}', not '{mode}'")

    config = dict(DEFAULTS[mode])
    section = preset.get(mode, {})
    if any(key in section for key in LOSS_GRID_KEYS):
        _drop(config, LOSS_GRID_KEYS)
    config.update(section)

    overrides = {
        "alpha": args["alpha"],
        "gamma over chi": args["gamma_over_chi"],
        "chit max": args["chit_max"],
        "steps": args["steps"],
        "input": args["input"],
        "probe": args["probe"],
    }
    if args["alpha"] is not None:
        config.pop("alpha grid", None)
    if args["l"] is not None or args["l_grid"] is not None:
        _drop(config, LOSS_GRID_KEYS)
        overrides["l"] = args["l"]
        overrides["l grid"] = args["l_grid"]
    config.update({k: v for k, v in overrides.items() if v is not None})
    # Switches only ever turn things on
    for flag in ("scan", "iterated", "oracle"):
        if args[flag]:
            config[flag] = True
    return mode, config


def run_coherence(config, jobs, progress):
    alphas = build_alpha_grid(config)
    for alpha in alphas:
        check_positive("alpha", alpha, allow_zero=True)
    for ratio in config["gamma over chi"]:
        check_positive("gamma/chi", ratio, allow_zero=True)
    check_positive("chit max", config["chit max"])

    points = build_points(alphas, config["gamma over chi"], build_time_grid(config))
    rows = map_rows(evaluate_coherence, config, points, jobs)
    progress.print(f"mode: coherence, rows: {len(rows)}")
    return rows_to_frame(rows, COHERENCE_COLUMNS)


def run_entanglement(config, jobs, progress):
    alphas = build_alpha_grid(config)
    for alpha in alphas:
        check_positive("alpha", alpha)
    for ratio in config["gamma over chi"]:
        check_positive("gamma/chi", ratio, allow_zero=True)
    check_positive("chit max", config["chit max"])

    if config.get("scan", False):
        points = build_points(alphas, config["gamma over chi"])
        rows = map_rows(evaluate_peak, config, points, jobs)
        for row in rows:
            progress.print(
                f"alpha: {row['alpha']:g}, gamma/chi: {row['gamma_over_chi']:g}, "
                f"c_max: {row['c_max']:.6f}",
                level=2,
            )
        progress.print(f"mode: entanglement scan, rows: {len(rows)}")
        return rows_to_frame(rows, PEAK_COLUMNS)

    points = build_points(alphas, config["gamma over chi"], build_time_grid(config))
    rows = map_rows(evaluate_entanglement, config, points, jobs)
    progress.print(f"mode: entanglement, rows: {len(rows)}")
    return rows_to_frame(rows, ENTANGLEMENT_COLUMNS)


def run_cz(config, jobs, progress):
    grid = build_l_grid(config)
    for l in grid:
        check_positive("l", l, allow_zero=True)
    rows = map_rows(evaluate_cz, config, list(grid), jobs)
    for row in rows:
        progress.print(f"l: {row['l']:.4g}, F: {row['F']:.4f}, C: {row['C']:.4f}", level=2)
    progress.print(f"mode: cz{' iterated' if config['iterated'] else ''}, rows: {len(rows)}")
    return rows_to_frame(rows, CZ_COLUMNS)


def _matrix_rows(section, matrix):
    d = matrix.shape[0]
    return [
        {
            "section": section,
            "ket": i,
            "bra": j,
            "re": matrix[i, j].real,
            "im": matrix[i, j].imag,
        }
        for i in range(d)
        for j in range(d)
    ]


def run_file(config, sequence_path, progress):
    if sequence_path is None:
        raise ValidationError("run mode needs a sequence file")
    sequence = parse_sequence_file(sequence_path)
    rho0 = parse_input_state(config["input"], sequence.n_qubits)
    state = run_sequence(new_product_state(rho0, complex(config["probe"])), sequence)

    rows = _matrix_rows("density", reduce_qubits(state))
    # Final probe amplitude of every population branch
    rows += [
        {
            "section": "probe",
            "ket": v,
            "bra": v,
            "re": state.ket_amp[v, v].real,
            "im": state.ket_amp[v, v].imag,
        }
        for v in range(state.dim)
    ]
    # Kernel of this run, on the entries the input defines
    if state.probe_disentangled():
        g = observed_kernel(state, rho0)
        rows += [row for row in _matrix_rows("kernel", g) if not np.isnan(row["re"])]
    else:
        progress.print("probe does not disentangle, no kernel written")

    if config.get("oracle", False):
        comparison = compare_with_engine(sequence, rho0, complex(config["probe"]))
        print(
            f"oracle deviation: {comparison.deviation:.3e} (n_max {comparison.n_max})",
            file=sys.stderr,
        )
    progress.print(f"mode: run, steps: {len(sequence)}")
    return pd.DataFrame(rows, columns=["section", "ket", "bra", "re", "im"])


def build_parser():
    parser = argparse.ArgumentParser(description="Lossy qubus gate simulation")
    parser.add_argument(
        "mode", nargs="?", choices=["coherence", "entanglement", "cz", "run"], default=None
    )
    parser.add_argument("sequence", nargs="?", default=None)
    parser.add_argument("--verbose", type=int, choices=[0, 1, 2], default=1)
    parser.add_argument("--config", type=str, default=None)
    parser.add_argument("--fig", choices=["2a", "2b", "3", "7a", "7b"], default=None)
    parser.add_argument("--out", type=str, default=None)
    parser.add_argument("--jobs", type=int, default=None)
    parser.add_argument("--alpha", type=float, nargs="+", default=None)
    parser.add_argument("--gamma-over-chi", type=float, nargs="+", default=None)
    parser.add_argument("--chit-max", type=float, default=None)
    parser.add_argument("--steps", type=int, default=None)
    parser.add_argument("--scan", action="store_true")
    parser.add_argument("--l", type=float, nargs="+", default=None)
    parser.add_argument("--l-grid", type=float, nargs=3, default=None)
    parser.add_argument("--iterated", action="store_true")
    parser.add_argument("--input", type=str, default=None)
    parser.add_argument("--probe", type=complex, default=None)
    parser.add_argument("--oracle", action="store_true")
    return parser


def main(argv=None):
    try:
        args = vars(build_parser().parse_args(argv))
    except SystemExit as e:
        return e.code

    progress = Progress(args["verbose"])
    try:
        mode, config = load_config(args)
        if args["jobs"] is not None and args["jobs"] < 1:
            raise ValidationError(f"--jobs must be >= 1, got {args['jobs']}")
        if mode == "coherence":
            frame = run_coherence(config, args["jobs"], progress)
        elif mode == "entanglement":
            frame = run_entanglement(config, args["jobs"], progress)
        elif mode == "cz":
            frame = run_cz(config, args["jobs"], progress)
        else:
            frame = run_file(config, args["sequence"], progress)
    except (ValueError, OracleError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    if args["out"] is not None and os.path.dirname(args["out"]):
        os.makedirs(os.path.dirname(args["out"]), exist_ok=True)
    write_csv(frame, args["out"])
    return 0


if __name__ == "__main__":
    sys.exit(main())
