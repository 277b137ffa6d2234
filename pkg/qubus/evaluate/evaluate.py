import numpy as np

from qubus.channels.coherence import CouplingSpec, coherence_parameter, coherence_split
from qubus.gates.cz import loss_row
from qubus.measures.entanglement import default_peak_grid, entanglement_at, peak_scan
from qubus.utils.constructors import build_coupling


COHERENCE_COLUMNS = ["alpha", "gamma_over_chi", "chit", "abs_zeta", "re_f", "im_f", "zeta_nn"]
ENTANGLEMENT_COLUMNS = ["alpha", "gamma_over_chi", "chit", "concurrence", "entropy"]
PEAK_COLUMNS = ["alpha", "gamma_over_chi", "t_star", "c_max", "entropy_at_peak"]
CZ_COLUMNS = [
    "l",
    "l_tot",
    "loss_db",
    "beta",
    "F",
    "F_full",
    "C",
    "c_minus_norm",
    "s_sum_norm",
    "p_a",
    "p_b",
]


def evaluate_coherence(config, point):
    alpha, gamma_over_chi, chit = point
    spec = build_coupling(config, gamma_over_chi, chit)
    re_f, im_f = coherence_split(alpha, spec)
    # Same-level element: no relative phase, no dephasing
    same = CouplingSpec(spec.chi, spec.gamma, spec.t, lambda_n=1, lambda_m=1)
    return {
        "alpha": alpha,
        "gamma_over_chi": gamma_over_chi,
        "chit": chit,
        "abs_zeta": abs(coherence_parameter(alpha, spec)),
        "re_f": re_f,
        "im_f": im_f,
        "zeta_nn": abs(coherence_parameter(alpha, same)),
    }


def evaluate_entanglement(config, point):
    alpha, gamma_over_chi, chit = point
    conc, entropy = entanglement_at(alpha, gamma_over_chi, chit)
    return {
        "alpha": alpha,
        "gamma_over_chi": gamma_over_chi,
        "chit": chit,
        "concurrence": conc,
        "entropy": entropy,
    }


def evaluate_peak(config, point):
    alpha, gamma_over_chi = point
    grid = default_peak_grid(
        alpha, points=config.get("peak points", 4000), chit_max=config.get("chit max", np.pi)
    )
    report = peak_scan(alpha, gamma_over_chi, grid=grid)
    return {column: getattr(report, column) for column in PEAK_COLUMNS}


def evaluate_cz(config, l):
    return loss_row(l, iterated=config.get("iterated", False))
