from itertools import product

import numpy as np

from qubus.channels.coherence import CouplingSpec
from qubus.channels.steps import Displace, Interact, Loss, Rotate, SequenceSpec
from qubus.gates.cz import l_from_l_tot
from qubus.state.hybridstate import MAX_QUBITS, plus_state, pure_density
from qubus.utils.errors import SequenceParseError, ValidationError
from qubus.utils.utils import linear_grid, log_grid


def build_coupling(config, gamma_over_chi, chit):
    # Grids are in scaled units: gamma/chi and chi t, chi = 1 unless the preset says otherwise
    chi = config.get("chi", 1.0)
    return CouplingSpec(chi=chi, gamma=gamma_over_chi * chi, t=chit / chi)


def build_time_grid(config):
    # chi t grid, linear from 0 or logarithmic from `chit min`
    if config.get("grid", "linear") == "log":
        return log_grid(config["chit min"], config["chit max"], config["steps"])
    elif config.get("grid", "linear") == "linear":
        return linear_grid(0.0, config["chit max"], config["steps"])
    else:
        raise ValueError("Not a valid grid")


def build_alpha_grid(config):
    # Either an explicit list or [start, stop, steps] on a log scale
    if config.get("alpha grid", "list") == "log":
        start, stop, steps = config["alpha"]
        return log_grid(start, stop, steps)
    return np.atleast_1d(np.asarray(config["alpha"], dtype=float))


# Any one of these defines the loss grid of cz mode
LOSS_GRID_KEYS = ("l tot", "l grid", "l")


def build_l_grid(config):
    if "l tot" in config:
        start, stop, steps = config["l tot"]
        return np.array([l_from_l_tot(x) for x in linear_grid(start, stop, steps)])
    elif "l grid" in config:
        start, stop, steps = config["l grid"]
        return linear_grid(start, stop, steps)
    elif "l" in config:
        return np.atleast_1d(np.asarray(config["l"], dtype=float))
    else:
        raise ValueError("Not a valid loss grid")


def build_points(*axes):
    """Cartesian product of config axes, first axis slowest."""
    return list(product(*axes))


# Keys per step kind: required, optional
STEP_KEYS = {
    "D": ({"re", "im"}, {"target"}),
    "R": ({"target", "theta"}, set()),
    "L": ({"l"}, set()),
    "I": ({"target", "chi", "gamma", "t"}, set()),
}


def _parse_fields(tokens, kind, line_number):
    required, optional = STEP_KEYS[kind]
    fields = {}
    for token in tokens:
        if "=" not in token:
            raise SequenceParseError(line_number, f"expected key=value, got '{token}'")
        key, value = token.split("=", 1)
        if key not in required | optional:
            raise SequenceParseError(line_number, f"unknown key '{key}' for step {kind}")
        if key in fields:
            raise SequenceParseError(line_number, f"duplicate key '{key}'")
        try:
            fields[key] = int(value) if key == "target" else float(value)
        except ValueError:
            raise SequenceParseError(line_number, f"bad value for '{key}': '{value}'")
        if not np.isfinite(fields[key]):
            raise SequenceParseError(line_number, f"value for '{key}' must be finite")
    missing = required - set(fields)
    if missing:
        raise SequenceParseError(line_number, f"missing key(s) {', '.join(sorted(missing))}")
    return fields


def _build_step(kind, fields, n_qubits, line_number):
    target = fields.get("target")
    if target is not None and not 0 <= target < n_qubits:
        raise SequenceParseError(line_number, f"target {target} out of range for {n_qubits} qubits")
    try:
        if kind == "D":
            return Displace(complex(fields["re"], fields["im"]), target)
        elif kind == "R":
            return Rotate(target, fields["theta"])
        elif kind == "L":
            if fields["l"] < 0:
                raise ValidationError(f"loss l must be >= 0, got {fields['l']}")
            return Loss(fields["l"])
        else:
            spec = CouplingSpec(fields["chi"], fields["gamma"], fields["t"])
            return Interact(spec, target)
    except ValidationError as e:
        raise SequenceParseError(line_number, str(e))


def parse_sequence(text):
    """
    Parse the line-oriented sequence format.

    A `qubits <n>` header comes first, then one step per line:
    `D [target=k] re=f im=f`, `R target=k theta=f`, `L l=f` or
    `I target=k chi=f gamma=f t=f`. `#` starts a comment.
    """
    n_qubits = None
    steps = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue

        if n_qubits is None:
            if tokens[0] != "qubits" or len(tokens) != 2:
                raise SequenceParseError(line_number, "expected header 'qubits <n>'")
            try:
                n_qubits = int(tokens[1])
            except ValueError:
                raise SequenceParseError(line_number, f"bad qubit count '{tokens[1]}'")
            if not 1 <= n_qubits <= MAX_QUBITS:
                raise SequenceParseError(line_number, f"qubit count must be in [1, {MAX_QUBITS}]")
            continue

        kind = tokens[0]
        if kind not in STEP_KEYS:
            raise SequenceParseError(line_number, f"unknown step '{kind}'")
        fields = _parse_fields(tokens[1:], kind, line_number)
        steps.append(_build_step(kind, fields, n_qubits, line_number))

    if n_qubits is None:
        raise SequenceParseError(1, "missing header 'qubits <n>'")
    return SequenceSpec(n_qubits, steps)


def parse_sequence_file(path):
    with open(path, "r") as f:
        return parse_sequence(f.read())


def parse_input_state(text, n_qubits):
    """
    Qubit density from a short description.

    `plus` (all qubits in |+>), `zero`, a bitstring such as `01`, or
    `ket:<c0>,<c1>,...` with complex amplitudes (normalized here).
    """
    d = 2 ** n_qubits
    text = text.strip()
    if text == "plus":
        return plus_state(n_qubits)
    elif text == "zero":
        return pure_density(np.eye(d)[0])
    elif text.startswith("ket:"):
        try:
            amps = np.array([complex(x.replace(" ", "")) for x in text[4:].split(",")])
        except ValueError:
            raise ValidationError(f"bad amplitude list in input state '{text}'")
        if amps.size != d:
            raise ValidationError(f"input state needs {d} amplitudes, got {amps.size}")
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValidationError("input state has zero norm")
        return pure_density(amps / norm)
    elif len(text) == n_qubits and set(text) <= {"0", "1"}:
        return pure_density(np.eye(d)[int(text, 2)])
    else:
        raise ValidationError(f"unknown input state '{text}'")
