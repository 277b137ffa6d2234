import multiprocessing
import sys
import time
from functools import partial

import numpy as np
import pandas as pd

from qubus.utils.errors import ValidationError


# 12 significant digits for every float written to CSV
FLOAT_FORMAT = "%.12g"


def linear_grid(start, stop, steps):
    if steps < 1:
        raise ValidationError(f"grid needs at least one point, got {steps}")
    return np.linspace(start, stop, int(steps))


def log_grid(start, stop, steps):
    if start <= 0 or stop <= 0:
        raise ValidationError("log grid bounds must be > 0")
    return np.geomspace(start, stop, int(steps))


def check_positive(name, value, allow_zero=False):
    if not np.isfinite(value) or value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise ValidationError(f"{name} must be {bound}, got {value}")
    return value


def pool_size(jobs):
    # None: all cores, like the training runs
    return multiprocessing.cpu_count() if jobs is None else max(1, int(jobs))


def map_rows(evaluator, config, grid, jobs=None):
    """Evaluate `evaluator(config, point)` over the grid, keeping input order."""
    func = partial(evaluator, config)
    processes = pool_size(jobs)
    if processes == 1 or len(grid) <= 1:
        return [func(point) for point in grid]
    with multiprocessing.Pool(processes=processes) as pool:
        return pool.map(func, grid)


def write_csv(frame, out=None):
    """Write a table with stable float formatting; `out` None means stdout."""
    if out is None:
        frame.to_csv(sys.stdout, index=False, sep=",", float_format=FLOAT_FORMAT)
    else:
        frame.to_csv(out, index=False, sep=",", float_format=FLOAT_FORMAT, encoding="utf-8")


def rows_to_frame(rows, columns=None):
    frame = pd.DataFrame(rows)
    return frame if columns is None else frame[list(columns)]


class Progress:
    """Verbose-gated progress lines on stderr with elapsed time."""

    def __init__(self, verbose):
        self.verbose = verbose
        self.start_time = time.time()

    def print(self, message, level=1):
        if self.verbose >= level:
            minutes = (time.time() - self.start_time) / 60
            print(f"{message}, time past: {minutes:.2f} min", file=sys.stderr)
