"""Monte Carlo recovery trials over a parameter grid."""
import hashlib
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np
from threadpoolctl import threadpool_limits

from ..exceptions import DegenerateInputError, SingularSystemError
from ..initialization import thresholding_init
from ..measurement import new_gaussian_operator
from ..signals import make_instance, rel_error, sin_angle
from ..solvers import SpfConfig, spf
from ..theory import estimate_rip_constant
from .config import CellParams

__all__ = ["TrialRecord", "GridRunError", "derive_seed", "run_trial", "run_grid"]

log = logging.getLogger(__name__)

STATUS_OK = "ok"
STATUS_GENERATION_FAILED = "generation_failed"
STATUS_SOLVER_FAILED = "solver_failed"


@dataclass(frozen=True)
class TrialRecord:
    m: int
    n1: int
    n2: int
    s1: int
    s2: int
    k: int
    xi: float
    mu: float
    nu: float
    trial: int
    seed: int
    delta_hat: float | None
    init_sin_angle: float
    rel_error: float
    iterations: int
    converged: bool
    success: bool
    success_threshold: float
    status: str
    wall_ms: float

    @property
    def cell(self):
        return CellParams(self.m, self.n1, self.n2, self.s1, self.s2,
                          self.k, self.xi, self.mu, self.nu)

    def as_dict(self):
        return asdict(self)


RECORD_FIELDS = tuple(f.name for f in fields(TrialRecord))


class GridRunError(RuntimeError):
    """A grid run aborted; ``records`` holds the trials that did finish."""

    def __init__(self, message, records):
        super().__init__(message)
        self.records = records


def derive_seed(*parts):
    """Stable 64-bit seed from a tuple of integers/strings (BLAKE2b)."""
    key = ":".join(str(p) for p in parts).encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


def run_trial(cell, seed, threshold, solver_options=None, measure_rip=False, rip_trials=200,
              tail="equal", trial=0):
    """Generate an instance for ``cell`` from ``seed``, initialise, run SPF, score it.

    Infeasible generator parameters and solver breakdowns are reported
    through ``status`` rather than raised.
    """
    start = time.perf_counter()
    opts = dict(solver_options or {})
    base = dict(asdict(cell), trial=trial, seed=seed, success_threshold=threshold)
    nan = math.nan

    def finish(status, **metrics):
        values = dict(delta_hat=None, init_sin_angle=nan, rel_error=nan, iterations=0,
                      converged=False)
        values.update(metrics)
        for name in ("init_sin_angle", "rel_error"):
            values[name] = float(values[name])
        if values["delta_hat"] is not None:
            values["delta_hat"] = float(values["delta_hat"])
        values["converged"] = bool(values["converged"])
        err = values["rel_error"]
        values["success"] = bool(err <= threshold)  # NaN compares False
        wall = (time.perf_counter() - start) * 1e3
        return TrialRecord(**base, **values, status=status, wall_ms=wall)

    try:
        op = new_gaussian_operator(cell.n1, cell.n2, cell.m, derive_seed(seed, "op"))
        inst = make_instance(
            op, cell.s1, cell.s2, cell.k, cell.xi, cell.mu, cell.nu,
            u_seed=derive_seed(seed, "u"), v_seed=derive_seed(seed, "v"),
            noise_seed=derive_seed(seed, "z"), tail=tail,
        )
    except (ValueError, DegenerateInputError) as exc:
        log.debug("generation failed for %s: %s", cell, exc)
        return finish(STATUS_GENERATION_FAILED)

    delta_hat = None
    if measure_rip:
        delta_hat = estimate_rip_constant(
            op, 3 * cell.s1, 3 * cell.s2, 2, rip_trials, derive_seed(seed, "rip")
        )
    try:
        init = thresholding_init(op, inst.b, cell.s1, cell.s2,
                                 tie_break=opts.get("tie_break", "lowest-index"))
        angle = sin_angle(init.v0, inst.v)
        result = spf(op, inst.b, SpfConfig(cell.s1, cell.s2, **opts), init.v0)
    except (SingularSystemError, DegenerateInputError) as exc:
        log.debug("solver failed for %s: %s", cell, exc)
        return finish(STATUS_SOLVER_FAILED, delta_hat=delta_hat)
    err = rel_error((result.u_hat, result.v_hat), inst.u, inst.v)
    return finish(STATUS_OK, delta_hat=delta_hat, init_sin_angle=angle, rel_error=err,
                  iterations=result.iterations, converged=result.converged)


def _jobs(config):
    opts = config.solver_options()
    for ci, cell in enumerate(config.cells()):
        for t in range(config.trials_per_cell):
            yield dict(
                cell=cell,
                seed=derive_seed(config.base_seed, ci, t),
                threshold=config.threshold_for(cell.nu),
                solver_options=opts,
                measure_rip=config.measure_rip,
                rip_trials=config.rip_trials,
                tail=config.tail,
                trial=t,
            )


def _run_job(job):
    return run_trial(**job)


def _limit_threads():
    # one BLAS thread per process keeps floating-point reductions identical across worker counts
    threadpool_limits(1)


def run_grid(config, workers=1):
    """Run every (cell, trial) job; records come back in canonical order.

    Cells are taken in lexicographic order of the axis values, trials in
    index order. The trial seed is ``derive_seed(base_seed, cell_index,
    trial_index)``, so output does not depend on ``workers``.
    """
    jobs = list(_jobs(config))
    records = []
    try:
        if workers <= 1:
            with threadpool_limits(1):
                for job in jobs:
                    records.append(_run_job(job))
        else:
            with ProcessPoolExecutor(max_workers=workers, initializer=_limit_threads) as pool:
                for rec in pool.map(_run_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))):
                    records.append(rec)
    except Exception as exc:
        raise GridRunError(f"grid run aborted after {len(records)} of {len(jobs)} trials: {exc}",
                           records) from exc
    return records


def success_rates(records, axes):
    """Mean success per distinct value tuple of ``axes`` (dict keyed by tuple)."""
    groups = {}
    for rec in records:
        key = tuple(getattr(rec, a) for a in axes)
        groups.setdefault(key, []).append(rec.success)
    return {key: float(np.mean(vals)) for key, vals in sorted(groups.items())}
