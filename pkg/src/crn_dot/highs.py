"""Floating-point search with HiGHS through ``scipy.optimize.milp``.

The model goes to HiGHS as one sparse row matrix with two-sided row bounds.
Points coming back are floats; ``solver.solve_milp`` turns them into exactly
feasible rational points before decoding.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import coo_matrix

from crn_dot.model import MilpModel
from crn_dot.simplex import INFEASIBLE, LIMIT, OPTIMAL

logger = logging.getLogger(__name__)

FAILED = "failed"

# scipy.optimize.milp status codes
_STATUS = {0: OPTIMAL, 1: LIMIT, 2: INFEASIBLE}
_UNBOUNDED = 3


@dataclass
class FloatSearch:
    status: str
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None
    nodes: int = 0
    message: str = ""


def model_arrays(model: MilpModel) -> tuple[np.ndarray, LinearConstraint, Bounds, np.ndarray]:
    """Objective, row block, column bounds and integrality of ``model`` as floats."""
    n = len(model.variables)
    rows, cols, data = [], [], []
    row_lower = np.full(len(model.constraints), -np.inf)
    row_upper = np.full(len(model.constraints), np.inf)
    for i, c in enumerate(model.constraints):
        for j, a in c.coeffs.items():
            rows.append(i)
            cols.append(j)
            data.append(float(a))
        if c.sense in (">=", "="):
            row_lower[i] = float(c.rhs)
        if c.sense in ("<=", "="):
            row_upper[i] = float(c.rhs)
    A = coo_matrix((data, (rows, cols)), shape=(len(model.constraints), n)).tocsr()

    objective = np.zeros(n)
    for j, c in model.objective.items():
        objective[j] = float(c)
    lower = np.array([float(v.lower) for v in model.variables])
    upper = np.array([np.inf if v.upper is None else float(v.upper) for v in model.variables])
    integrality = np.array([1 if v.binary else 0 for v in model.variables])
    return objective, LinearConstraint(A, row_lower, row_upper), Bounds(lower, upper), integrality


def search(model: MilpModel, time_limit: float, node_limit: int) -> FloatSearch:
    """Run HiGHS on ``model`` to a zero relative gap.

    Returns:
        FloatSearch with status optimal, infeasible, limit (``x`` set when an
        incumbent exists) or failed.

    Raises:
        ValueError: If HiGHS reports the relaxation unbounded.
    """
    objective, rows, bounds, integrality = model_arrays(model)
    res = milp(
        objective,
        constraints=rows,
        bounds=bounds,
        integrality=integrality,
        options={
            "time_limit": float(time_limit),
            "node_limit": int(node_limit),
            "mip_rel_gap": 0.0,
            "disp": False,
        },
    )
    if res.status == _UNBOUNDED:
        raise ValueError("LP relaxation is unbounded")
    status = _STATUS.get(res.status, FAILED)
    nodes = int(getattr(res, "mip_node_count", 0) or 0)
    logger.debug("highs %s after %d nodes: %s", status, nodes, res.message)
    return FloatSearch(
        status,
        None if res.x is None else np.asarray(res.x),
        None if res.x is None else float(res.fun),
        nodes,
        res.message,
    )
