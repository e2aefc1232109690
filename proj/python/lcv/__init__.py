"""Augmented Lagrangian solver for convex QPs over cone constraints.

The solver minimizes ``1/2 x'Gx + c'x`` subject to ``Hx - h in K`` for a
product cone ``K``. When no feasible point exists, the iterates converge to
the least constraint violation: ``solve(...)["shift"]`` is the smallest
vector ``s`` (in Euclidean norm) such that ``Hx - h + s in K`` is solvable,
and ``x`` solves the problem shifted by it. Reference computations
(``least_shift``, ``eval_nu``, ``eval_theta``) are independent of the solver
loop and exist to cross-check it.
"""

from ._core import (
    ConeBlock,
    Cones,
    Problem,
    __version__,
    check_level_bounded,
    check_optimality_certificate,
    check_shift_set_closed,
    check_unbounded_below,
    dual_recession_check,
    eval_nu,
    eval_theta,
    generate,
    least_shift,
    solve,
    verify_conjugacy,
)

__all__ = [
    "ConeBlock",
    "Cones",
    "Problem",
    "__version__",
    "check_level_bounded",
    "check_optimality_certificate",
    "check_shift_set_closed",
    "check_unbounded_below",
    "dual_recession_check",
    "eval_nu",
    "eval_theta",
    "generate",
    "least_shift",
    "solve",
    "verify_conjugacy",
]
