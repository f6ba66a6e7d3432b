"""Reference minimizer for the range-difference cost, used to audit solvers.

Exhaustively grids the timing-advance annulus around the base station at
fixed resolution, then polishes the best grid point with a derivative-free
simplex search.  Slow by design; the closed-form solvers are checked against
this, never the other way around.
"""

from typing import Sequence, Tuple

from scipy.optimize import minimize

from ._kernels import annulus_grid_min
from .geometry import Position
from .tdoa import TdoaPair, range_difference_residual

#: Default grid resolution, meters.
GRID_STEP = 0.05


def pair_cost(u: Position, pairs: Sequence[TdoaPair]) -> float:
    """Sum of squared range-difference misses at ``u``, m^2."""
    return range_difference_residual(u, pairs) ** 2


def annulus_minimum(enb: Position, band: Tuple[float, float],
                    pairs: Sequence[TdoaPair], step: float = GRID_STEP,
                    refine: bool = True) -> Tuple[Position, float]:
    """Minimize the pairwise cost over the annulus ``band`` around ``enb``.

    Returns (position, cost).  The polish step is unconstrained, so the
    result may leave the annulus when the unconstrained minimum sits just
    outside; this mirrors the solvers, which prefer but do not enforce the
    band.
    """
    if not pairs:
        raise ValueError("need at least one pair")
    ref = pairs[0].ref_sniffer
    others = [(p.other_sniffer.x, p.other_sniffer.y) for p in pairs]
    dd = [p.delta_d for p in pairs]
    cost, x, y = annulus_grid_min((enb.x, enb.y), band[0], band[1], step,
                                  (ref.x, ref.y), others, dd)
    if not refine:
        return Position(x, y), float(cost)
    fit = minimize(lambda v: pair_cost(Position(v[0], v[1]), pairs),
                   x0=[x, y], method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000})
    if fit.fun <= cost:
        return Position(float(fit.x[0]), float(fit.x[1])), float(fit.fun)
    return Position(x, y), float(cost)
