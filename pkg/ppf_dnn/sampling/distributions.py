"""Monte-Carlo draws of the uncertain bus injections."""

import numpy as np

from ..exceptions import DistributionError
from ..models.enums import LoadRole
from ..models.inputs import UncertaintySpec
from ..rng import make_rng

# stream key components
_P, _Q = 0, 1


def draw_samples(spec: UncertaintySpec, n: int, seed: int) -> np.ndarray:
    """
    Draw n independent columns of net bus injections.

    Rows are [P at every bus; Q at every bus] in p.u. Each (entry, component)
    pair owns its own random stream keyed by its position in the spec, so a
    column depends only on the seed and the spec.

    Raises:
        DistributionError: n < 1, bad parameters, or non-finite draws
    """
    if n < 1:
        raise DistributionError(f"sample count must be >= 1, got {n}")

    nb = spec.n_bus
    out = np.zeros((2 * nb, n))
    for k, entry in enumerate(spec.entries):
        sign = -1.0 if entry.role == LoadRole.LOAD else 1.0
        for comp, dist, row in ((_P, entry.p, entry.bus), (_Q, entry.q, nb + entry.bus)):
            dist.check()
            values = dist.draw(make_rng(seed, "sample", k, comp), n)
            if not np.all(np.isfinite(values)):
                raise DistributionError(f"entry {k} at bus {entry.bus} produced non-finite samples")
            out[row] += sign * values
    return out
