import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from pdefisher import Cauchy, Family, Gaussian, Mixture, Uniform

# Proper sources exercised throughout the suite, per family.
PROPER_CORPUS = {
    Family.HEAT: (
        Gaussian(0.0, 1.0),
        Uniform(0.0, 2.0),
        Cauchy(0.0, 1.0),
        Mixture(((0.3, Gaussian(-1.0, 0.5)), (0.7, Gaussian(1.0, 0.8)))),
    ),
    Family.LAPLACE: (
        Uniform(-1.0, 1.0),
        Cauchy(0.0, 1.0),
        Gaussian(0.0, 1.0),
        Mixture(((0.5, Cauchy(0.0, 1.0)), (0.5, Uniform(-2.0, 0.0)))),
    ),
}


def seeded_thetas(family: Family, n: int, seed: int):
    """Random parameter points inside the family domain."""
    import numpy as np

    from pdefisher import ParamPoint

    rng = np.random.default_rng(seed)
    loc = rng.uniform(-1.5, 1.5, size=n)
    scale = 10.0 ** rng.uniform(-0.7, 0.4, size=n)  # roughly [0.2, 2.5]
    if family is Family.HEAT:
        return [ParamPoint(family, float(a), float(s)) for a, s in zip(loc, scale)]
    return [ParamPoint(family, float(s), float(a)) for a, s in zip(loc, scale)]
