import math

import numpy as np
import pytest

from coqsim import CoherentKet, QubitSpec
from coqsim.encodings import PM


def random_state(rng, modes=3, terms=5, amp=3.0) -> CoherentKet:
    c = rng.normal(size=terms) + 1j * rng.normal(size=terms)
    a = amp * (rng.uniform(-1, 1, size=(terms, modes))
               + 1j * rng.uniform(-1, 1, size=(terms, modes)))
    return CoherentKet(c, a).normalize()


def random_spec(rng, alpha=None, encoding=PM) -> QubitSpec:
    v = rng.normal(size=4)
    mu, nu = complex(v[0], v[1]), complex(v[2], v[3])
    n = math.sqrt(abs(mu) ** 2 + abs(nu) ** 2)
    a = float(rng.uniform(1.0, 4.0)) if alpha is None else alpha
    return QubitSpec(mu / n, nu / n, a, encoding)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
