import random

import pytest

from wdvvlab.kernel import Poly, Ring, as_mpq


def random_poly(ring, rng, nterms=5, maxdeg=4, maxc=9):
    """Small sparse polynomial with seeded random support."""
    t = {}
    for _ in range(nterms):
        e = tuple(rng.randint(0, maxdeg) for _ in range(ring.nvars))
        c = as_mpq(rng.randint(-maxc, maxc) or 1, rng.randint(1, 4))
        t[e] = c
    return ring.from_terms(t)


def random_nonzero(ring, rng, **kw):
    while True:
        p = random_poly(ring, rng, **kw)
        if not p.is_zero():
            return p


@pytest.fixture
def rng():
    return random.Random(20240811)


@pytest.fixture
def xy():
    return Ring(["x", "y"])


@pytest.fixture
def xyz():
    return Ring(["x", "y", "z"])
