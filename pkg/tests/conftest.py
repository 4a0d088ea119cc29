import pytest

from rkpar.builders import (
    DCConfig,
    deferred_correction_pair,
    euler_extrapolation_pair,
    load_reference_pair,
    midpoint_extrapolation_pair,
)


@pytest.fixture(scope="session")
def methods():
    """Session-wide cache of built methods keyed by selector-like tuples."""
    cache = {}

    def get(family, p=None, theta=None, nodes="chebyshev-lobatto", prune=True):
        key = (family, p, theta, nodes, prune)
        if key not in cache:
            if family == "ex-euler":
                cache[key] = euler_extrapolation_pair(p)
            elif family == "ex-midpoint":
                cache[key] = midpoint_extrapolation_pair(p)
            elif family == "dc":
                cfg = DCConfig.create(p, theta=theta, nodes=nodes)
                cache[key] = deferred_correction_pair(cfg, prune=prune)
            else:
                cache[key] = load_reference_pair(family)
        return cache[key]

    return get
