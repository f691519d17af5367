"""Shared fixtures: the expensive objects are built once per session."""

import time

import pytest


@pytest.fixture(scope="session")
def magic_fn():
    """The dimension-8 magic function at full working precision.

    Building the expansion takes a while, so the instance is shared; the
    build time is recorded for the runtime-budget assertions.
    """
    from spherelp.magic import MagicFunction

    t0 = time.time()
    magic = MagicFunction(order=64, precision=200)
    magic.build_seconds = time.time() - t0
    return magic


@pytest.fixture(scope="session")
def lp_sweep():
    """Certified LP bounds for n = 1..24 at the default degrees.

    One full sweep feeds both the tolerance checks and the runtime budget,
    mirroring how the CLI sweep command is used.
    """
    from spherelp import lpbounds

    t0 = time.time()
    certs = {n: lpbounds.optimize_r(n) for n in range(1, 25)}
    return {"certs": certs, "elapsed": time.time() - t0}
