import numpy as np
import pytest

from rsnsim.device import DeviceParams, DeviceState
from rsnsim.topology import Edge, NetworkTopology, build_grid


def fixed_conductance_params(g: float, lam: float = 0.0) -> DeviceParams:
    """Device whose conductance is exactly ``g/2`` at every bias.

    Both branch kernels are made negligibly small so the per-device
    conductance floor wins; the assembler adds the floor again in
    parallel, so the stamped branch conductance is exactly ``g``.
    """
    return DeviceParams(epsilon=1e-30, theta=1.0, gamma=1e-30, delta=1.0,
                        lam=lam, eta=1.0, tau=1.0, th_low=0.4, th_high=0.6,
                        g_floor=g / 2.0)


def linear_topology(edges, input_node=0, ground_node=None, interface_dim=4,
                    subdivision=0):
    """Hand-built topology with exact, bias-independent edge conductances.

    ``edges`` is a list of (a, b, conductance) over grid node indices.
    """
    grid = build_grid(interface_dim, subdivision)
    if ground_node is None:
        ground_node = grid.n_nodes - 1
    es = [Edge(a=a, b=b, params=fixed_conductance_params(g), state=DeviceState())
          for a, b, g in edges]
    return NetworkTopology(grid=grid, edges=es, input_node=input_node,
                           ground_node=ground_node, seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
