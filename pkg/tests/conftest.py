import json

import pytest

from rankpool import pooling


CHAIN_DOC = {
    "sources": [{"id": "s", "U": 1, "L": 0, "lambda": {"1": 1.0}}],
    "pools": [{"id": "p", "U": 1, "L": 0}],
    "terminals": [{"id": "t", "U": 1, "L": 0,
                   "mu_lo": {"1": 1.0}, "mu_hi": {"1": 1.0}}],
    "arcs": [{"from": "s", "to": "p", "l": 0, "u": 1, "cost": 0},
             {"from": "p", "to": "t", "l": 0, "u": 1, "cost": -1}],
    "objective": "min_cost",
}


@pytest.fixture
def chain_instance():
    """1-source/1-pool/1-terminal chain with a forced unit flow, optimum -1."""
    return pooling.loads(json.dumps(CHAIN_DOC))


@pytest.fixture
def tense_params():
    """Generator parameters with binding arc capacities and spec windows."""
    return pooling.GenParams(nS=4, nI=2, nT=3, density_si=0.9, density_ii=0.4,
                             density_it=0.9, u_arc=(2.0, 6.0),
                             U_node=(6.0, 12.0), mu_width=(0.1, 0.5),
                             arc_lower_prob=0.4)
