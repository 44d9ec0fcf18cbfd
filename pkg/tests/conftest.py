import os
import sys
from functools import lru_cache

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from supercartan.classical import build_classical  # noqa: E402
from supercartan.families import FamilySpec, build_family  # noqa: E402
from supercartan.field import FieldCtx  # noqa: E402

# (family, m, n, t, lambda) for every instance the suites touch, keyed by FamilySpec.name
INSTANCES = {
    "W(1,2;(1))": ("W", 1, 2, (1,), None),
    "W(2,2;(1,1))": ("W", 2, 2, (1, 1), None),
    "W(2,1;(1,1))": ("W", 2, 1, (1, 1), None),
    "W(1,1;(1))": ("W", 1, 1, (1,), None),
    "S(2,2;(1,1))": ("S", 2, 2, (1, 1), None),
    "H(2,2;(1,1))": ("H", 2, 2, (1, 1), None),
    "K(3,2;(1,1,1))": ("K", 3, 2, (1, 1, 1), None),
    "HO(3,3;(1,1,1))": ("HO", 3, 3, (1, 1, 1), None),
    "SHO(3,3;(1,1,1))": ("SHO", 3, 3, (1, 1, 1), None),
    "KO(3,4;(1,1,1))": ("KO", 3, 4, (1, 1, 1), None),
    "SKO(3,4;(1,1,1))[lambda=1]": ("SKO", 3, 4, (1, 1, 1), 1),
    "SKO(3,4;(1,1,1))[lambda=3]": ("SKO", 3, 4, (1, 1, 1), 3),
}

SMALL = ["W(1,2;(1))", "W(2,2;(1,1))", "W(2,1;(1,1))", "W(1,1;(1))", "S(2,2;(1,1))",
         "H(2,2;(1,1))"]
LARGE = ["K(3,2;(1,1,1))", "HO(3,3;(1,1,1))", "SHO(3,3;(1,1,1))", "KO(3,4;(1,1,1))",
         "SKO(3,4;(1,1,1))[lambda=1]", "SKO(3,4;(1,1,1))[lambda=3]"]


def spec_of(name, p=5) -> FamilySpec:
    f, m, n, t, lam = INSTANCES[name]
    return FamilySpec(f, m, n, t, p, lam)


@lru_cache(maxsize=None)
def family(name):
    return build_family(spec_of(name))


@lru_cache(maxsize=None)
def classical(kind, m, n=None, p=5):
    return build_classical(kind, m, n, FieldCtx(p))


def pytest_collection_modifyitems(config, items):
    for item in items:
        if "slow" in item.keywords:
            continue
        params = getattr(item, "callspec", None)
        if params and any(v in LARGE for v in params.params.values()):
            item.add_marker(pytest.mark.slow)
