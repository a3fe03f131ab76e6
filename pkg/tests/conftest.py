import pytest

from latticetest.model import LatticeConfig
from latticetest.session import ItemBank


def make_bank_doc(seed=7, levels=3, per_level=3):
    """A small arithmetic bank covering the requested levels."""
    templates = []
    for lvl in range(1, levels + 1):
        for i in range(per_level):
            templates.append(
                {
                    "id": f"lv{lvl}-t{i}",
                    "level": lvl,
                    "prompt": f"[level {lvl} drill] What is {{{{a}}}} + {{{{b}}}}?",
                    "params": {
                        "a": {"range": {"min": 1, "max": 9}},
                        "b": {"range": {"min": 10, "max": 90, "step": 10}},
                    },
                    "answer": "a + b",
                }
            )
    return {"seed": seed, "templates": templates}


def make_bank(seed=7, levels=3, per_level=3):
    return ItemBank.from_dict(make_bank_doc(seed=seed, levels=levels, per_level=per_level))


@pytest.fixture
def bank():
    return make_bank()


@pytest.fixture
def small_config():
    return LatticeConfig(n_levels=3, rows=6, items_per_node=1, threshold=1)
