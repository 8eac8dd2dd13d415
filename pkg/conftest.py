"""
Общие настройки pytest: длительные приёмочные прогоны выполняются только при RUN_SLOW=1
"""
import os

import pytest


def pytest_collection_modifyitems(config, items):
    if os.getenv("RUN_SLOW") == "1":
        return
    skip_slow = pytest.mark.skip(reason="длительный прогон; задайте RUN_SLOW=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)
