from __future__ import annotations

import pytest

from peek.oracle import generate_record, random_script


@pytest.fixture(scope="session")
def one_grasp_scene():
    script = random_script(7, 1)
    record, gt = generate_record(script)
    return script, record, gt


@pytest.fixture(scope="session")
def two_grasp_scene():
    script = random_script(8, 2)
    record, gt = generate_record(script, render=False)
    return script, record, gt
