import json
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))  # make `oracles` importable

GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "golden")


@pytest.fixture(scope="session")
def golden_values():
    with open(os.path.join(GOLDEN_DIR, "values.json"), "r", encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def golden_hog_descriptor():
    return np.load(os.path.join(GOLDEN_DIR, "hog_descriptor.npy"))


def make_pgm(path, img):
    from stmatch.pgm import write_pgm

    write_pgm(path, np.asarray(img, dtype=np.uint8))
    return str(path)
