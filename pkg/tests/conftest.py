import math

import numpy as np
import pytest

from twistdist import file_provider, trivial_provider


@pytest.fixture(scope="session")
def trivial():
    return trivial_provider()


@pytest.fixture(scope="session")
def degree2_file(tmp_path_factory):
    """Unit-circle degree-2 data at the primes up to 100: alpha = e^{i pi/3}
    at p = 2 (the worked example), pseudo-random angles elsewhere."""
    path = tmp_path_factory.mktemp("satake") / "deg2.txt"
    lines = ["#degree 2 theta 0.0 selfdual 0.0"]
    angles = {2: math.pi / 3}
    rng = np.random.Generator(np.random.Philox(key=42))
    primes = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47,
              53, 59, 61, 67, 71, 73, 79, 83, 89, 97]
    for p in primes:
        ang = angles.get(p, float(rng.random() * math.pi))
        c, s = math.cos(ang), math.sin(ang)
        lines.append(f"{p} {c!r} {s!r} {c!r} {-s!r}")
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path


@pytest.fixture(scope="session")
def degree2(degree2_file):
    return file_provider(degree2_file)
