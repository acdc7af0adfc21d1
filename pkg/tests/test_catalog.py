import json

import numpy as np
import pytest

from bernwidth.catalog import BUILTIN, catalog_function
from bernwidth.polyspace import PiecewisePoly


def test_builtin_names_resolve():
    for name in BUILTIN:
        for d in (1, 2):
            f = catalog_function(name, d)
            assert f.d == d
            assert np.all(np.isfinite(f(np.random.default_rng(0).random((10, d)))))


def test_values():
    x = np.array([[0.25, 0.5]])
    assert catalog_function("linear", 2)(x)[0] == 0.75
    assert catalog_function("abs-power:2", 2)(x)[0] == pytest.approx(0.0625)
    assert catalog_function("sin:1", 2)(x)[0] == pytest.approx(np.sin(np.pi / 4))
    assert catalog_function("zero", 2)(x)[0] == 0.0
    assert catalog_function("bump", 1)([[0.5]])[0] == pytest.approx(np.exp(-4))


def test_unknown_names():
    for bad in ("nope", "linear:3", "bump:1", "piecewise-poly"):
        with pytest.raises(KeyError):
            catalog_function(bad)


def test_piecewise_poly_file(tmp_path, rng):
    f = PiecewisePoly.random((2, 1), (1, 0), rng)
    path = tmp_path / "f.json"
    path.write_text(f.to_json())
    g = catalog_function(f"piecewise-poly:{path}", 2)
    x = rng.random((20, 2))
    np.testing.assert_allclose(g.evaluate(x), f.evaluate(x), rtol=0, atol=0)
    with pytest.raises(ValueError):
        catalog_function(f"piecewise-poly:{path}", 1)
    assert json.loads(path.read_text())["d"] == 2
