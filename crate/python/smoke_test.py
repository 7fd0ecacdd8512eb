"""Smoke test for the susyfactor_py extension.

Build with `maturin develop -m crates/python/Cargo.toml`, or copy
target/<profile>/libsusyfactor_py.so to susyfactor_py.so on PYTHONPATH.
"""

import json
import math
import sys

import susyfactor_py as sf


def main() -> int:
    names = sf.gallery_names()
    assert "witten" in names, names

    # value, gradient and Hessian of x1^2 * x2 at (2, 3)
    v, g, hess = sf.eval_jet("x1^2*x2", [2.0, 3.0])
    assert abs(v - 12.0) < 1e-14
    assert max(abs(a - b) for a, b in zip(g, [12.0, 4.0])) < 1e-14
    assert max(abs(a - b) for a, b in zip(hess, [6.0, 4.0, 4.0, 0.0])) < 1e-14

    report = json.loads(sf.run_gallery("witten", h=[0.1]))
    assert report["verdict"] == "PASS", report["checks"]

    text = sf.gallery_spec("kfp")
    report = json.loads(sf.verify(text))
    assert report["verdict"] == "PASS", report["checks"]
    g = sf.g_matrix(text, [0.3, -0.2], 0.1)
    assert len(g) == 4 and all(math.isfinite(a) for a in g)

    try:
        sf.verify("dimension = 0")
    except ValueError:
        pass
    else:
        raise AssertionError("bad spec accepted")

    print("susyfactor_py smoke test: ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
