"""Smoke test for the edgelaw_py extension.

Build first:
    cargo build --release -p edgelaw-python --features extension-module
then run from the repository root:
    python3 python/smoke_test.py
"""

import importlib.util
import math
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parents[1]


def load():
    try:
        import edgelaw_py  # installed copy, if any

        return edgelaw_py
    except ImportError:
        pass
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libedgelaw_py.so"
        if lib.exists():
            spec = importlib.util.spec_from_file_location("edgelaw_py", lib)
            mod = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(mod)
            return mod
    sys.exit("libedgelaw_py.so not found; build the extension first")


def main():
    ev = load()

    tw = ev.F_sigma(-2.0, 0.0)
    assert abs(tw.value - 0.413224142505096) < 1e-12, tw
    assert tw.err_est < 1e-10

    f1 = ev.F_sigma(0.0, 1.0)
    assert 0.0 < f1.value < 1.0 and f1.complement > 0.0
    many = ev.F_sigma_many([(-1.0, 1.0), (0.0, 1.0), (1.0, 1.0)])
    assert [d.value for d in many] == sorted(d.value for d in many)
    assert many[1].value == f1.value

    k = ev.kernel(0.3, 0.7, 0.5, 1.0)
    kc = ev.kernel(0.3, 0.7, 0.5, 1.0, kind="ft_airy_contour")
    assert abs(k - kc) < 1e-10, (k, kc)

    right = ev.tail("thm2", 8.0, 1.0)
    assert right.valid and right.complement > 0.0
    c = ev.tail("gumbel", 0.0, 200.0).pieces["c_sigma"]
    gum = ev.tail("gumbel", c, 200.0)
    assert gum.valid and abs(gum.value - math.exp(-1.0)) < 1e-12

    state = ev.solve_idpii(1.0, t_min=-2.0, t0=8.0, m_h=24)
    g = state.F(-1.0)
    ref = ev.F_sigma(-1.0, 1.0)
    assert abs(g.value - ref.value) < 1e-6, (g, ref)

    run = ev.monte_carlo(64, 50, 7)
    again = ev.monte_carlo(64, 50, 7)
    assert run.samples == again.samples and len(run.samples) == 50
    assert run.reference == "tracy_widom" and run.ks is not None

    checks = ev.selftest(only="specfun")
    assert len(checks) == 1 and checks[0].passed, checks

    try:
        ev.F_sigma(0.0, -1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative sigma accepted")

    print("edgelaw_py smoke test: ok")


if __name__ == "__main__":
    main()
