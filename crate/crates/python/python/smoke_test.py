"""Smoke test for the logenergy_py extension.

Build first:  cargo build -p logenergy-python --features extension-module
If logenergy_py is not importable, the library is copied from target/ into a
temporary directory and imported from there.
"""

import math
import pathlib
import shutil
import sys
import tempfile


def load():
    try:
        import logenergy_py
        return logenergy_py
    except ImportError:
        pass
    root = pathlib.Path(__file__).resolve().parents[3]
    for profile in ("release", "debug"):
        lib = root / "target" / profile / "liblogenergy_py.so"
        if lib.exists():
            tmp = pathlib.Path(tempfile.mkdtemp())
            shutil.copy(lib, tmp / "logenergy_py.so")
            sys.path.insert(0, str(tmp))
            import logenergy_py
            return logenergy_py
    raise SystemExit("logenergy_py not built; see the module docstring")


def close(a, b, tol):
    assert abs(a - b) <= tol, (a, b)


def main():
    m = load()
    k = m.constants()
    close(k["leading"], 0.5 - math.log(2), 1e-15)
    close(k["corollary1_bound"], -0.0954607, 1e-7)
    close(k["cbhs"], -0.055605, 1e-6)

    tet = m.Configuration.generate("tetrahedron", 4)
    close(tet.log_energy(), -5.884975518070357, 1e-12)

    cfg = m.Configuration.generate("random", 20, seed=3)
    b = cfg.renormalized(0.05)
    assert abs(b["residual"]) < 1e-8, b
    close(b["x_closed"], m.closed_form_x(20, 0.05, 1e-12), 0.0)

    pair = m.Configuration([(0.0, 0.0, 1.0), (0.6, 0.0, 0.8)])
    best, info = pair.minimize()
    close(info["energy"], -2 * math.log(2), 1e-8)
    assert len(best) == 2

    p = m.KernelParams(0.01)
    assert p.heat(0.5) > 0.0
    close(p.diagonal(), 0.3333539419246084, 1e-12)

    value, cutoff, tail = m.gamma_lattice_sum(0.01, 1e-13)
    close(value, m.three_term_expansion(0.01), 1e-10)
    close(m.cubic_theta_l(0.5), m.cubic_theta_l(0.5, "borwein"), 1e-12)
    assert m.theta_inequality_margin(1.0) > 0.0

    try:
        m.Configuration([(0.0, 0.0, 2.0)])
    except ValueError:
        pass
    else:
        raise AssertionError("off-sphere point accepted")
    print("smoke test passed")


if __name__ == "__main__":
    main()
