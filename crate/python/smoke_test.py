"""Exercises the extension module end to end. Run python/build.sh first."""

import os
import sys
from fractions import Fraction

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import mrdi_py as m

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
WORKER = os.environ.get("MRDI_WORKER_BIN", os.path.join(ROOT, "target", "release", "mrdi"))


def main():
    qq = m.Ring.rationals()
    r = m.Ring.multivariate(qq, ["x", "y"])
    x, y = r.gens()
    p = x**3 - x * y + 1
    assert str(p) == "x^3 - x*y + 1", str(p)
    assert p.total_degree() == 3

    text = m.save(p)
    assert text.startswith('{\n  "_ns"') and text.endswith("}\n")
    assert m.validate(text) == []
    back = m.load(text)
    assert back == p and back.ring == r
    assert m.load(m.save(p)) == p
    assert m.save(p) == text, "saves within one process share the ring's UUID"

    half = m.Polynomial(r, [((1, 0), Fraction(1, 2))])
    assert half.terms() == [([1, 0], Fraction(1, 2))]
    assert m.load(m.save([half, p])) == [half, p]
    assert m.load(m.save((3, Fraction(-2, 7), r))) == (3, Fraction(-2, 7), r)

    issues = m.validate(text.replace('"_type"', '"_kind"'))
    assert issues and issues[0].startswith("/"), issues

    zt = m.Ring.univariate(m.Ring.integers(), "t")
    (t,) = zt.gens()
    mat = m.Matrix(zt, [[t, 1], [1, t]])
    assert mat.shape == (2, 2) and mat[0, 0] == t
    det = m.modular_determinant(mat)
    assert str(det) == "t^2 - 1", str(det)
    assert m.modular_determinant(mat, heuristic=True) == det

    src = m.Ring.multivariate(qq, ["x", "y", "z"])
    tgt = m.Ring.multivariate(qq, ["s", "t"])
    s, tt = tgt.gens()
    phi = m.MonomialMap(src, tgt, [s**2, s * tt, tt**2])
    comps = m.components_of_kernel(phi, 2)
    assert [(md, [str(g) for g in gens]) for md, gens in comps] == [([2, 2], ["x*z - y^2"])], comps
    assert m.load(m.save(phi)) == phi

    assert m.crt_combine_balanced([2, 3], [5, 7]) == 17
    assert m.crt_combine_balanced([4, 6], [5, 7]) == -1

    if os.path.exists(WORKER):
        assert m.modular_determinant(mat, workers=2, worker_bin=WORKER) == det
        assert m.components_of_kernel(phi, 2, workers=2, worker_bin=WORKER) == comps
        print("pool checks ran with", WORKER)
    else:
        print("worker binary not found, skipped pool checks")

    try:
        m.modular_determinant(m.Matrix(zt, [[t, 1]]))
    except ValueError as e:
        assert "square" in str(e), e
    else:
        raise AssertionError("nonsquare matrix accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
