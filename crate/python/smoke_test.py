"""Smoke test for the Python bindings.

Build and install first:  pip install --no-build-isolation ./crates/py
Run:  python python/smoke_test.py
"""

from fractions import Fraction

import quiverlax_py as ql


def frac(pair):
    return complex(float(Fraction(pair[0])), float(Fraction(pair[1])))


def main():
    counts = {kind: ql.roots(kind)[:2] for kind in ("D4", "E6", "E7", "E8")}
    assert counts == {"D4": (24, 12), "E6": (72, 36), "E7": (126, 63), "E8": (240, 120)}, counts

    # exact parameter action: reflections square to the identity
    lam = [["1/2", "0"], ["-1", "1/3"], ["2", "0"], ["3/4", "-1"], ["5", "2"]]
    assert ql.reflect_params("D4", [0, 0], lam) == lam
    assert ql.violated_roots("D4", lam) == []

    sys = ql.System.sample("E6", 7)
    assert len(sys.residues()) == 3 and all(len(a) == 3 for a in sys.residues())
    assert sys.sum_defect() < 1e-12
    sys.check(1e-8)

    once = sys.central_reflection()
    once.check(1e-8)
    twice = once.central_reflection()
    assert twice.distance(sys) < 1e-6, twice.distance(sys)
    assert [frac(x) for x in twice.params()] == [frac(x) for x in sys.params()]
    assert '"central"' in twice.word

    back = ql.System.from_json(twice.to_json())
    assert back.to_json() == twice.to_json()

    mu = ql.translation_basis("E6")[0]
    moved = sys.translate(mu)
    moved.check(1e-8)
    csv = sys.orbit(mu, 3)
    assert len(csv.strip().splitlines()) == 5

    try:
        sys.translate([1] + [0] * 6)
    except ValueError:
        pass
    else:
        raise AssertionError("a translation of nonzero level was accepted")

    p = ql.PointConfig(["1/2", "-3", "5/7", "2/9", "11/4", "-8/5", "1/3"])
    assert p.walls() == []
    assert p.act(0).act(0) == p
    assert p.act(2).params() != p.params()
    on_wall = ql.PointConfig(["1/2", "1/2", "0", "1", "2", "3"])
    assert on_wall.walls()[0] == "coincident(1 2)"
    rows = p.orbit([1, 0, 0, 0, 0, 0, -1], 4).strip().splitlines()
    assert len(rows) == 6

    print("python smoke test: OK")


if __name__ == "__main__":
    main()
