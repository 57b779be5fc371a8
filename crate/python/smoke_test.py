#!/usr/bin/env python3
"""Builds the fgdyn extension module and exercises it end to end.

Run from anywhere: `python3 python/smoke_test.py`. Needs cargo and a
CPython with development headers (the pyo3 build finds them itself).
"""

import json
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def build_module(dest: Path) -> None:
    subprocess.run(
        ["cargo", "build", "-p", "fgdyn-py", "--features", "extension-module"],
        cwd=REPO,
        check=True,
    )
    shutil.copy(REPO / "target" / "debug" / "libfgdyn.so", dest / "fgdyn.so")


def expect_value_error(fn, needle: str, label: str) -> None:
    try:
        fn()
    except ValueError as e:
        assert needle in str(e), f"{label}: unexpected message {e!r}"
    else:
        raise AssertionError(f"{label}: expected ValueError({needle!r})")


def main() -> None:
    dest = Path(tempfile.mkdtemp(prefix="fgdyn-smoke-"))
    build_module(dest)
    sys.path.insert(0, str(dest))
    import fgdyn

    # Word algebra: free reduction, inverses, conjugacy classes.
    w = fgdyn.Word("abA")
    assert len(w * w.inverse()) == 0
    assert str(fgdyn.Word("ab") * fgdyn.Word("Ba")) == "aa"
    assert w.cyclic() == fgdyn.CyclicClass("b")
    assert str(fgdyn.Word("ab").conjugate_by(fgdyn.Word("c"))) == "cabC"

    # Automorphism algebra: images, composition, inversion, powers.
    trib = fgdyn.Automorphism("a->ab; b->ac; c->a")
    assert trib.rank() == 3
    assert str(trib.apply(fgdyn.Word("ab"))) == "abac"
    assert trib.compose(trib.inverse()).is_identity()
    assert trib.power(2) == fgdyn.Automorphism("a->abac; b->aba; c->ab")
    assert trib.power(-1) == trib.inverse()

    # The Fibonacci map fixes the commutator class with period 2.
    fib = fgdyn.Automorphism("a->ab; b->a")
    verdict = json.loads(fgdyn.certify_hyperbolicity(fib))
    assert verdict["verdict"] == "NotHyperbolic"
    assert verdict["witness"] == "abAB"
    assert verdict["period"] == 2
    assert json.loads(fgdyn.certify_hyperbolicity(trib))["verdict"] == "NoObstructionFound"

    # Orbit lengths obey the tribonacci recurrence and the rate estimate
    # sits on the dominant root 1.8393.
    profile = json.loads(fgdyn.growth_profile(trib, fgdyn.CyclicClass("a")))
    lengths = profile["lengths"]
    assert lengths[:3] == [1, 2, 4]
    assert all(
        lengths[n] == lengths[n - 1] + lengths[n - 2] + lengths[n - 3]
        for n in range(3, len(lengths))
    )
    assert abs(profile["estimated_rate"] - 1.8393) < 0.01

    points = json.loads(fgdyn.attracting_points(trib, twist_bound=1))
    assert points["fixed_points"]["lifts"]
    assert points["gjll"]["violations"] == []

    fps = json.loads(fgdyn.fingerprints(trib))
    assert len(fps) == 1
    assert len(fps[0]["subwords"]) == 10

    limits = json.loads(fgdyn.weak_limits(trib, fgdyn.CyclicClass("c"), twist_bound=1))
    assert limits["lines"]
    assert all(l["classification"]["kind"] != "Unclassified" for l in limits["lines"])

    graph = json.loads(fgdyn.ct_graph(trib, max_sample_len=1, twist_bound=1))
    assert graph["edges"]
    assert graph["audit"]["passed"]

    qc = json.loads(fgdyn.subgroup_qc(trib, ["a", "b"]))
    assert qc["subgroup_states"] == 1
    assert qc["verdict"]["verdict"] == "NoObstructionFound"

    assert fgdyn.common_lamination(trib, trib.power(2))
    assert not fgdyn.common_lamination(trib, fgdyn.Automorphism("a->b; b->bc; c->ba"))

    # Failures surface as Python exceptions with the library messages.
    expect_value_error(
        lambda: fgdyn.Automorphism("a->ab"), "no image clause", "missing clause"
    )
    expect_value_error(
        lambda: fgdyn.weak_limits(fgdyn.Automorphism.identity(2), fgdyn.CyclicClass("a")),
        "not hyperbolic",
        "identity guard",
    )
    expect_value_error(
        lambda: fgdyn.subgroup_qc(trib, ["a", "b", "c"]), "finite index", "qc guard"
    )

    print("smoke test passed")


if __name__ == "__main__":
    main()
