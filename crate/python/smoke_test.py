#!/usr/bin/env python3
"""Smoke test for the symflow Python extension module.

Builds the cdylib with cargo if needed, loads it directly from the target
directory, and exercises every exported function once.

Run from the repository root (or anywhere inside it):

    python3 python/smoke_test.py
"""

import json
import pathlib
import shutil
import subprocess
import sys
import tempfile


def build_and_import():
    root = pathlib.Path(__file__).resolve().parents[1]
    subprocess.run(
        ["cargo", "build", "-p", "symflow-py", "--release"],
        cwd=root,
        check=True,
    )
    lib = root / "target" / "release" / "libsymflow.so"
    if not lib.exists():  # macOS
        lib = root / "target" / "release" / "libsymflow.dylib"
    stage = pathlib.Path(tempfile.mkdtemp(prefix="symflow-py-"))
    shutil.copy(lib, stage / "symflow.so")
    sys.path.insert(0, str(stage))
    import symflow

    return symflow


def main():
    sf = build_and_import()
    failures = 0

    def check(name, cond, detail=""):
        nonlocal failures
        status = "ok" if cond else "FAIL"
        print(f"[{status}] {name}" + (f" — {detail}" if detail and not cond else ""))
        failures += 0 if cond else 1

    c = sf.classify("2", "3")
    check("classify k=2 m=3 is case 2", c["case"] == 2 and c["condition"] == "k=m-1", str(c))
    c = sf.classify("1", "1")
    check("classify m=1 is case 7 with 8 generators", c["case"] == 7 and c["dim"] == 8, str(c))
    try:
        sf.classify("0", "2")
        check("classify rejects k=0", False)
    except ValueError:
        check("classify rejects k=0", True)

    gens = sf.generators("1", "1", 1.3)
    check("case 7 generator list has 8 entries", len(gens) == 8, str(len(gens)))
    check("M1 is the x-translation", gens[0]["xi"] == "1" and gens[0]["phi"] == "0", str(gens[0]))

    ok, bad = sf.bracket_table("1", "1", 1.3, 0, False)
    check("corrected case 7 table matches", ok, str(bad))
    ok, bad = sf.bracket_table("1", "1", 1.3, 0, True)
    # The bad cell and its antisymmetric partner are both reported.
    check("as-printed case 7 table has the one bad cell",
          not ok and set(bad) == {(3, 5), (5, 3)}, str(bad))

    pt = sf.flow_point("1", "1", 1, 0.25, (1.0, 1.0, 1.0))
    check("G1 is the x-translation flow", abs(pt[0] - 1.25) < 1e-12 and pt[1] == 1.0, str(pt))

    cat = sf.catalog("1", "1", 1.3)
    ids = {e["id"] for e in cat}
    check("case 7 catalog contains the steady profile", "c7-m5m8" in ids, str(sorted(ids)))
    reds = sf.catalog_reductions("3/2", "5/2", 1.3)
    check("case 2 has similarity reductions", len(reds) >= 3, str(len(reds)))

    reports = sf.verify("3/2", "5/2", 1.3, 0)
    check("case 2 catalog verifies", all(r["ok"] for r in reports),
          str([r["id"] for r in reports if not r["ok"]]))

    a1 = sf.audit_json("1", "1", 1.3, 42)
    a2 = sf.audit_json("1", "1", 1.3, 42)
    check("audit is byte-identical for a fixed seed", a1 == a2)
    rep = json.loads(a1)
    check("audit all_ok for case 7", rep["all_ok"], a1[:200])

    grid = sf.solve_moc("1.4", "2", "3", [(0.5, 0.1), (1.0, 0.2)], 1.0)
    u_expected = (1.4 ** (-1.0) + 0.1) ** (-1.0)  # m=3: (u0^-2 + 2*lam*t)^(-1/2)
    u_expected = (1.4 ** (-2.0) + 2.0 * 0.1) ** (-0.5)
    check("MoC constant datum matches the closed form",
          abs(grid[0][2] - u_expected) < 1e-10, str(grid[0]))

    print()
    if failures:
        print(f"{failures} smoke check(s) failed")
        return 1
    print("all smoke checks passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
