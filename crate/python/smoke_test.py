"""Smoke test for the nsmac_py extension.

Build first:  cargo build --release -p nsmac-py --features extension-module
"""

import importlib.util
import json
import os
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    lib = os.environ.get("NSMAC_PY_LIB")
    candidates = [Path(lib)] if lib else [
        ROOT / "target" / "release" / name for name in ("libnsmac_py.so", "libnsmac_py.dylib", "nsmac_py.dll")
    ]
    for path in candidates:
        if path.exists():
            tmp = Path(tempfile.mkdtemp()) / "nsmac_py.so"
            shutil.copy(path, tmp)
            spec = importlib.util.spec_from_file_location("nsmac_py", tmp)
            mod = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(mod)
            return mod
    sys.exit("extension not built; see module docstring")


def main():
    m = load()

    e = m.macdonald_e([0, 0], "t0")
    assert str(e) == "1", str(e)

    e = m.macdonald_e([0, 2, 1], "t0")
    assert e.is_homogeneous() and e.lambda_ == [0, 2, 1] and e.spec == "t0"
    assert e.coeff([1, 1, 1]) == "1 + q", e.coeff([1, 1, 1])

    assert m.norm_a_q([0, 2], 4) == ["1", "1", "2", "2", "3"]
    assert m.norm_a_q([0, 2], 4, alt=True) == m.norm_a_q([0, 2], 4)
    assert m.norm_a_qt([0, 1]) != "1"

    r = m.verify("gl-t0", 2, 3, 4)
    assert r.passed and r.variant == "gl-t0" and r.lambda_count == 10
    assert json.loads(r.to_json())["outcome"] == "pass"

    r = m.verify("gl-qt", 2, 2)
    assert r.passed

    ch = json.loads(m.character("D", [1, 0, 1], 2, 2))
    assert all(t["exps"][3:] == [0, 0, 0] for t in ch)

    try:
        m.verify("nope", 2, 1, 1)
    except ValueError:
        pass
    else:
        raise AssertionError("unknown identity accepted")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
