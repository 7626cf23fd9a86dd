"""Rebuild the NETLIB benchmark files in ``data/netlib`` from a SciPy source tree.

SciPy's source distribution ships most NETLIB LPs as ``.npz`` files under
``benchmarks/benchmarks/linprog_benchmark_files`` (arrays ``c, A_ub, b_ub,
A_eq, b_eq, bounds, obj``).  This script writes them back out as gzipped
free-format MPS so that the solver's own reader is exercised end to end.

    python scripts/netlib_from_scipy.py scipy-1.18.1.tar.gz data/netlib
"""

import argparse
import gzip
import io
import json
import pathlib
import tarfile

import numpy as np

from mpip.mps import model_from_arrays, write_mps

BENCHMARK_SET = [
    "BNL2", "D2Q06C", "DEGEN3", "MAROS-R7", "QAP12", "SCTAP2", "SCTAP3",
    "SHIP12L", "SHIP12S", "STOCFOR2", "TRUSS", "WOODW", "CRE-A", "CRE-C",
]
MEMBER = "benchmarks/benchmarks/linprog_benchmark_files/{}.npz"


def _load(source: pathlib.Path, name: str):
    if source.is_dir():
        path = source / MEMBER.format(name)
        return np.load(path, allow_pickle=True) if path.exists() else None
    with tarfile.open(source) as tar:
        for member in tar.getmembers():
            if member.name.endswith("/" + MEMBER.format(name)):
                data = tar.extractfile(member).read()
                return np.load(io.BytesIO(data), allow_pickle=True)
    return None


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("source", type=pathlib.Path, help="SciPy sdist tarball or unpacked tree")
    ap.add_argument("out", type=pathlib.Path)
    ap.add_argument("--problems", nargs="*", default=BENCHMARK_SET)
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    index = {}
    for name in args.problems:
        d = _load(args.source, name)
        if d is None:
            print(f"{name}: not in source, skipped")
            continue
        if d["bounds"].size:
            raise SystemExit(f"{name}: explicit bounds are not handled by this script")
        model = model_from_arrays(
            name, d["c"], d["A_ub"] if d["A_ub"].ndim == 2 else None, d["b_ub"],
            d["A_eq"] if d["A_eq"].ndim == 2 else None, d["b_eq"],
        )
        buf = io.StringIO()
        write_mps(model, buf)
        target = args.out / f"{name.lower().replace('-', '_')}.mps.gz"
        with gzip.open(target, "wt", compresslevel=9) as fh:
            fh.write(buf.getvalue())
        index[name.lower().replace("-", "_")] = {"optimal_objective": float(d["obj"])}
        print(f"{name}: wrote {target}")
    (args.out / "reference.json").write_text(json.dumps(index, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
