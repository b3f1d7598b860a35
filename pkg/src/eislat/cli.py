"""Command line: masses, classification, lattice builds, automorphisms and theta checks.

Exit codes: 0 success, 2 usage error, 3 resource guard hit, 4 verification failure.
"""
from __future__ import annotations

import argparse
import json
import os
import struct
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .mass import factor_fraction, isotropic_count, mass_even, mass_odd
from .zlattice.enumerate import ResourceGuardError
from .zlattice.lattice import VerificationError, short_vectors

EXIT_OK, EXIT_USAGE, EXIT_GUARD, EXIT_VERIFY = 0, 2, 3, 4
CACHE_ENV = "EISLAT_CACHE_DIR"
LATTICE_LABELS = ("Lambda4", "Lambda4^2", "3E8", "4E6", "6D4", "12A2", "Leech")
SV_MAGIC = b"EISV"


class UsageError(Exception):
    pass


# --- caches ------------------------------------------------------------------------------

def cache_dir(args) -> Path | None:
    d = args.cache_dir or os.environ.get(CACHE_ENV)
    if not d:
        return None
    p = Path(d)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _build(label: str):
    from .hermitian import build_rank12, direct_sum, lambda4
    if label == "Lambda4":
        return lambda4()
    if label == "Lambda4^2":
        l4 = lambda4()
        return direct_sum(l4, l4, label="Lambda4^2")
    return build_rank12(label)


def get_lattice(label: str, cache: Path | None):
    """The lattice for ``label``, read from the cache when present."""
    from .hermitian import OLattice
    if label not in LATTICE_LABELS:
        raise UsageError(f"unknown lattice {label!r}; choose from {', '.join(LATTICE_LABELS)}")
    path = cache / f"{label}.olattice.json" if cache else None
    if path is not None and path.exists():
        lat = OLattice.from_json(path.read_text())
        if not lat.is_eisenstein():
            raise VerificationError(f"cached {label} fails validation")
        return lat
    lat = _build(label)
    if path is not None:
        path.write_text(lat.to_json())
    return lat


def write_short_vectors(path: Path, vectors: np.ndarray, bound: int) -> None:
    """Binary layout: b'EISV', then little-endian uint32 rank, uint32 bound, uint64 count,
    followed by count * rank little-endian int16 coordinates (row-major)."""
    vecs = np.asarray(vectors)
    count, rank = vecs.shape
    with open(path, "wb") as fh:
        fh.write(SV_MAGIC)
        fh.write(struct.pack("<IIQ", rank, bound, count))
        fh.write(vecs.astype("<i2").tobytes())


def read_short_vectors(path: Path) -> tuple[np.ndarray, int]:
    data = Path(path).read_bytes()
    if data[:4] != SV_MAGIC:
        raise VerificationError("not a short-vector file")
    rank, bound, count = struct.unpack("<IIQ", data[4:20])
    vecs = np.frombuffer(data[20:], dtype="<i2").reshape(count, rank)
    return vecs.astype(np.int64), bound


# --- output --------------------------------------------------------------------------------

def _emit(report: dict, fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "json":
        out.write(json.dumps(report, indent=1, sort_keys=True) + "\n")
        return
    if fmt == "csv":
        import csv
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in _flatten(report):
            w.writerow([k, v])
        return
    for k, v in _flatten(report):
        out.write(f"{k}: {v}\n")


def _flatten(d, prefix=""):
    if isinstance(d, dict):
        for k, v in d.items():
            yield from _flatten(v, f"{prefix}{k}.")
    else:
        yield prefix.rstrip("."), d


def _factored_int(n: int) -> str:
    return factor_fraction(Fraction(n))


# --- subcommands ---------------------------------------------------------------------------

def cmd_mass(args) -> dict:
    r = args.rank
    if r is None or r <= 0 or r % 4:
        raise UsageError("mass needs --rank divisible by 4")
    me, mo = mass_even(r), mass_odd(r)
    c1, c2 = isotropic_count(r, "orthogonal"), isotropic_count(r, "symplectic")
    return {"rank": r,
            "mass": {"value": str(me.value), "factored": me.factored()},
            "mass_odd": {"value": str(mo.value), "factored": mo.factored()},
            "c1_orthogonal": c1, "c2_symplectic": c2,
            "identity_mass_equals_odd_times_c1_over_c2": me.value == mo.value * c1 / c2}


def _classes(r: int) -> list[str]:
    from .hermitian import RANK12_LABELS
    return {4: ["Lambda4"], 8: ["Lambda4^2"], 12: list(RANK12_LABELS)}[r]


def cmd_classify(args) -> dict:
    from .hermitian import orthogonal_index, trace_lattice, unitary_aut
    r = args.rank
    if r not in (4, 8, 12):
        raise UsageError("classify supports --rank 4, 8 or 12")
    cache = cache_dir(args)
    rows, total = [], Fraction(0)
    for label in _classes(r):
        lat = get_lattice(label, cache)
        zl, _ = trace_lattice(lat)
        roots = short_vectors(zl, 2, store=False).counts.get(2, 0)
        grp = unitary_aut(lat, threads=args.threads)
        total += Fraction(1, grp.order)
        row = {"label": label, "roots": roots, "unitary_order": grp.order,
               "unitary_order_factored": _factored_int(grp.order)}
        if args.index and not (label == "Leech" and not args.leech_index):
            idx = orthogonal_index(lat, threads=args.threads, unitary_order=grp.order)
            row["orthogonal_index"] = idx
            row["orthogonal_index_factored"] = _factored_int(idx)
        elif args.index:
            row["orthogonal_index"] = "not run"
        rows.append(row)
    mu = mass_even(r).value
    report = {"rank": r, "classes": rows, "sum_inverse_orders": str(total), "mass": str(mu),
              "mass_identity_holds": total == mu}
    if total != mu:
        report["error"] = "mass identity violated"
    return report


def cmd_build(args) -> dict:
    from .hermitian import trace_lattice
    label = _need_label(args)
    cache = cache_dir(args)
    lat = get_lattice(label, cache)
    zl, B = trace_lattice(lat)
    report = {"label": label, "rank": lat.r, "hash": lat.content_hash(),
              "det": str(lat.det()), "validation": lat.validation(),
              "hgram": lat.hgram.to_strings(), "provenance": lat.provenance}
    if args.bound:
        sv = short_vectors(zl, args.bound, threads=args.threads)
        report["short_vector_counts"] = {str(k): v for k, v in sorted(sv.counts.items())}
        if cache is not None:
            path = cache / f"{label}.sv{args.bound}.bin"
            write_short_vectors(path, sv.vectors, args.bound)
            report["short_vector_file"] = path.name
    return report


def cmd_aut(args) -> dict:
    from .hermitian import aut_z, unitary_aut
    label = _need_label(args)
    lat = get_lattice(label, cache_dir(args))
    grp = unitary_aut(lat, threads=args.threads)
    report = {"label": label, "unitary_order": grp.order,
              "unitary_order_factored": _factored_int(grp.order),
              "generators": [[[str(x) for x in row] for row in g] for g in grp.generators]}
    if args.index:
        zg = aut_z(lat, threads=args.threads)
        report["orthogonal_order"] = zg.order
        report["orthogonal_order_factored"] = _factored_int(zg.order)
        report["orthogonal_index"] = zg.order // grp.order
    return report


def cmd_theta(args) -> dict:
    from .theta import theta_deg1, theta_deg2_table
    label = _need_label(args)
    if args.bound is None or args.bound < 0:
        raise UsageError("theta needs a nonnegative --bound")
    cache = cache_dir(args)
    lat = get_lattice(label, cache)
    if args.degree == 1:
        table = theta_deg1(lat, args.bound)
    elif args.degree == 2:
        table = theta_deg2_table(lat, args.bound, threads=args.threads)
    else:
        raise UsageError("theta tables are produced for degree 1 or 2")
    if cache is not None:
        ext = "csv" if args.format == "csv" else "json"
        path = cache / f"{label}.theta{args.degree}.b{args.bound}.{ext}"
        path.write_text(table.to_csv() if ext == "csv" else table.to_json())
    return {"label": label, "degree": table.degree, "bound": table.bound,
            "complete": table.complete, "coefficients": table.coeffs}


def cmd_cuspcheck(args) -> dict:
    from .theta import COMBOS, STATED_G3_INDEX, cusp_check
    form = (args.form or "").upper()
    if form not in COMBOS:
        raise UsageError("cuspcheck needs --form F, G, H or J")
    combo = COMBOS[form]
    degree = args.degree or combo.degree
    bound = args.bound if args.bound is not None else (16 if degree == 1 else 4)
    cache = cache_dir(args)
    lattices = {lab: get_lattice(lab, cache) for lab in combo.labels}
    report = cusp_check(combo, bound, degree=degree, threads=args.threads, lattices=lattices,
                        indices=[STATED_G3_INDEX] if degree == 3 else None)
    if degree == 3:
        report["stated_value"] = 5184
        vals = list(report["values"].values())
        report["stated_value_matches"] = bool(vals) and vals[0] == 5184
    return report


def _need_label(args) -> str:
    if not args.label:
        raise UsageError("--label is required")
    return args.label


COMMANDS = {"mass": cmd_mass, "classify": cmd_classify, "theta": cmd_theta,
            "cuspcheck": cmd_cuspcheck, "build": cmd_build, "aut": cmd_aut}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eislat", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--rank", type=int)
    p.add_argument("--label")
    p.add_argument("--form")
    p.add_argument("--degree", type=int)
    p.add_argument("--bound", type=int)
    p.add_argument("--cache-dir")
    p.add_argument("--format", choices=("json", "csv", "text"), default="text")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--index", action="store_true",
                   help="also compute orthogonal groups and the index [Aut_Z : Aut]")
    p.add_argument("--leech-index", action="store_true",
                   help="include the (long) orthogonal group of the Leech lattice")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    if args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_USAGE
    np.random.seed(args.seed)
    try:
        report = COMMANDS[args.command](args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceGuardError as e:
        print(f"resource guard: {e}", file=sys.stderr)
        return EXIT_GUARD
    except VerificationError as e:
        print(f"verification failed: {e}", file=sys.stderr)
        return EXIT_VERIFY
    _emit(report, args.format)
    if report.get("error"):
        return EXIT_VERIFY
    return EXIT_OK


def main_entry() -> None:  # pragma: no cover
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_entry()
