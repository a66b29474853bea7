"""Command line: ``gendiag simulate | diag | traceplot``.

Exit status is 0 on success, 2 on usage or input errors and 1 on internal
errors. Poor mixing is reported in the output, never through the exit status.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import sys
import warnings
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import samplers
from .chainio import load_chain_set, state_from_json, write_ndjson
from .diagnostics import Lanfear, NearestNeighbor, run_generalized_diagnostic, write_traceplot_csv
from .distances import Euclidean, Hamming, MetropolisHastings, read_distance_table
from .errors import GendiagError, ShapeMismatch, ZeroVarianceWarning
from .svg import write_svg

SYNTHETIC = {"synthetic-partition", "synthetic-binary"}


class UsageError(GendiagError):
    pass


def _write_text(path, text: str):
    """Write a whole artifact at once; '-' or None means stdout."""
    if path in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    tmp = Path(str(path) + ".tmp")
    tmp.write_text(text)
    tmp.replace(path)


def _sidecar_path(path) -> Path:
    return Path(str(path) + ".meta.json")


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def cmd_simulate(args) -> int:
    if args.config:
        spec_json = json.loads(Path(args.config).read_text())
        if args.seed is not None:
            spec_json["seed"] = args.seed
        spec_json.setdefault("name", "custom")
    elif args.scenario:
        spec_json = {"name": args.scenario, "seed": 0 if args.seed is None else args.seed}
        if args.n_iter:
            spec_json["n_iter"] = args.n_iter
    else:
        raise UsageError("simulate needs --scenario or --config")

    name = spec_json["name"]
    if name in SYNTHETIC:
        k = int(spec_json.get("chains", args.chains or 5))
        n = int(spec_json.get("n_iter", args.n_iter or 1000))
        kind = samplers.PartitionChains() if name == "synthetic-partition" else samplers.BinaryMatrixChains()
        trapped = bool(spec_json.get("trapped", args.trapped))
        cs = samplers.synthetic_discrete_chains(kind, k, n, seed=int(spec_json["seed"]), trapped=trapped)
        meta = {"scenario": {"name": name, "chains": k, "n_iter": n, "trapped": trapped,
                             "generator": asdict(kind), "seed": int(spec_json["seed"])}}
    else:
        if args.trapped:
            raise UsageError("--trapped only applies to synthetic scenarios")
        spec = samplers.scenario_from_json(spec_json)
        cs = samplers.mh_run(spec)
        meta = {"scenario": spec.to_json()}
    meta["rng"] = samplers.RNG_ALGORITHM
    meta["spec_hash"] = hashlib.sha256(json.dumps(meta["scenario"], sort_keys=True, separators=(",", ":")).encode()).hexdigest()

    buf = io.StringIO()
    write_ndjson(cs, buf)
    _write_text(args.output, buf.getvalue())
    if args.output not in (None, "-"):
        _write_text(_sidecar_path(args.output), _dumps(meta))
    return 0


def _mh_distance(args):
    spec_json = None
    if args.scenario:
        spec_json = {"name": args.scenario}
    else:
        side = _sidecar_path(args.input)
        if side.exists():
            spec_json = json.loads(side.read_text()).get("scenario")
    if not spec_json or spec_json.get("name") in SYNTHETIC:
        raise UsageError("--distance mh needs --scenario NAME or a simulate sidecar naming an MH scenario")
    spec = samplers.scenario_from_json(spec_json)
    return MetropolisHastings(spec.target.log_density, spec.proposal, label=spec.name)


def _distance(args, cs):
    sel = args.distance
    if sel == "euclidean":
        if cs.kind != "real_vector":
            raise ShapeMismatch(f"--distance euclidean needs real_vector chains, got {cs.kind}")
        return Euclidean()
    if sel == "hamming":
        if cs.kind not in ("binary_matrix", "partition"):
            raise ShapeMismatch(f"--distance hamming needs binary_matrix or partition chains, got {cs.kind}")
        return Hamming()
    if sel == "mh":
        if cs.kind != "real_vector":
            raise ShapeMismatch("--distance mh supports the shipped real-valued scenarios only")
        return _mh_distance(args)
    if sel.startswith("table:"):
        return read_distance_table(sel[len("table:"):])
    raise UsageError(f"unknown distance {sel!r}")


def _map_choice(args, cs):
    if args.map == "lanfear":
        if args.reference:
            ref = state_from_json(json.loads(Path(args.reference).read_text()))
            if ref.shape_key != cs.shape_key:
                raise ShapeMismatch(f"reference has shape {ref.shape_key}, chains have {cs.shape_key}")
            return Lanfear(ref)
        return Lanfear(0)
    start = args.start_index
    if args.random_start:
        start = int(np.random.default_rng(args.seed).integers(cs.N))
    if not 0 <= start < cs.N:
        raise UsageError(f"--start-index {start} outside pool of size {cs.N}")
    return NearestNeighbor(start=start)


def _run(args):
    if args.burn_in < 0:
        raise UsageError("--burn-in must be nonnegative")
    cs = load_chain_set(args.input, burn_in=args.burn_in)
    d = _distance(args, cs)
    report = run_generalized_diagnostic(cs, d, _map_choice(args, cs))
    report.config["run"] = {
        "input_sha256": _sha256(args.input), "burn_in": args.burn_in, "distance": args.distance,
        "map": args.map, "start_index": args.start_index, "random_start": args.random_start,
        "seed": args.seed, "reference": args.reference,
    }
    return report


def cmd_diag(args) -> int:
    report = _run(args)
    out = report.to_json()
    if args.no_ess:
        out["ess"], out["per_chain_ess"] = None, []
    if args.no_psrf:
        out["psrf"] = None
    if args.csv:
        buf = io.StringIO()
        write_traceplot_csv(report.traceplot, buf)
        _write_text(args.csv, buf.getvalue())
    _write_text(args.output, _dumps(out))
    return 0


def cmd_traceplot(args) -> int:
    if not (args.csv or args.svg):
        raise UsageError("traceplot needs --csv and/or --svg")
    report = _run(args)
    if args.csv:
        buf = io.StringIO()
        write_traceplot_csv(report.traceplot, buf)
        _write_text(args.csv, buf.getvalue())
    if args.svg:
        buf = io.StringIO()
        m = report.config["map"]["variant"]
        write_svg(report.traceplot, buf, title=f"Generalized traceplot ({args.distance}, {m})")
        _write_text(args.svg, buf.getvalue())
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gendiag", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a sampler scenario and write NDJSON chains")
    s.add_argument("--scenario", choices=sorted(samplers._NAMED) + sorted(SYNTHETIC))
    s.add_argument("--config", help="JSON scenario file")
    s.add_argument("--seed", type=int)
    s.add_argument("--n-iter", type=int)
    s.add_argument("--chains", type=int, help="chain count for synthetic scenarios")
    s.add_argument("--trapped", action="store_true", help="freeze one synthetic chain")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_simulate)

    for name, fn, helptext in (("diag", cmd_diag, "generalized ESS / PSRF report"),
                               ("traceplot", cmd_traceplot, "generalized traceplot as CSV and/or SVG")):
        c = sub.add_parser(name, help=helptext)
        c.add_argument("input", help="NDJSON chain file")
        c.add_argument("--distance", default="euclidean", help="euclidean | hamming | mh | table:PATH")
        c.add_argument("--map", choices=["lanfear", "nn"], default="nn")
        c.add_argument("--reference", help="JSON state used by the Lanfear map (default: first draw)")
        c.add_argument("--start-index", type=int, default=0)
        c.add_argument("--random-start", action="store_true", help="seeded random tour start")
        c.add_argument("--seed", type=int, default=0)
        c.add_argument("--scenario", choices=sorted(samplers._NAMED),
                       help="target/proposal for --distance mh")
        c.add_argument("--burn-in", type=int, default=0)
        c.add_argument("--csv", help="mapped chains as chain,iter,value")
        if name == "diag":
            c.add_argument("--no-ess", action="store_true")
            c.add_argument("--no-psrf", action="store_true")
            c.add_argument("-o", "--output")
        else:
            c.add_argument("--svg")
        c.set_defaults(func=fn)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            # constant chains are reported through the report's flags
            warnings.simplefilter("ignore", ZeroVarianceWarning)
            return args.func(args)
    except (GendiagError, ValueError, OSError, json.JSONDecodeError) as e:
        print(f"gendiag: error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001
        print(f"gendiag: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
