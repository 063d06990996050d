"""Command-line front end.

Subcommands: ``audit`` (privacy report, optionally with an empirical
audit), ``curves`` (epsilon-versus-delta tables), ``sample`` (raw
mechanism draws), ``simulate`` (the bundled average-query experiment), and
``replay`` (re-run a recorded manifest).

Every command writes its artifacts into ``--out`` together with a
``manifest.json`` capturing the full parameter set, seed, tool version,
and artifact digests; replaying a manifest reproduces the numeric columns
to the last digit.  File formats: JSON for nested reports, CSV (UTF-8,
'.' decimal) for bulk tables; floats serialize with 17 significant digits.

Exit codes: 0 success, 2 infeasible domain or invalid input, 3 infeasible
calibration, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import accounting as acc
from . import empirical as emp
from . import fixture as fixture_mod
from .exceptions import (
    CalibrationInfeasibleError,
    DirichletPrivacyError,
    NumericalError,
)
from .mechanism import MechanismConfig, RngSeed, sample_many
from .simplex import AdjacencyParams, DomainSpec, SimplexVector, make_adjacent

MANIFEST_SCHEMA = "dirichlet-privacy/manifest/v1"
REPORT_SCHEMA = "dirichlet-privacy/report/v1"
CSV_SCHEMAS = {
    "audit.csv": "dirichlet-privacy/audit/v1",
    "curves.csv": "dirichlet-privacy/curves/v1",
    "samples.csv": "dirichlet-privacy/samples/v1",
    "runs.csv": "dirichlet-privacy/runs/v1",
    "summary.csv": "dirichlet-privacy/summary/v1",
}

SEED_ENV_VAR = "DIRICHLET_PRIVACY_SEED"

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_CALIBRATION = 3
EXIT_NUMERICAL = 4


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR, "").strip()
    return int(raw) if raw else 0


def _write_csv(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(out: Path, command: str, params: dict, artifacts: list[str]) -> None:
    manifest = {
        "schema": MANIFEST_SCHEMA,
        "command": command,
        "parameters": params,
        "version": __version__,
        "created_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "csv_schemas": {name: CSV_SCHEMAS[name] for name in artifacts if name in CSV_SCHEMAS},
        "artifacts": {
            name: {"sha256": _sha256_file(out / name)} for name in artifacts
        },
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _domain_from_params(params: dict) -> DomainSpec:
    return DomainSpec(
        n=params["n"],
        w_indices=params["w_indices"],
        eta=params["eta"],
        eta_bar=params["eta_bar"],
    )


def _canonical_audit_pair(
    d: DomainSpec, a: AdjacencyParams
) -> tuple[SimplexVector, SimplexVector]:
    """A deterministic in-domain adjacent pair for empirical audits.

    The base point is the centroid of the projected domain's vertices with
    the slack mass spread evenly over unconstrained coordinates; the
    comparison point shifts the first two W coordinates as far as the
    adjacency budget and the domain allow.
    """
    from .simplex import restricted_vertices

    vertices = np.array(restricted_vertices(d))
    centroid = vertices.mean(axis=0)
    entries = [0.0] * d.n
    for idx, val in zip(d.w_indices, centroid):
        entries[idx - 1] = float(val)
    slack = 1.0 - float(centroid.sum())
    free = [i for i in range(1, d.n + 1) if i not in d.w_indices]
    for i in free:
        entries[i - 1] = slack / len(free)
    p = SimplexVector(entries)
    if d.w_size < 2:
        return p, p
    i, j = d.w_indices[0], d.w_indices[1]
    room = p.entries[j - 1] - d.eta
    shift = min(a.b / 2.0, max(room, 0.0)) * 0.999
    if shift <= 0.0:
        return p, p
    return p, make_adjacent(p, d, a, i, j, shift)


def _report_json(report: acc.PrivacyReport) -> dict:
    d = report.domain
    return {
        "schema": REPORT_SCHEMA,
        "query": report.query,
        "collection_size": report.collection_size,
        "epsilon": report.epsilon,
        "epsilon_approx": report.epsilon_approx,
        "delta": report.delta,
        "gamma": report.gamma.gamma,
        "w_size": report.gamma.w_size,
        "divisor_convention": report.divisor_convention,
        "k": report.mechanism.k,
        "b": report.adjacency.b,
        "domain": {
            "n": d.n,
            "w_indices": list(d.w_indices),
            "eta": d.eta,
            "eta_bar": d.eta_bar,
        },
        "calibrated": report.diagnostics.calibrated,
        "gamma_binding": report.diagnostics.gamma_binding,
        "argmin_vertex": list(report.diagnostics.argmin_vertex),
        "vertices": [
            {
                "vertex": list(v.vertex),
                "omega1_probability": v.probability,
                "error": v.error,
                "method": v.method,
            }
            for v in report.diagnostics.vertices
        ],
    }


def cmd_audit(params: dict, out: Path) -> list[str]:
    d = _domain_from_params(params)
    cfg = MechanismConfig(k=params["k"])
    a = AdjacencyParams(b=params["b"])
    convention = (
        "collection_size" if params["divisor"] == "N" else "dimension"
    )
    report = acc.privacy_report(
        cfg,
        d,
        a,
        params["query"],
        delta_hat=params.get("delta_hat"),
        gamma=params.get("gamma"),
        collection_size=params.get("collection_size"),
        convention=convention,
    )
    (out / "report.json").write_text(
        json.dumps(_report_json(report), indent=2) + "\n", encoding="utf-8"
    )
    artifacts = ["report.json"]
    if params["empirical"]:
        p, q = _canonical_audit_pair(d, AdjacencyParams(b=report.effective_b))
        ac_cfg = emp.AuditConfig(
            samples=params["samples"],
            seed=RngSeed(params["seed"], params["stream"]),
        )
        result = emp.audit_pair(cfg, p, q, report, ac_cfg)
        n = d.n
        header = (
            ["samples", "empirical_delta", "delta_ci_low", "delta_ci_high",
             "max_observed_loss", "loss_violations", "omega1_count", "redraws"]
            + [f"mean_{i}" for i in range(1, n + 1)]
            + [f"var_{i}" for i in range(1, n + 1)]
        )
        row = (
            [result.samples, _fmt(result.empirical_delta),
             _fmt(result.delta_ci[0]), _fmt(result.delta_ci[1]),
             _fmt(result.max_observed_loss), result.loss_violations,
             result.omega1_count, result.redraws]
            + [_fmt(v) for v in result.empirical_mean]
            + [_fmt(v) for v in result.empirical_variance]
        )
        _write_csv(out / "audit.csv", header, [row])
        artifacts.append("audit.csv")
    return artifacts


def cmd_curves(params: dict, out: Path) -> list[str]:
    w_size = params["w_size"]
    d = DomainSpec(
        n=w_size + 1,
        w_indices=tuple(range(1, w_size + 1)),
        eta=params["eta"],
        eta_bar=params["eta_bar"],
    )
    cfg = MechanismConfig(k=params["k"])
    a = AdjacencyParams(b=params["b"])
    start, stop, step = params["delta_grid"]
    rows = []
    count = int(round((stop - start) / step))
    for i in range(count + 1):
        delta_hat = start + i * step
        part = acc.calibrate_gamma(cfg, d, delta_hat)
        eps = acc.epsilon_identity(cfg, d, a, part)
        try:
            eps_approx = _fmt(acc.epsilon_identity_approx(cfg, d, a, part))
        except DirichletPrivacyError:
            eps_approx = ""
        rows.append([_fmt(delta_hat), _fmt(part.gamma), _fmt(eps), eps_approx])
    _write_csv(out / "curves.csv", ["delta", "gamma", "epsilon_exact", "epsilon_approx"], rows)
    return ["curves.csv"]


def cmd_sample(params: dict, out: Path) -> list[str]:
    p = SimplexVector(params["p"])
    cfg = MechanismConfig(k=params["k"])
    batch = sample_many(
        cfg, p, RngSeed(params["seed"], params["stream"]), params["count"]
    )
    n = p.n
    header = ["draw"] + [f"x_{i}" for i in range(1, n + 1)]
    rows = [
        [idx] + [_fmt(v) for v in row] for idx, row in enumerate(batch.values)
    ]
    _write_csv(out / "samples.csv", header, rows)
    return ["samples.csv"]


def cmd_simulate(params: dict, out: Path) -> list[str]:
    fixture_path = params.get("fixture")
    if fixture_path is None:
        collection = fixture_mod.load_collection()
        digest = fixture_mod.BUNDLED_SHA256
    else:
        digest = _sha256_file(Path(fixture_path))
        expected = params.get("fixture_sha256")
        if expected is not None and digest != expected:
            raise DirichletPrivacyError(
                f"fixture hash mismatch: manifest records {expected}, "
                f"file has {digest}"
            )
        collection = fixture_mod.load_collection(fixture_path)
    params["fixture_sha256"] = digest
    spec = emp.ExperimentSpec(
        k=params["k"],
        runs=params["runs"],
        seed=RngSeed(params["seed"], params["stream"]),
        collection=collection,
    )
    result = emp.run_average_experiment(spec)
    n = result.average_p.n
    runs_header = ["run", "arm"] + [f"x_{i}" for i in range(1, n + 1)]
    runs_rows = []
    for arm, outputs in (("P", result.outputs_p), ("Q", result.outputs_q)):
        for r, row in enumerate(outputs):
            runs_rows.append([r, arm] + [_fmt(v) for v in row])
    _write_csv(out / "runs.csv", runs_header, runs_rows)
    summary_header = ["arm", "statistic"] + [f"value_{i}" for i in range(1, n + 1)]
    summary_rows = [
        ["P", "average_input"] + [_fmt(v) for v in result.average_p],
        ["Q", "average_input"] + [_fmt(v) for v in result.average_q],
        ["P", "empirical_mean"] + [_fmt(v) for v in result.mean_p],
        ["Q", "empirical_mean"] + [_fmt(v) for v in result.mean_q],
        ["P", "empirical_variance"] + [_fmt(v) for v in result.variance_p],
        ["Q", "empirical_variance"] + [_fmt(v) for v in result.variance_q],
    ]
    _write_csv(out / "summary.csv", summary_header, summary_rows)
    return ["runs.csv", "summary.csv"]


_COMMANDS = {
    "audit": cmd_audit,
    "curves": cmd_curves,
    "sample": cmd_sample,
    "simulate": cmd_simulate,
}


def _run_command(command: str, params: dict, out_dir: str) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    artifacts = _COMMANDS[command](params, out)
    _write_manifest(out, command, params, artifacts)


def cmd_replay(manifest_path: str, out_dir: str) -> None:
    manifest = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
    if manifest.get("schema") != MANIFEST_SCHEMA:
        raise DirichletPrivacyError(
            f"unsupported manifest schema {manifest.get('schema')!r}"
        )
    command = manifest["command"]
    if command not in _COMMANDS:
        raise DirichletPrivacyError(f"unknown command {command!r} in manifest")
    params = dict(manifest["parameters"])
    if "delta_grid" in params:
        params["delta_grid"] = tuple(params["delta_grid"])
    if "p" in params:
        params["p"] = tuple(params["p"])
    if "w_indices" in params:
        params["w_indices"] = tuple(params["w_indices"])
    _run_command(command, params, out_dir)


def _parse_indices(raw: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in raw.split(",") if tok.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad index list {raw!r}") from None


def _parse_floats(raw: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in raw.split(",") if tok.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {raw!r}") from None


def _parse_grid(raw: str) -> tuple[float, float, float]:
    parts = raw.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(
            f"grid must be start:stop:step, got {raw!r}"
        )
    start, stop, step = (float(v) for v in parts)
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError(f"bad grid {raw!r}")
    return start, stop, step


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dirichlet-privacy",
        description="Dirichlet mechanism privacy accounting, sampling, and auditing",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    audit = sub.add_parser("audit", help="compute a privacy report")
    audit.add_argument("--n", type=int, required=True)
    audit.add_argument("--w-indices", type=_parse_indices, required=True,
                       metavar="I,J,...", help="1-based constrained coordinates")
    audit.add_argument("--eta", type=float, required=True)
    audit.add_argument("--eta-bar", type=float, required=True)
    audit.add_argument("--b", type=float, required=True)
    audit.add_argument("--k", type=float, required=True)
    audit.add_argument("--query", choices=["identity", "average"], default="identity")
    audit.add_argument("--N", type=int, default=None, dest="collection_size",
                       help="collection size for average queries")
    level = audit.add_mutually_exclusive_group(required=True)
    level.add_argument("--delta-hat", type=float, default=None)
    level.add_argument("--gamma", type=float, default=None)
    audit.add_argument("--divisor", choices=["N", "n"], default="N")
    audit.add_argument("--empirical", action="store_true")
    audit.add_argument("--samples", type=int, default=100_000)
    audit.add_argument("--seed", type=int, default=None)
    audit.add_argument("--stream", type=int, default=0)
    audit.add_argument("--out", required=True)

    curves = sub.add_parser("curves", help="epsilon/delta trade-off table")
    curves.add_argument("--eta", type=float, required=True)
    curves.add_argument("--eta-bar", type=float, required=True)
    curves.add_argument("--k", type=float, required=True)
    curves.add_argument("--b", type=float, required=True)
    curves.add_argument("--w-size", type=int, required=True)
    curves.add_argument("--delta-grid", type=_parse_grid, required=True,
                        metavar="START:STOP:STEP")
    curves.add_argument("--out", required=True)

    sample = sub.add_parser("sample", help="raw mechanism draws")
    sample.add_argument("--p", type=_parse_floats, required=True,
                        metavar="P1,P2,...")
    sample.add_argument("--k", type=float, required=True)
    sample.add_argument("--count", type=int, default=1000)
    sample.add_argument("--seed", type=int, default=None)
    sample.add_argument("--stream", type=int, default=0)
    sample.add_argument("--out", required=True)

    simulate = sub.add_parser("simulate", help="bundled average-query experiment")
    simulate.add_argument("--k", type=float, default=24.0)
    simulate.add_argument("--runs", type=int, default=1000)
    simulate.add_argument("--seed", type=int, default=None)
    simulate.add_argument("--stream", type=int, default=0)
    simulate.add_argument("--fixture", default=None,
                          help="collection CSV (default: bundled)")
    simulate.add_argument("--out", required=True)

    replay = sub.add_parser("replay", help="re-run a recorded manifest")
    replay.add_argument("manifest")
    replay.add_argument("--out", required=True)
    return parser


def _params_from_args(args: argparse.Namespace) -> dict:
    seed = args.seed if getattr(args, "seed", None) is not None else _default_seed()
    if args.command == "audit":
        if args.query == "average" and args.collection_size is None:
            raise DirichletPrivacyError("--query average requires --N")
        return {
            "n": args.n,
            "w_indices": args.w_indices,
            "eta": args.eta,
            "eta_bar": args.eta_bar,
            "b": args.b,
            "k": args.k,
            "query": args.query,
            "collection_size": args.collection_size,
            "delta_hat": args.delta_hat,
            "gamma": args.gamma,
            "divisor": args.divisor,
            "empirical": args.empirical,
            "samples": args.samples,
            "seed": seed,
            "stream": args.stream,
        }
    if args.command == "curves":
        return {
            "eta": args.eta,
            "eta_bar": args.eta_bar,
            "k": args.k,
            "b": args.b,
            "w_size": args.w_size,
            "delta_grid": args.delta_grid,
        }
    if args.command == "sample":
        return {
            "p": args.p,
            "k": args.k,
            "count": args.count,
            "seed": seed,
            "stream": args.stream,
        }
    if args.command == "simulate":
        return {
            "k": args.k,
            "runs": args.runs,
            "seed": seed,
            "stream": args.stream,
            "fixture": args.fixture,
        }
    raise AssertionError(f"unhandled command {args.command!r}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "replay":
            cmd_replay(args.manifest, args.out)
        else:
            _run_command(args.command, _params_from_args(args), args.out)
    except CalibrationInfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DirichletPrivacyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
