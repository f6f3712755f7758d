"""curvelab command line.

    curvelab catalog
    curvelab forms --surface sphere --r 2 --at 0.3,0.2
    curvelab laplacian --surface helicoid --form II --field n --at 0,1 --verify
    curvelab identities --surface helicoid --c 1 --grid 64
    curvelab detect --surface sphere --r 1 --form II
    curvelab xval --surface quadric2 --a 1 --b 1 --pipeline quadric2 --grid 10

The JSON report goes to stdout and to the output directory (``--out``,
``$CURVELAB_OUT`` or ./curvelab-out); a one-line summary goes to stderr.
Exit codes: 0 PASS/success, 1 FAIL, 2 INDETERMINATE, 3 usage, 4 numeric/domain.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from . import beltrami as B
from . import closedforms as CF
from . import finitetype as FT
from .errors import ConfigurationError, ConstructionError, CurvelabError, DomainError, NumericError
from .forms import evaluate_frame, frame_to_dict, normalize_form
from .identities import IDENTITIES, check_identities
from .surfaces import catalog_listing, make_surface, parse_point

SCHEMA = "curvelab/1"
EXIT_OK, EXIT_FAIL, EXIT_INDETERMINATE, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3, 4
VERDICT_EXIT = {FT.PASS: EXIT_OK, FT.FAIL: EXIT_FAIL, FT.INDETERMINATE: EXIT_INDETERMINATE}
SURFACE_FLAGS = ("r", "R", "c", "l", "a", "b")

# settings that may come from a config file, with their types and defaults
SETTINGS = {
    "surface": (str, None),
    "form": (str, "II"),
    "strategy": (str, "jittered-grid"),
    "count": (int, 64),
    "seed": (int, 0),
    "tau_pass": (float, FT.TAU_PASS),
    "tau_fail": (float, FT.TAU_FAIL),
    "k_min": (float, None),
    "order": (int, 3),
    "out": (str, None),
    "format": (str, "both"),
    "grid": (int, None),
    "pipeline": (str, None),
    "field": (str, "n"),
    "at": (str, None),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="curvelab", description="Geometry of parametric surfaces and Beltrami operators.")
    parser.add_argument("--version", action="version", version=f"curvelab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, sampling=False):
        p.add_argument("--config", help="key = value file; flags override it")
        p.add_argument("--surface", help="catalog name (see 'curvelab catalog')")
        for key in SURFACE_FLAGS:
            p.add_argument(f"--{key}", type=float, default=None, dest=f"param_{key}", metavar="X",
                           help=f"surface parameter {key}")
        p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE", help="other surface parameters")
        p.add_argument("--order", type=int, default=None, help="jet order (2..4; frames need >= 3)")
        p.add_argument("--k-min", type=float, default=None, dest="k_min")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--format", choices=("json", "csv", "both"), default=None)
        if sampling:
            p.add_argument("--strategy", choices=FT.STRATEGIES, default=None)
            p.add_argument("--count", type=int, default=None)
            p.add_argument("--seed", type=int, default=None)
        return p

    sub.add_parser("catalog", help="list catalog surfaces")

    p = common(sub.add_parser("forms", help="pointwise forms, curvature and Christoffel symbols"))
    p.add_argument("--at", default=None, metavar="U,V")

    p = common(sub.add_parser("laplacian", help="Beltrami operator of a field at a point"))
    p.add_argument("--form", default=None)
    p.add_argument("--field", default=None, help="n, x or a scalar field (u, v, K, H, x1..x3, n1..n3)")
    p.add_argument("--at", default=None, metavar="U,V")
    p.add_argument("--verify", action="store_true", help="with form II and field n, also report the identity residual")
    p.add_argument("--grid", type=int, default=None, help="evaluate on N sample points instead of --at")
    p.add_argument("--seed", type=int, default=None)

    p = common(sub.add_parser("identities", help="check pointwise identities on a sample set"), sampling=True)
    p.add_argument("--grid", type=int, default=None, help="number of sample points (alias of --count)")
    p.add_argument("--names", default=None, help="comma-separated identity names")

    p = common(sub.add_parser("detect", help="fit Delta^J n = Lambda n and classify"), sampling=True)
    p.add_argument("--form", default=None)
    p.add_argument("--tau-pass", type=float, default=None, dest="tau_pass")
    p.add_argument("--tau-fail", type=float, default=None, dest="tau_fail")
    p.add_argument("--position", action="store_true", help="fit Delta^J x = A x + B instead")

    p = common(sub.add_parser("xval", help="closed forms versus the generic engine"))
    p.add_argument("--pipeline", choices=("ruled", "quadric1", "quadric2"), default=None)
    p.add_argument("--grid", type=int, default=None, help="points per side of the evaluation grid")
    return parser


def _read_config(path: str | None) -> dict:
    if not path:
        return {}
    parser = configparser.ConfigParser()
    parser.optionxform = str  # surface parameters are case-sensitive (R vs r)
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file: {exc}") from None
    if not text.lstrip().startswith("["):
        text = "[curvelab]\n" + text
    parser.read_string(text)
    out = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            out[key.replace("-", "_")] = value
    return out


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults < config file < flags.  Surface parameters are gathered under "params"."""
    from_file = _read_config(getattr(args, "config", None))
    cfg = {}
    for key, (kind, default) in SETTINGS.items():
        value = getattr(args, key, None)
        if value is None and key in from_file:
            try:
                value = kind(from_file[key])
            except ValueError:
                raise ConfigurationError(f"config: bad value for {key!r}: {from_file[key]!r}") from None
        cfg[key] = default if value is None else value

    params = {}
    for key, value in from_file.items():
        if key.startswith("param_") or key.startswith("param."):
            params[key[6:]] = float(value)
    for key in SURFACE_FLAGS:
        value = getattr(args, f"param_{key}", None)
        if value is not None:
            params[key] = value
    for item in getattr(args, "param", []) or []:
        if "=" not in item:
            raise ConfigurationError(f"--param expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise ConfigurationError(f"--param {key}: not a number: {value!r}") from None
    cfg["params"] = params
    cfg["out"] = cfg["out"] or os.environ.get("CURVELAB_OUT") or "curvelab-out"
    return cfg


def _patch(cfg):
    if not cfg["surface"]:
        raise ConfigurationError("--surface is required")
    return make_surface(cfg["surface"], cfg["params"], k_min=cfg["k_min"])


def _point(cfg, patch):
    if cfg["at"] is None:
        raise ConfigurationError("--at U,V is required")
    u, v = parse_point(cfg["at"])
    if not patch.admissible(u, v):
        raise DomainError(f"point ({u}, {v}) is outside the admissible domain of {patch.name}")
    return u, v


def cmd_catalog(cfg):
    return {"surfaces": catalog_listing()}, [], EXIT_OK, "catalog listed"


def cmd_forms(cfg):
    patch = _patch(cfg)
    u, v = _point(cfg, patch)
    frame = evaluate_frame(patch, u, v, cfg["order"], require_curved=False)
    out = frame_to_dict(frame)
    return out, [], EXIT_OK, f"{patch.name} at ({u:g}, {v:g}): K = {frame.K:.6g}, H = {frame.H:.6g}"


def _laplacian_at(frame, form, field):
    if field in B.VECTOR_FIELDS:
        return B.laplacian_vector(form, field, frame).tolist()
    return B.laplacian_scalar(form, field, frame)


def cmd_laplacian(cfg, verify=False):
    patch = _patch(cfg)
    form = normalize_form(cfg["form"])
    field = cfg["field"]
    if verify and (form != "II" or field != "n"):
        raise ConfigurationError("--verify applies to form II and field n")
    curved = form != "I"
    if cfg["grid"]:
        samples = FT.sample(patch, cfg["strategy"], cfg["grid"], cfg["seed"], require_curved=curved)
        rows = []
        for u, v in samples.points:
            frame = evaluate_frame(patch, u, v, cfg["order"], require_curved=curved)
            value = np.atleast_1d(_laplacian_at(frame, form, field))
            row = {"u": float(u), "v": float(v), **{f"lap_{i + 1}": float(c) for i, c in enumerate(value)}}
            if verify:
                row["identity_residual"] = float(np.linalg.norm(value - B.gauss_map_identity_rhs(frame)))
            rows.append(row)
        out = {"form": form, "field": field, "count": len(rows)}
        if verify:
            out["identity_residual_max"] = max(r["identity_residual"] for r in rows)
        return out, rows, EXIT_OK, f"Delta^{form} {field} on {len(rows)} points of {patch.name}"
    u, v = _point(cfg, patch)
    frame = evaluate_frame(patch, u, v, cfg["order"], require_curved=curved)
    value = _laplacian_at(frame, form, field)
    out = {"form": form, "field": field, "u": u, "v": v, "value": value}
    if verify:
        out["identity_residual"] = float(np.linalg.norm(np.asarray(value) - B.gauss_map_identity_rhs(frame)))
    return out, [], EXIT_OK, f"Delta^{form} {field} at ({u:g}, {v:g}) = {np.round(value, 10).tolist()}"


def cmd_identities(cfg, names=None):
    patch = _patch(cfg)
    count = cfg["grid"] or cfg["count"]
    samples = FT.sample(patch, cfg["strategy"], count, cfg["seed"], require_curved=False)
    if names:
        names = [n.strip() for n in names.split(",")]
        unknown = set(names) - set(IDENTITIES)
        if unknown:
            raise ConfigurationError(f"unknown identities {sorted(unknown)}; known: {sorted(IDENTITIES)}")
    order = max(cfg["order"], 4)  # the K and H fields need fourth-order jets
    reports, rows = check_identities(patch, samples, names, order)
    ok = all(r.passed for r in reports)
    failed = [r.name for r in reports if not r.passed]
    out = {"surface": patch.name, "params": patch.params, "count": len(samples), "order": order,
           "passed": ok, "identities": [r.to_dict() for r in reports]}
    worst = max(r.max_relative for r in reports)
    summary = f"{patch.name}: {len(reports)} identities on {len(samples)} points, worst relative {worst:.2e}"
    summary += "" if ok else f", failed: {', '.join(failed)}"
    return out, rows, EXIT_OK if ok else EXIT_FAIL, summary


def cmd_detect(cfg, position=False):
    patch = _patch(cfg)
    form = normalize_form(cfg["form"])
    if position:
        samples = FT.sample(patch, cfg["strategy"], cfg["count"], cfg["seed"], require_curved=form != "I")
        fit = FT.fit_position_affine(form, patch, samples, order=cfg["order"], tau_pass=cfg["tau_pass"],
                                     tau_fail=cfg["tau_fail"])
        out = {"surface": patch.name, "params": patch.params, "form": form, "relation": "Delta x = A x + B",
               **fit.to_dict()}
        rows = [{"u": float(u), "v": float(v), "residual": float(r)} for (u, v), r in zip(samples.points, fit.residuals)]
        verdict = fit.verdict
    else:
        report = FT.classify(patch, form, strategy=cfg["strategy"], count=cfg["count"], seed=cfg["seed"],
                             order=cfg["order"], tau_pass=cfg["tau_pass"], tau_fail=cfg["tau_fail"])
        rows = report.pop("rows")
        report.pop("fit")
        out = {"relation": "Delta n = Lambda n", **report}
        verdict = report["verdict"]
    summary = f"{patch.name} form {form}: {verdict} (residual {out['residual_max_rel']:.3e})"
    if out.get("verdict_discrepancy"):
        summary += f"; expected {out['expected_verdict']} from the classification result"
    return out, rows, VERDICT_EXIT[verdict], summary


def _grid(domain, n, margin=0.05):
    (u0, u1), (v0, v1) = domain
    du, dv = (u1 - u0) * margin, (v1 - v0) * margin
    us = np.linspace(u0 + du, u1 - du, n)
    vs = np.linspace(v0 + dv, v1 - dv, n)
    return [(float(u), float(v)) for u in us for v in vs]


def cmd_xval(cfg):
    patch = _patch(cfg)
    pipeline = cfg["pipeline"]
    if pipeline is None:
        raise ConfigurationError("--pipeline is required")
    n = cfg["grid"] or 10
    order = max(cfg["order"], 4)
    p = patch.params
    if pipeline == "ruled":
        if patch.curves is None:
            raise ConfigurationError(f"{patch.name} is not a ruled surface")
        points = [pt for pt in _grid(patch.domain, n) if patch.admissible(*pt)]
        report = CF.ruled_pipeline(patch.curves, points, order=order)
    elif pipeline == "quadric1":
        if patch.name != "quadric1":
            raise ConfigurationError("pipeline quadric1 needs --surface quadric1")
        points = [pt for pt in _grid(patch.domain, n) if patch.admissible(*pt)]
        report = CF.quadric1_pipeline(p["a"], p["b"], p["c"], points, order=order)
    else:
        if patch.name != "quadric2":
            raise ConfigurationError("pipeline quadric2 needs --surface quadric2")
        points = _grid(patch.domain, n, margin=0.0)
        report = CF.quadric2_pipeline(p["a"], p["b"], points, order=order)
    out = report.to_dict()
    rows = [{"quantity": k, **{kk: vv for kk, vv in q.items() if not isinstance(vv, dict)}}
            for k, q in out["quantities"].items()]
    failed = [k for k, q in out["quantities"].items() if not q["passed"]]
    summary = f"{pipeline} on {patch.name}: sign {report.sign:+d}, " + (
        "all quantities agree" if not failed else f"mismatch in {', '.join(failed)}")
    return out, rows, EXIT_OK if not failed else EXIT_FAIL, summary


def _clean(obj):
    """JSON-safe copy: arrays to lists, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dump_report(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, sort_keys=True, allow_nan=False)


def write_artifacts(command: str, cfg: dict, rows: list[dict]) -> dict:
    out_dir = Path(cfg["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    # named by a digest of the resolved config so reruns overwrite rather than accumulate
    digest = hashlib.sha256(dump_report(cfg).encode()).hexdigest()[:12]
    base = f"{command}-{cfg.get('surface') or 'all'}-{digest}"
    paths = {}
    if rows and cfg["format"] in ("csv", "both"):
        csv_path = out_dir / f"{base}.csv"
        fields = list(dict.fromkeys(k for row in rows for k in row))
        with open(csv_path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields)
            writer.writeheader()
            for row in rows:
                writer.writerow(_clean(row))
        paths["samples"] = str(csv_path)
    if cfg["format"] in ("json", "both"):
        paths["report"] = str(out_dir / f"{base}.json")
    return paths


def run_command(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        command = args.command
        if command == "catalog":
            result, rows, code, summary = cmd_catalog(cfg)
        elif command == "forms":
            result, rows, code, summary = cmd_forms(cfg)
        elif command == "laplacian":
            result, rows, code, summary = cmd_laplacian(cfg, args.verify)
        elif command == "identities":
            result, rows, code, summary = cmd_identities(cfg, args.names)
        elif command == "detect":
            result, rows, code, summary = cmd_detect(cfg, args.position)
        else:
            result, rows, code, summary = cmd_xval(cfg)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "UsageError", str(exc))
    except (ConfigurationError, ConstructionError) as exc:
        return _fail(EXIT_USAGE, type(exc).__name__, str(exc))
    except (NumericError, CurvelabError) as exc:
        return _fail(EXIT_NUMERIC, type(exc).__name__, str(exc))

    stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    report = {
        "schema": SCHEMA,
        "version": __version__,
        "command": command,
        "config": {k: v for k, v in cfg.items()},
        "timestamp": stamp,
        "exit_code": code,
        "result": result,
    }
    if command != "catalog":
        paths = write_artifacts(command, cfg, rows)
        report["artifacts"] = {k: Path(v).name for k, v in paths.items()}
        if "samples" in paths:
            report["samples"] = paths["samples"]
        text = dump_report(report)
        if "report" in paths:
            Path(paths["report"]).write_text(text + "\n")
    else:
        text = dump_report(report)
    print(text)
    print(summary, file=sys.stderr)
    return code


def _fail(code: int, kind: str, message: str) -> int:
    print(json.dumps({"error": kind, "message": message, "exit_code": code}), file=sys.stderr)
    return code


def main(argv=None) -> None:
    sys.exit(run_command(argv))


if __name__ == "__main__":
    main()
