"""Batch front-end: grid evaluation, verification suites, PD scans.

Subcommands:

    eval     evaluate metric/tensor components over a parameter grid and
             write one row per (point, method)
    verify   run the kernel-identity suite (always) and, when a grid is
             given, the closed-vs-direct consistency suite; JSON report
    scan-pd  evaluate direct-method Fisher matrices over a grid and flag
             positive definiteness per point

Configuration precedence: command-line flags override config-file values,
which override defaults.  The config file is a flat `key = value` text
document mirroring the flag names (e.g. `family = heat`).  All numeric
output is serialized with 17 significant digits so every value round-trips
exactly to binary64; identical config + seed produces byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from .field import ParamPoint, field_derivs, log_derivs
from .geometry import (
    METRIC_COMPONENTS,
    TENSOR_COMPONENTS,
    FisherMatrix,
    FormulaMode,
    StructureTensor,
    fisher_closed,
    fisher_direct,
    pd_check,
    structure_closed,
    structure_direct,
)
from .kernels import DomainError, Family
from .quadrature import default_config
from .sources import InvalidSourceError, parse_source, source_descriptor
from .verify import GridSpec, run_consistency_suite, run_identity_suite

__all__ = ["RunConfig", "cmd_eval", "cmd_verify", "cmd_scan_pd", "main"]

EXIT_OK = 0
EXIT_SUITE_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_FAILURE = 3

EVAL_HEADER = ("family", "p1", "p2", "method", "g11", "g12", "g22",
               "t111", "t112", "t122", "t222", "err_estimate", "pd_flag", "status")
SCAN_HEADER = ("family", "p1", "p2", "g11", "g12", "g22",
               "eig1", "eig2", "pd_flag", "status")

_DEFAULTS = {
    "family": None,
    "source": "improper-uniform",
    "grid": None,
    "method": "both",
    "mode": "printed",
    "quantity": "both",
    "abs_tol": 1e-10,
    "rel_tol": 1e-9,
    "seed": 42,
    "n_points": 100,
    "out": None,
    "format": "csv",
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    family: str
    source: str
    grid: str | None
    method: str
    mode: str
    quantity: str
    abs_tol: float
    rel_tol: float
    seed: int
    n_points: int
    out: str | None
    format: str

    def as_dict(self) -> dict:
        return {
            "family": self.family, "source": self.source, "grid": self.grid,
            "method": self.method, "mode": self.mode, "quantity": self.quantity,
            "abs_tol": self.abs_tol, "rel_tol": self.rel_tol, "seed": self.seed,
            "n_points": self.n_points, "out": self.out, "format": self.format,
        }


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _load_config_file(path: str) -> dict:
    values: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                key, _, val = line.partition("=")
                values[key.strip().replace("-", "_")] = val.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}")
    unknown = set(values) - set(_DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return values


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    merged = dict(_DEFAULTS)
    if args.config:
        merged.update(_load_config_file(args.config))
    for key in _DEFAULTS:
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            merged[key] = flag_val
    try:
        merged["abs_tol"] = float(merged["abs_tol"])
        merged["rel_tol"] = float(merged["rel_tol"])
        merged["seed"] = int(merged["seed"])
        merged["n_points"] = int(merged["n_points"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad numeric config value: {exc}")
    if merged["family"] not in ("heat", "laplace"):
        raise ConfigError("family must be 'heat' or 'laplace'")
    for key, allowed in (("method", ("closed", "direct", "both")),
                         ("mode", ("printed", "corrected")),
                         ("quantity", ("metric", "tensor", "both")),
                         ("format", ("csv", "json"))):
        if merged[key] not in allowed:
            raise ConfigError(f"{key} must be one of {'|'.join(allowed)}")
    return RunConfig(**merged)


def _parse_grid(text: str) -> GridSpec:
    """`p1=lo:hi:count,p2=lo:hi:count`."""
    axes: dict[str, tuple[float, float, int]] = {}
    for part in text.split(","):
        name, eq, body = part.partition("=")
        name = name.strip()
        if not eq or name not in ("p1", "p2"):
            raise ConfigError(f"bad grid axis {part!r}: expected p1=lo:hi:count")
        pieces = body.split(":")
        if len(pieces) != 3:
            raise ConfigError(f"bad grid axis {part!r}: expected lo:hi:count")
        try:
            axes[name] = (float(pieces[0]), float(pieces[1]), int(pieces[2]))
        except ValueError as exc:
            raise ConfigError(f"bad grid axis {part!r}: {exc}")
    if set(axes) != {"p1", "p2"}:
        raise ConfigError("grid must define both p1 and p2")
    try:
        return GridSpec(p1=axes["p1"], p2=axes["p2"])
    except ValueError as exc:
        raise ConfigError(f"bad grid: {exc}")


def _require_grid(cfg: RunConfig) -> GridSpec:
    if not cfg.grid:
        raise ConfigError("grid is required for this command")
    return _parse_grid(cfg.grid)


def _grid_points(grid: GridSpec, family: Family) -> list[ParamPoint]:
    try:
        return grid.points(family)
    except DomainError as exc:
        raise ConfigError(f"grid outside family domain: {exc}")


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _csv_text(header: tuple[str, ...], rows: list[dict]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(col)) for col in header))
    return "\n".join(lines) + "\n"


def _json_text(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _report_to_json(rep) -> dict:
    return {
        "suite": rep.suite,
        "id": rep.report_id,
        "label": rep.label,
        "n_points": rep.n_points,
        "max_abs_residual": rep.max_abs,
        "max_rel_residual": rep.max_rel,
        "argmax": list(rep.argmax),
        "tol": rep.tol,
        "passed": rep.passed,
        "expected_to_hold": rep.expected_to_hold,
        "known_discrepancy": rep.known_discrepancy,
        "n_failures": rep.n_failures,
    }


def cmd_eval(cfg: RunConfig) -> int:
    family = Family(cfg.family)
    source = parse_source(cfg.source)
    grid = _require_grid(cfg)
    points = _grid_points(grid, family)
    mode = FormulaMode(cfg.mode)
    methods = ("closed", "direct") if cfg.method == "both" else (cfg.method,)
    want_metric = cfg.quantity in ("metric", "both")
    want_tensor = cfg.quantity in ("tensor", "both")

    rows = []
    failed = 0
    for theta in points:
        qcfg = default_config(family, source, theta,
                              abs_tol=cfg.abs_tol, rel_tol=cfg.rel_tol)
        for method in methods:
            row = {"family": cfg.family, "p1": theta.p1, "p2": theta.p2,
                   "method": method, "status": "ok"}
            try:
                g = tens = None
                if method == "closed":
                    logbundle = log_derivs(field_derivs(source, theta, qcfg))
                    err = 0.0
                    if want_metric:
                        g = fisher_closed(logbundle, theta, mode)
                    if want_tensor:
                        tens = structure_closed(logbundle, theta, mode)
                else:
                    err = 0.0
                    if want_metric:
                        g, g_err = fisher_direct(source, theta, qcfg)
                        err = max(err, g_err)
                    if want_tensor:
                        tens, t_err = structure_direct(source, theta, qcfg)
                        err = max(err, t_err)
                if g is not None:
                    for name in METRIC_COMPONENTS:
                        row[name] = g.component(name)
                    row["pd_flag"] = pd_check(g)[0]
                if tens is not None:
                    for name in TENSOR_COMPONENTS:
                        row[name] = tens.component(name)
                row["err_estimate"] = err
            except Exception as exc:
                row["status"] = f"error:{type(exc).__name__}"
                failed += 1
                print(f"eval failure at ({theta.p1:g}, {theta.p2:g}) "
                      f"[{method}]: {exc}", file=sys.stderr)
            rows.append(row)

    if cfg.format == "csv":
        _write(cfg.out, _csv_text(EVAL_HEADER, rows))
    else:
        _write(cfg.out, _json_text({
            "config": cfg.as_dict(),
            "rows": rows,
            "summary": {"n_rows": len(rows), "n_failed": failed},
        }))
    return EXIT_NUMERICAL_FAILURE if failed else EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    family = Family(cfg.family)
    mode = FormulaMode(cfg.mode)
    reports = run_identity_suite(family, mode, cfg.n_points, cfg.seed)
    if cfg.grid:
        source = parse_source(cfg.source)
        grid = _require_grid(cfg)
        _grid_points(grid, family)  # domain check up front
        theta0 = grid.points(family)[0]
        qcfg = default_config(family, source, theta0,
                              abs_tol=cfg.abs_tol, rel_tol=cfg.rel_tol)
        reports.extend(run_consistency_suite(source, family, grid, qcfg, mode))

    unexpected = [r for r in reports if r.expected_to_hold and not r.passed]
    known = [r for r in reports if r.known_discrepancy]
    payload = {
        "config": cfg.as_dict(),
        "reports": [_report_to_json(r) for r in reports],
        "summary": {
            "n_reports": len(reports),
            "n_passed": sum(r.passed for r in reports),
            "n_known_discrepancies": len(known),
            "n_unexpected_failures": len(unexpected),
        },
    }
    _write(cfg.out, _json_text(payload))
    return EXIT_SUITE_FAILURE if unexpected else EXIT_OK


def cmd_scan_pd(cfg: RunConfig) -> int:
    family = Family(cfg.family)
    source = parse_source(cfg.source)
    grid = _require_grid(cfg)
    points = _grid_points(grid, family)

    rows = []
    failed = 0
    non_pd = 0
    for theta in points:
        qcfg = default_config(family, source, theta,
                              abs_tol=cfg.abs_tol, rel_tol=cfg.rel_tol)
        row = {"family": cfg.family, "p1": theta.p1, "p2": theta.p2, "status": "ok"}
        try:
            g, _ = fisher_direct(source, theta, qcfg)
            is_pd, (lo, hi) = pd_check(g)
            row.update({"g11": g.g11, "g12": g.g12, "g22": g.g22,
                        "eig1": lo, "eig2": hi, "pd_flag": is_pd})
            non_pd += 0 if is_pd else 1
        except Exception as exc:
            row["status"] = f"error:{type(exc).__name__}"
            failed += 1
            print(f"scan-pd failure at ({theta.p1:g}, {theta.p2:g}): {exc}",
                  file=sys.stderr)
        rows.append(row)

    summary = {"points": len(rows), "non_pd_points": non_pd, "failed_points": failed}
    if cfg.format == "csv":
        _write(cfg.out, _csv_text(SCAN_HEADER, rows))
    else:
        _write(cfg.out, _json_text({"config": cfg.as_dict(), "rows": rows,
                                    "summary": summary}))
    print(f"scan-pd: {non_pd} non-PD of {summary['points']} points", file=sys.stdout)
    return EXIT_NUMERICAL_FAILURE if failed else EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdefisher",
        description="Fisher matrix / structure tensor evaluation and "
                    "verification for heat- and Poisson-kernel mixture families.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--family", choices=("heat", "laplace"))
    common.add_argument("--source", help="source descriptor, e.g. gaussian:mu=0,sigma=1")
    common.add_argument("--grid", help="p1=lo:hi:count,p2=lo:hi:count")
    common.add_argument("--method", choices=("closed", "direct", "both"))
    common.add_argument("--mode", choices=("printed", "corrected"))
    common.add_argument("--quantity", choices=("metric", "tensor", "both"))
    common.add_argument("--abs-tol", dest="abs_tol", type=float)
    common.add_argument("--rel-tol", dest="rel_tol", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--n-points", dest="n_points", type=int,
                        help="sample count for the identity suite")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--config", help="flat key=value config file")
    sub.add_parser("eval", parents=[common],
                   help="evaluate metric/tensor over a grid")
    sub.add_parser("verify", parents=[common],
                   help="run identity and consistency residual suites")
    sub.add_parser("scan-pd", parents=[common],
                   help="scan direct Fisher matrices for positive definiteness")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {"eval": cmd_eval, "verify": cmd_verify, "scan-pd": cmd_scan_pd}[args.command]
    try:
        cfg = _resolve_config(args)
        return handler(cfg)
    except (ConfigError, InvalidSourceError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
