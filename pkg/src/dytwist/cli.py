"""Command-line front end: ``dytwist {eval,check,scan,product,limits}``.

Exit codes: 0 everything passed, 1 some identity failed, 2 usage or
configuration error (including a pole hit by ``eval``).
"""

import argparse
import csv
import io
import json
import math
import re
import sys
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import __version__
from .errors import DytwistError, PoleProximity, QuadratureFailure
from .products import closed_logs, rho_F_product, twist_F_product
from .rmat import ID4, DeformationParams, RKind, normalization, r_matrix, sup_norm
from .verify import (
    KNOWN_IDENTITIES,
    SampleSpec,
    check_difference_equation,
    check_gauge_f,
    check_gauge_v8,
    check_rho_factorization,
    check_twist_relation,
    check_unitarity,
    check_ybe,
    degeneration_study,
    expand_identities,
    fit_order,
    run_suite,
)

COMMANDS = ("eval", "check", "scan", "product", "limits")
FORMATS = ("json", "csv", "pretty")
SCAN_BETA3 = -0.7
DEGENERATION_IDS = ("deg:v6", "deg:f")
PRODUCT_TOL = 1e-3
ORDER_TARGET = 1.0
ORDER_TOL = 0.2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Parsing helpers

_TERM = re.compile(r"([+-]?)((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\*?([ij])?(pi)?")


def parse_complex(text):
    """Parse ``a+bi`` literals; ``ipi`` stands for ``i*pi`` (``-ipi``, ``2ipi``, ``0.5+ipi``)."""
    if isinstance(text, (int, float, complex)):
        return complex(text)
    s = str(text).replace(" ", "")
    if not s:
        raise UsageError("empty complex literal")
    pos, total = 0, 0j
    while pos < len(s):
        m = _TERM.match(s, pos)
        sign, num, imag, pi = m.groups()
        if m.end() == pos or not (num or imag or pi) or (pos and not sign):
            raise UsageError(f"cannot parse complex number {text!r}")
        value = float(num) if num else 1.0
        if pi:
            value *= math.pi
        term = 1j * value if imag else complex(value)
        total += -term if sign == "-" else term
        pos = m.end()
    return total


def parse_grid(text):
    """``start:stop:steps`` (linear), a comma list, or a single number."""
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    text = str(text)
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"grid must be start:stop:steps, got {text!r}")
        start, stop, steps = float(parts[0]), float(parts[1]), int(parts[2])
        if steps < 1:
            raise UsageError("grid needs at least one step")
        return [float(v) for v in np.linspace(start, stop, steps)]
    try:
        return [float(v) for v in text.split(",") if v]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def parse_ladder(text):
    """``start:stop`` doubling ladder, or an explicit comma list."""
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    text = str(text)
    if ":" in text and text.count(":") == 1:
        start, stop = (float(v) for v in text.split(":"))
        if start <= 0:
            raise UsageError("ladder must start above zero")
        rungs = []
        r = start
        while r <= stop * (1 + 1e-12):
            rungs.append(r)
            r *= 2
        return rungs
    return parse_grid(text)


def parse_tolerances(text):
    if not text:
        return {}
    if isinstance(text, dict):
        return {str(k): float(v) for k, v in text.items()}
    out = {}
    for item in str(text).split(","):
        if not item:
            continue
        key, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"tolerance override must be identity=value, got {item!r}")
        out[key.strip()] = float(val)
    return out


# ---------------------------------------------------------------------------
# Configuration


@dataclass
class RunConfig:
    command: str
    kind: str | None = None
    beta: complex | None = None
    r: float | None = None
    r_grid: list | None = None
    unnormalized: bool = False
    suite: list = field(default_factory=lambda: ["all"])
    identity: str | None = None
    seed: int = 1
    count: int | None = None
    N: list | None = None
    target: str = "rhoF"
    beta_re: list | None = None
    beta_im: list | None = None
    ladder: list | None = None
    tolerances: dict = field(default_factory=dict)
    output_path: str | None = None
    format: str = "json"

    def sample_spec(self):
        if self.count is None:
            raise UsageError("--count is required")
        try:
            return SampleSpec(count=self.count, seed=self.seed)
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    def params(self, r=None):
        r = self.r if r is None else r
        try:
            return DeformationParams(r=5.0 if r is None else float(r))
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    def echo(self):
        d = asdict(self)
        if self.beta is not None:
            d["beta"] = [self.beta.real, self.beta.imag]
        return d


def _build_config(args):
    data = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        unknown = set(data) - {f.name for f in fields(RunConfig)}
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
    data["command"] = args.command
    cli = {
        "kind": args.kind,
        "beta": args.beta,
        "identity": getattr(args, "identity", None),
        "seed": args.seed,
        "count": args.count,
        "target": getattr(args, "target", None),
        "output_path": args.out,
        "format": args.format,
    }
    for key, value in cli.items():
        if value is not None:
            data[key] = value
    if args.unnormalized:
        data["unnormalized"] = True
    if args.suite is not None:
        data["suite"] = args.suite
    if args.r is not None:
        data["r"] = args.r
    if args.N is not None:
        data["N"] = args.N
    if getattr(args, "beta_re", None) is not None:
        data["beta_re"] = args.beta_re
    if getattr(args, "beta_im", None) is not None:
        data["beta_im"] = args.beta_im
    if getattr(args, "ladder", None) is not None:
        data["ladder"] = args.ladder
    if args.tol is not None:
        data["tolerances"] = {**parse_tolerances(data.get("tolerances")), **parse_tolerances(args.tol)}

    # normalise types
    if data.get("beta") is not None:
        data["beta"] = parse_complex(data["beta"])
    if isinstance(data.get("suite"), str):
        data["suite"] = [s for s in data["suite"].split(",") if s]
    if data.get("r") is not None:
        grid = parse_grid(data["r"])
        data["r"] = grid[0]
        data["r_grid"] = grid
    if data.get("N") is not None:
        ns = data["N"] if isinstance(data["N"], list) else str(data["N"]).split(",")
        try:
            data["N"] = [int(float(n)) for n in ns]
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    for key in ("beta_re", "beta_im"):
        if data.get(key) is not None:
            data[key] = parse_grid(data[key])
    if data.get("ladder") is not None:
        data["ladder"] = parse_ladder(data["ladder"])
    data["tolerances"] = parse_tolerances(data.get("tolerances"))
    if data.get("format", "json") not in FORMATS:
        raise UsageError(f"unknown format {data['format']!r}")
    return RunConfig(**data)


# ---------------------------------------------------------------------------
# Output


def _fmt(v):
    return format(v, ".17g")


def canonical_json(obj):
    """JSON with sorted keys and every float written with 17 significant digits."""
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}: {canonical_json(v)}" for k, v in sorted(obj.items()))
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(canonical_json(v) for v in obj) + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return _fmt(v) if math.isfinite(v) else "null"
    if isinstance(obj, (complex, np.complexfloating)):
        return canonical_json([complex(obj).real, complex(obj).imag])
    if isinstance(obj, np.ndarray):
        return canonical_json(obj.tolist())
    return json.dumps(str(obj))


def matrix_dump(m):
    return [[[complex(v).real, complex(v).imag] for v in row] for row in np.asarray(m)]


@dataclass
class Report:
    config: RunConfig
    results: list
    extra: dict = field(default_factory=dict)
    wall_time: float = 0.0
    exit_code: int = 0

    def summary(self):
        counts = {"pass": 0, "fail": 0, "skip": 0}
        for row in self.results:
            counts[row["status"]] += 1
        return counts

    def to_dict(self):
        d = {
            "tool_version": __version__,
            "config_echo": self.config.echo(),
            "results": self.results,
            "summary": self.summary(),
            "wall_time": self.wall_time,
        }
        d.update(self.extra)
        return d

    def render(self, fmt):
        if fmt == "json":
            return canonical_json(self.to_dict()) + "\n"
        if fmt == "csv":
            return _render_csv(self.results)
        return _render_pretty(self)


CSV_COLUMNS = ("beta_re", "beta_im", "r", "identity", "residual", "skipped")


def _render_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if rows and all(set(CSV_COLUMNS) <= set(row) for row in rows):
        cols = CSV_COLUMNS
    else:
        cols = sorted({k for row in rows for k in row if not isinstance(row[k], (dict, list))})
    writer.writerow(cols)
    for row in rows:
        out = []
        for c in cols:
            v = row.get(c)
            if isinstance(v, float):
                out.append(_fmt(v) if math.isfinite(v) else "")
            elif isinstance(v, bool):
                out.append("1" if v else "0")
            else:
                out.append("" if v is None else str(v))
        writer.writerow(out)
    return buf.getvalue()


def _render_pretty(report):
    lines = [f"dytwist {__version__}  command={report.config.command}"]
    for row in report.results:
        head = row.get("identity_id") or row.get("identity") or row.get("kind")
        if head is None:
            head = f"N={row['N']}" if "N" in row else f"r={row.get('r', '')}"
        res = row.get("residual")
        res_s = "-" if res is None else f"{res:.3e}"
        lines.append(f"  {row['status']:4s}  {head:22s} residual={res_s}")
    for key, val in sorted(report.extra.items()):
        lines.append(f"  {key}: {canonical_json(val)}")
    s = report.summary()
    lines.append(f"pass={s['pass']} fail={s['fail']} skip={s['skip']}  ({report.wall_time:.2f}s)")
    return "\n".join(lines) + "\n"


def _row_from_check(res):
    return res.to_dict()


def _exit_for(results):
    return 1 if any(row["status"] == "fail" for row in results) else 0


# ---------------------------------------------------------------------------
# Commands


def cmd_eval(cfg):
    if cfg.kind is None or cfg.beta is None:
        raise UsageError("eval needs --kind and --beta")
    try:
        kind = RKind.parse(cfg.kind)
    except ValueError:
        raise UsageError(f"unknown kind {cfg.kind!r}") from None
    if kind is not RKind.DY and cfg.r is None:
        raise UsageError("eval needs --r for deformed kinds")
    p = cfg.params()
    base = {"kind": kind.value, "beta": cfg.beta, "r": p.r, "normalized": not cfg.unnormalized}
    diagnostics = []
    try:
        m = r_matrix(kind, cfg.beta, p, normalized=False)
        try:
            scalar = normalization(kind, cfg.beta, p)
        except (PoleProximity, QuadratureFailure) as exc:
            if not cfg.unnormalized:
                raise
            # the bare matrix is still meaningful where the scalar is singular
            scalar = None
            diagnostics.append(f"normalization: {type(exc).__name__}: {exc}")
    except (PoleProximity, QuadratureFailure) as exc:
        row = {**base, "status": "fail", "error": f"{type(exc).__name__}: {exc}"}
        return Report(cfg, [row], exit_code=2)
    if not cfg.unnormalized:
        m = scalar * m
    row = {**base, "status": "pass", "matrix": matrix_dump(m), "normalization": scalar,
           "diagnostics": diagnostics}
    return Report(cfg, [row])


def cmd_check(cfg):
    spec = cfg.sample_spec()
    try:
        idents = expand_identities(cfg.suite)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _validate_tolerances(cfg.tolerances)
    results = run_suite(spec, idents, cfg.tolerances)
    rows = [_row_from_check(r) for r in results]
    return Report(cfg, rows, exit_code=_exit_for(rows))


def _validate_tolerances(tols, extra=()):
    allowed = set(KNOWN_IDENTITIES) | {"ybe", "sf", "unitarity"} | set(extra)
    for key in tols:
        if key not in allowed:
            raise UsageError(f"unknown tolerance key {key!r}")


def _scan_point(identity, beta, p, tol):
    if identity.startswith("ybe:"):
        return check_ybe(identity[4:], beta, 0.0, SCAN_BETA3, p, tolerance=tol)
    if identity == "twist":
        return check_twist_relation(beta, 0.0, p, tolerance=tol)
    if identity == "difference":
        return check_difference_equation(beta, p, tolerance=tol)
    if identity == "difference2":
        return check_difference_equation(beta, p, tolerance=tol, iterations=2)
    if identity == "gauge_v8":
        return check_gauge_v8(beta, p, tolerance=tol)
    if identity == "gauge_f":
        return check_gauge_f(beta, 0.0, p, tolerance=tol)
    if identity == "rho_factorization":
        return check_rho_factorization(beta, p, tolerance=tol)
    if identity.startswith("unitarity:"):
        return check_unitarity(identity[10:], beta, p, tolerance=tol)
    if identity.startswith("unitarity_m:"):
        return check_unitarity(identity[12:], beta, p, tolerance=tol, normalized=False)
    raise UsageError(f"identity {identity!r} cannot be scanned")


def cmd_scan(cfg):
    if cfg.identity is None:
        raise UsageError("scan needs --identity")
    if cfg.beta_re is None and cfg.beta is None:
        raise UsageError("scan needs --beta-re (or --beta)")
    ident = cfg.identity
    if ident not in KNOWN_IDENTITIES and ident not in DEGENERATION_IDS:
        raise UsageError(f"unknown identity {ident!r}")
    res_grid = cfg.beta_re if cfg.beta_re is not None else [cfg.beta.real]
    ims_grid = cfg.beta_im if cfg.beta_im is not None else [cfg.beta.imag if cfg.beta is not None else 0.0]
    rs = cfg.r_grid if cfg.r_grid is not None else [5.0]
    tol = cfg.tolerances.get(ident)
    rows = []
    for r in rs:
        p = cfg.params(r)
        for re_ in res_grid:
            for im_ in ims_grid:
                beta = complex(re_, im_)
                row = {"beta_re": re_, "beta_im": im_, "r": p.r, "identity": ident}
                try:
                    if ident in DEGENERATION_IDS:
                        dev = degeneration_study(beta, [p.r])[0]
                        value = dev["RV6_minus_RDY"] if ident == "deg:v6" else dev["F_minus_id"]
                        row.update(residual=value, skipped=False, status="pass", tolerance=None)
                    else:
                        res = _scan_point(ident, beta, p, tol)
                        row.update(residual=res.residual, skipped=False, status=res.status,
                                   tolerance=res.tolerance)
                except (PoleProximity, QuadratureFailure) as exc:
                    row.update(residual=None, skipped=True, status="skip", tolerance=tol,
                               diagnostics=[f"{type(exc).__name__}: {exc}"])
                rows.append(row)
    return Report(cfg, rows, exit_code=_exit_for(rows))


def cmd_product(cfg):
    if not cfg.N:
        raise UsageError("product needs --N")
    if cfg.beta is None:
        raise UsageError("product needs --beta")
    if cfg.target not in ("rhoF", "F"):
        raise UsageError("--target must be rhoF or F")
    if any(n < 2 for n in cfg.N):
        raise UsageError("every N must be >= 2")
    p = cfg.params()
    tol = cfg.tolerances.get("product", PRODUCT_TOL)
    closed = closed_logs(cfg.beta, p)
    k = 1 if cfg.target == "rhoF" else 3
    closed_vals = np.exp(closed[:k])
    rows = []
    for n in cfg.N:
        run = (rho_F_product if cfg.target == "rhoF" else twist_F_product)(cfg.beta, p, n)
        vals = np.exp(run.extrapolated)
        err = float(np.max(np.abs(vals - closed_vals)))
        partial = run.partial_value
        dev_id = abs(partial - 1) if k == 1 else sup_norm(partial - ID4)
        rows.append({
            "N": n,
            "target": cfg.target,
            "labels": list(run.labels),
            "partial_log": list(run.partial_log),
            "extrapolated_log": list(run.extrapolated),
            "closed_log": list(closed[:k]),
            "divergence_slope": list(run.divergence_slope),
            "partial_minus_identity": dev_id,
            "residual": err,
            "tolerance": tol,
            "status": "pass" if err <= tol else "fail",
        })
    # only the finest truncation is held to the tolerance
    for row in rows[:-1]:
        row["status"] = "pass"
    return Report(cfg, rows, exit_code=_exit_for(rows))


def cmd_limits(cfg):
    if not cfg.ladder or len(cfg.ladder) < 2:
        raise UsageError("limits needs a ladder with at least two rungs")
    beta = cfg.beta if cfg.beta is not None else 1.0 + 0j
    tol = cfg.tolerances.get("order", ORDER_TOL)
    try:
        rows = degeneration_study(beta, cfg.ladder)
    except (PoleProximity, QuadratureFailure) as exc:
        row = {"status": "skip", "beta": beta, "diagnostics": [f"{type(exc).__name__}: {exc}"]}
        return Report(cfg, [row], extra={"fit": {}})
    fit = {}
    for col in ("F_minus_id", "RV6_minus_RDY"):
        order = fit_order(cfg.ladder, [row[col] for row in rows])
        fit[col] = {"order": order, "target": ORDER_TARGET, "tolerance": tol,
                    "status": "pass" if abs(order - ORDER_TARGET) <= tol else "fail"}
    for row in rows:
        row["status"] = "pass"
    out = rows + [
        {"identity": f"order:{col}", "residual": abs(v["order"] - ORDER_TARGET), "tolerance": tol,
         "status": v["status"], "order": v["order"]}
        for col, v in fit.items()
    ]
    return Report(cfg, out, extra={"fit": fit}, exit_code=_exit_for(out))


HANDLERS = {
    "eval": cmd_eval,
    "check": cmd_check,
    "scan": cmd_scan,
    "product": cmd_product,
    "limits": cmd_limits,
}


# ---------------------------------------------------------------------------
# Entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    parser = _Parser(prog="dytwist", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--kind", choices=[k.value for k in RKind])
        sp.add_argument("--beta", help="complex rapidity, e.g. 1+0.3i or -ipi")
        sp.add_argument("--r", help="deformation scale (scan: list or start:stop:steps)")
        sp.add_argument("--unnormalized", action="store_true")
        sp.add_argument("--suite", help="comma-separated identity ids, or 'all'")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--count", type=int)
        sp.add_argument("--N", help="comma-separated truncation orders")
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--format", choices=FORMATS)
        sp.add_argument("--tol", help="tolerance overrides identity=value,...")
        sp.add_argument("--config", help="JSON file mirroring the run configuration")
        if name == "scan":
            sp.add_argument("--identity")
            sp.add_argument("--beta-re", dest="beta_re", help="start:stop:steps")
            sp.add_argument("--beta-im", dest="beta_im", help="start:stop:steps")
        if name == "product":
            sp.add_argument("--target", choices=("rhoF", "F"))
        if name == "limits":
            sp.add_argument("--ladder", help="start:stop doubling ladder or list")
    return parser


_VALUE_FLAGS = ("--beta", "--beta-re", "--beta-im", "--r", "--N", "--ladder")


def _glue_negative_values(argv):
    """Join ``--beta -ipi`` into ``--beta=-ipi`` so argparse does not read a flag."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and not nxt.startswith("--"):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
        else:
            out.append(tok)
    return out


def run(argv=None):
    """Parse ``argv`` and execute; returns ``(report_or_None, exit_code, text)``."""
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(_glue_negative_values(argv))
        cfg = _build_config(args)
        if args.command == "scan" and args.format is None and "format" not in _config_keys(args):
            cfg.format = "csv"
        start = time.perf_counter()
        report = HANDLERS[cfg.command](cfg)
        report.wall_time = time.perf_counter() - start
    except UsageError as exc:
        return None, 2, f"dytwist: usage error: {exc}\n"
    except DytwistError as exc:
        return None, 2, f"dytwist: {type(exc).__name__}: {exc}\n"
    return report, report.exit_code, report.render(cfg.format)


def _config_keys(args):
    if not args.config:
        return set()
    with open(args.config, encoding="utf-8") as fh:
        return set(json.load(fh))


def main(argv=None):
    report, code, text = run(argv)
    if report is None:
        sys.stderr.write(text)
        return code
    path = report.config.output_path
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
