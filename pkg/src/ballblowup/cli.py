"""Command-line orchestration: config ingestion, sweeps with JSON-lines
persistence, verification reports, and the bubble-calculus suite.

Subcommands: greens, critical, qv, solve, sweep, verify, bubbletest, report.
Exit codes: 0 success / all-pass, 1 validation error, 2 numerical failure,
3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import asympt, bubble, greenfn, solver
from .numkit import quad_radial, richardson_fit

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_VERIFICATION = 3


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field '{field_name}': {message}")
        self.field_name = field_name


@dataclass
class RunConfig:
    """Validated run configuration.

    Radii are dimensionless; coefficients carry inverse-length-squared units
    consistent with the Laplacian.  The canonical JSON form is hashed for
    provenance and resume matching.
    """

    R: float = 1.0
    a: dict = field(default_factory=lambda: {"critical": True})
    V: dict = field(default_factory=lambda: {"constant": -1.0})
    eps_ladder: list = field(default_factory=lambda: [0.04, 0.02, 0.01, 0.005])
    tolerances: dict = field(
        default_factory=lambda: {
            "quad": 1e-10,
            "ode": 1e-12,
            "shoot": 1e-7,
            "series": 1e-12,
        }
    )
    lmax: int = 40
    probes: list = field(default_factory=lambda: [0.3, 0.5, 0.7, 0.9])

    @staticmethod
    def from_dict(d: dict) -> "RunConfig":
        cfg = RunConfig()
        known = set(cfg.__dataclass_fields__)
        for k in d:
            if k not in known:
                raise ConfigError(k, "unknown field")
        for k, v in d.items():
            setattr(cfg, k, v)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if not isinstance(self.R, (int, float)) or self.R <= 0:
            raise ConfigError("R", "must be a positive number")
        for name, spec in (("a", self.a), ("V", self.V)):
            if not isinstance(spec, dict):
                raise ConfigError(name, "must be an object")
            if not ({"constant", "critical", "table"} & spec.keys()):
                raise ConfigError(name, "need 'constant', 'critical' or 'table'")
        lad = self.eps_ladder
        if not lad or any(e <= 0 for e in lad):
            raise ConfigError("eps_ladder", "must be positive values")
        if any(b >= a for a, b in zip(lad, lad[1:])):
            raise ConfigError("eps_ladder", "must be strictly decreasing")
        if self.lmax < 1:
            raise ConfigError("lmax", "must be >= 1")
        for p in self.probes:
            if not 0 < p < self.R:
                raise ConfigError("probes", f"probe {p} outside (0, R)")

    def coefficient(self, name: str) -> greenfn.RadialCoefficient:
        spec = getattr(self, name)
        if spec.get("critical"):
            return greenfn.RadialCoefficient.constant_coeff(
                -math.pi**2 / (4 * self.R**2)
            )
        if "constant" in spec:
            return greenfn.RadialCoefficient.constant_coeff(float(spec["constant"]))
        table = spec["table"]
        return greenfn.RadialCoefficient(
            values=table["values"], abscissae=table["abscissae"]
        )

    def canonical_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    def hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]


def load_config(path: str | None, overrides: dict | None = None) -> RunConfig:
    if path is None:
        cfg = RunConfig()
    else:
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as e:
            raise ConfigError("<file>", f"invalid JSON at line {e.lineno}: {e.msg}")
        cfg = RunConfig.from_dict(raw)
    if overrides:
        for key, val in overrides.items():
            if key not in cfg.tolerances:
                raise ConfigError("tolerances", f"unknown tolerance key {key!r}")
            cfg.tolerances[key] = float(val)
    return cfg


def _problem(cfg: RunConfig, eps: float) -> solver.ProblemConfig:
    return solver.ProblemConfig(
        domain=greenfn.BallDomain(cfg.R),
        a=cfg.coefficient("a"),
        V=cfg.coefficient("V"),
        eps=eps,
        shoot_tol=cfg.tolerances["shoot"],
        ode_tol=cfg.tolerances["ode"],
    )


def _emit(obj, out: str | None):
    text = json.dumps(obj, indent=2, default=_json_default)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o)}")


# ----------------------------------------------------------------- commands


def cmd_greens(args) -> int:
    cfg = load_config(args.config, args.tol_override)
    a = cfg.coefficient("a")
    V = cfg.coefficient("V")
    a_star = greenfn.critical_a(cfg.R)
    cg = greenfn.ga_center(a, cfg.R)
    rhos = np.linspace(0.0, 0.9 * cfg.R, 19)
    if a.is_constant and a.constant < 0:
        profile = [
            {"rho": float(r), "phi_a": greenfn.phia_profile(float(r), a.constant, cfg.R)}
            for r in rhos
        ]
        crit = greenfn.na_scan(a.constant, cfg.R)
        crit_dict = asdict(crit)
    else:
        profile = [{"rho": 0.0, "phi_a": cg.phi_a_at_0}]
        crit_dict = None
    report = {
        "a_star": a_star,
        "phi_a_at_0": cg.phi_a_at_0,
        "qv": greenfn.qv_center(V, a, cfg.R),
        "profile": profile,
        "criticality": crit_dict,
        "config_hash": cfg.hash(),
        "tool_version": __version__,
    }
    _emit(report, args.out)
    return EXIT_OK


def cmd_critical(args) -> int:
    cfg = load_config(args.config, args.tol_override)
    _emit({"R": cfg.R, "a_star": greenfn.critical_a(cfg.R)}, args.out)
    return EXIT_OK


def cmd_qv(args) -> int:
    cfg = load_config(args.config, args.tol_override)
    val = greenfn.qv_center(cfg.coefficient("V"), cfg.coefficient("a"), cfg.R)
    _emit({"qv": val, "config_hash": cfg.hash()}, args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    cfg = load_config(args.config, args.tol_override)
    eps = args.eps if args.eps is not None else cfg.eps_ladder[0]
    pcfg = _problem(cfg, eps)
    rs = solver.solve_profile(pcfg)
    recs = asympt.records_from_sweep([rs], pcfg.a, cfg.R, tuple(cfg.probes))
    _emit(_record_line(recs[0], cfg), args.out)
    return EXIT_OK


def _record_line(rec: asympt.SweepRecord, cfg: RunConfig) -> dict:
    d = rec.to_dict()
    d["config_hash"] = cfg.hash()
    d["tool_version"] = __version__
    d["status"] = "ok"
    return d


def _solve_rung(payload):
    """Worker entry for parallel sweeps (bracket seeded by the scaling
    heuristic rather than continuation)."""
    cfg_dict, eps = payload
    cfg = RunConfig.from_dict(cfg_dict)
    pcfg = _problem(cfg, eps)
    rs = solver.solve_profile(pcfg)
    rec = asympt.records_from_sweep([rs], pcfg.a, cfg.R, tuple(cfg.probes))[0]
    return _record_line(rec, cfg)


def cmd_sweep(args) -> int:
    cfg = load_config(args.config, args.tol_override)
    out_path = Path(args.out) if args.out else Path("records.jsonl")
    done_eps = set()
    if out_path.exists() and args.resume:
        for line in out_path.read_text().splitlines():
            try:
                d = json.loads(line)
            except json.JSONDecodeError:
                continue
            if d.get("config_hash") == cfg.hash() and d.get("status") == "ok":
                done_eps.add(d["eps"])
    elif out_path.exists() and not args.resume:
        out_path.unlink()

    todo = [e for e in cfg.eps_ladder if e not in done_eps]
    failures = 0
    with out_path.open("a") as fh:
        if args.workers > 1:
            payloads = [(asdict(cfg), e) for e in todo]
            with ProcessPoolExecutor(max_workers=args.workers) as pool:
                for eps, res in zip(todo, pool.map(_solve_rung, payloads)):
                    fh.write(json.dumps(res, default=_json_default) + "\n")
        else:
            M_seed = None
            for eps in todo:
                try:
                    pcfg = _problem(cfg, eps)
                    rs = solver.solve_profile(pcfg, M_seed=M_seed)
                    M_seed = None  # reset; recomputed below
                    rec = asympt.records_from_sweep(
                        [rs], pcfg.a, cfg.R, tuple(cfg.probes)
                    )[0]
                    fh.write(
                        json.dumps(_record_line(rec, cfg), default=_json_default) + "\n"
                    )
                    idx = cfg.eps_ladder.index(eps)
                    if idx + 1 < len(cfg.eps_ladder):
                        M_seed = rs.M * math.sqrt(eps / cfg.eps_ladder[idx + 1])
                except Exception as e:  # per-rung failure recorded, sweep continues
                    failures += 1
                    fh.write(
                        json.dumps(
                            {
                                "status": "failed",
                                "eps": eps,
                                "error": str(e),
                                "config_hash": cfg.hash(),
                                "tool_version": __version__,
                            }
                        )
                        + "\n"
                    )
                fh.flush()
    return EXIT_NUMERICAL if failures else EXIT_OK


def _load_records(path: str) -> tuple[list, list]:
    records, failed = [], []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        d = json.loads(line)
        if d.get("status") == "ok":
            records.append(asympt.SweepRecord.from_dict(d))
        else:
            failed.append(d)
    return records, failed


def _report_tables(report: asympt.TheoremReport, records) -> tuple[str, list]:
    lines = []
    rows = []

    def row(name, value, target, passed):
        rows.append({"check": name, "value": value, "target": target,
                     "passed": passed})
        mark = "PASS" if passed else "FAIL"
        lines.append(f"  {name:<22} {value!s:>14}  target {target!s:>14}  [{mark}]")

    r = report.rate
    if r.diverging:
        row("rate eps*lam", "inf (diverging)", "inf", r.passed)
    else:
        row("rate eps*lam", f"{r.limit:.6g}", f"{r.target:.6g}", r.passed)
    a = report.alpha_slope
    if not math.isnan(a.target):
        row("alpha slope", f"{a.limit:.6g}", f"{a.target:.6g}", a.passed)
    row("farfield trend", f"{report.farfield.values[-1]:.3g}",
        "decreasing, <= 0.1", report.farfield.decreasing)
    row("grad_w bound", f"{report.grad_w_bound.max_over_median:.3f}",
        "max/median <= 3", report.grad_w_bound.passed)
    row("grad_r bound", f"{report.grad_r_bound.max_over_median:.3f}",
        "max/median <= 3", report.grad_r_bound.passed)
    row("sup_w trend", f"{report.sup_w_trend.values[-1]:.3g}",
        "decreasing", report.sup_w_trend.decreasing)
    rows.append({"check": "center pinned by symmetry", "value": "satisfied",
                 "target": "symmetry", "passed": True})
    lines.append("  center x_eps == 0 pinned by radial symmetry (recorded, not tested)")
    return "\n".join(lines), rows


def cmd_verify(args) -> int:
    cfg = load_config(args.config, args.tol_override)
    records, failed = _load_records(args.records)
    if len(records) < 3:
        print(f"insufficient data: {len(records)} successful rungs (< 3)",
              file=sys.stderr)
        return EXIT_VALIDATION
    a = cfg.coefficient("a")
    V = cfg.coefficient("V")
    a0 = float(a(0.0))
    qv0 = greenfn.qv_center(V, a, cfg.R)
    phi0 = greenfn.phi0_ball([0.0, 0.0, 0.0], cfg.R)
    report = asympt.build_report(records, a0, qv0, phi0)
    table, rows = _report_tables(report, records)
    print("verification against the blow-up laws")
    print(table)
    payload = {
        "report": asdict(report),
        "config_hash": cfg.hash(),
        "tool_version": __version__,
        "n_records": len(records),
        "n_failed": len(failed),
    }
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2, default=_json_default) + "\n")
        csv_path = Path(args.out).with_suffix(".csv")
        with csv_path.open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["check", "value", "target", "passed"])
            writer.writeheader()
            writer.writerows(rows)
    return EXIT_OK if report.all_passed else EXIT_VERIFICATION


def cmd_bubbletest(args) -> int:
    cfg = load_config(args.config, args.tol_override)
    # Coefficient recovery needs phi_a(0) != 0, which fails exactly at the
    # critical coefficient; use a = -1 unless a non-critical constant is given.
    if "constant" in cfg.a:
        a_const = float(cfg.a["constant"])
    else:
        a_const = -1.0

    suite = bubble.lemma_b3_suite(a_const, cfg.R)
    ok = True
    table = []
    for key in ("U5_H", "U4_dlamU_H", "U4_H2", "U3_dlamU_H2"):
        ent = suite[key]
        tgt = ent["leading_target"]
        err = abs(ent["leading"] - tgt) / max(abs(tgt), 1e-12)
        ok &= err <= 0.01
        table.append((key, "leading", ent["leading"], tgt, err))
        if "subleading" in ent:
            tgt2 = ent["subleading_target"]
            err2 = abs(ent["subleading"] - tgt2) / max(abs(tgt2), 1e-12)
            ok &= err2 <= 0.01
            table.append((key, "subleading", ent["subleading"], tgt2, err2))
    ent = suite["U4_dxU_H"]
    err = ent["leading"] / ent["scale"]
    ok &= err <= 0.01
    table.append(("U4_dxU_H", "leading", ent["leading"], 0.0, err))

    lams = np.geomspace(1e2, 1e4, 5)
    consts = {
        "moment t^4 (1+t^2)^-3": (bubble.bubble_moment(4, 3), 3 * math.pi / 16),
        "int g dlam U": (
            quad_radial(
                lambda r: 4
                * math.pi
                * (1 / r - (1 + r * r) ** -0.5)
                * ((1 - r * r) / (2 * (1 + r * r) ** 1.5))
                * r
                * r,
                0.0,
                math.inf,
                1e-12,
            ).value,
            2 * math.pi * (3 - math.pi),
        ),
    }
    u4dl = [
        l**2
        * 4.0
        * math.pi
        * quad_radial(
            lambda r: bubble._u(l, r) ** 4 * bubble._du_dlam(l, r) ** 2 * r * r,
            0.0,
            cfg.R,
            1e-13,
        ).value
        for l in lams
    ]
    L, _, _ = richardson_fit(list(zip(1 / lams, u4dl)))
    consts["lam^2 int U^4 (dlam U)^2"] = (L, math.pi**2 / 64)
    gradpu = [bubble.pu_center(l, cfg.R).grad_norm_sq() for l in lams]
    L, _, _ = richardson_fit(list(zip(1 / lams, gradpu)))
    consts["int |grad PU|^2"] = (L, 3 * math.pi**2 / 4)
    dl = [bubble.grad_dlambda_pu_norm(l, cfg.R) * l**2 for l in lams]
    L, _, _ = richardson_fit(list(zip(1 / lams, dl)))
    consts["lam^2 int |grad dlam PU|^2"] = (L, 15 * math.pi**2 / 64)
    for name, (val, tgt) in consts.items():
        err = abs(val - tgt) / abs(tgt)
        ok &= err <= 0.01
        table.append((name, "constant", val, tgt, err))

    for q in (2.0, 3.0, 6.0):
        chk = bubble.lemma_b1_check(q, lams, cfg.R)
        table.append((f"L^{q:g} rate", "ratio range",
                      float(np.min(chk["ratios"])), float(np.max(chk["ratios"])), 0.0))

    print(f"{'integral':<28}{'kind':<12}{'value':>14}{'target':>14}{'rel err':>10}")
    for name, kind, val, tgt, err in table:
        print(f"{name:<28}{kind:<12}{val:>14.6g}{tgt:>14.6g}{err:>10.2e}")
    if args.out:
        _emit({"rows": [list(t) for t in table], "passed": bool(ok)}, args.out)
    return EXIT_OK if ok else EXIT_VERIFICATION


def cmd_report(args) -> int:
    records, failed = _load_records(args.records)
    cols = [
        "eps", "lam", "eps_lambda", "alpha", "beta", "gamma",
        "norm_grad_w", "norm_grad_r", "sup_w_ratio", "farfield_error",
        "sobolev_quotient", "energy_residual", "pohozaev_residual",
        "greens_residual",
    ]
    print("  ".join(f"{c:>14}" for c in cols))
    for r in records:
        d = r.to_dict()
        print("  ".join(f"{d[c]:>14.6g}" for c in cols))
    if failed:
        print(f"{len(failed)} failed rung(s)", file=sys.stderr)
    if args.out:
        with Path(args.out).open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=cols, extrasaction="ignore")
            writer.writeheader()
            for r in records:
                writer.writerow(r.to_dict())
    return EXIT_OK if not failed else EXIT_NUMERICAL


def _parse_tol_overrides(items):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError("tol-override", f"expected KEY=VAL, got {item!r}")
        k, v = item.split("=", 1)
        out[k] = v
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ballblowup",
        description="Blow-up analysis of -Du + (a+eV)u = 3u^5 on the 3d ball",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", default=None, help="config JSON path")
        sp.add_argument("--out", default=None, help="output path")
        sp.add_argument(
            "--tol-override", action="append", metavar="KEY=VAL", default=[]
        )

    for name, fn in (
        ("greens", cmd_greens),
        ("critical", cmd_critical),
        ("qv", cmd_qv),
        ("bubbletest", cmd_bubbletest),
    ):
        sp = sub.add_parser(name)
        common(sp)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("solve")
    common(sp)
    sp.add_argument("--eps", type=float, default=None)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("sweep")
    common(sp)
    sp.add_argument("--resume", action="store_true")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("verify")
    common(sp)
    sp.add_argument("--records", required=True)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("report")
    common(sp)
    sp.add_argument("--records", required=True)
    sp.set_defaults(func=cmd_report)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.tol_override = _parse_tol_overrides(getattr(args, "tol_override", []))
        return args.func(args)
    except ConfigError as e:
        print(f"validation error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (greenfn.CoercivityError, solver.NoBracketError, RuntimeError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
