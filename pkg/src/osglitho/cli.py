"""Command line: simulate, target, oracle-check and sweep.

Exit codes: 0 success, 1 failed check or other error, 2 configuration error,
3 budget exceeded, 4 grid I/O failure, 5 infeasible squeeze.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path
from typing import Optional

from . import checks
from .config import FORMATS, RunConfig, load_config
from .errors import ConfigError, GridIOError, OSGError
from .gridio import _jsonable, write_binary, write_csv
from .kernel import MomentumGrid, momentum_distribution
from .lithography import (FieldPlan, locate_peak, peak_width, plan_fields,
                          predict_deflection)


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.output.dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise GridIOError(f"cannot create output directory {out}: {exc}") from exc
    return out


def _write_grid(grid: MomentumGrid, cfg: RunConfig, stem: str) -> list[str]:
    out = _out_dir(cfg)
    written = []
    if cfg.output.format in ("bin", "both"):
        written.append(str(write_binary(grid, out / f"{stem}.bin")))
    if cfg.output.format in ("csv", "both"):
        written.append(str(write_csv(grid, out / f"{stem}.csv")))
    return written


def _write_json(obj, path: Path) -> None:
    try:
        path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise GridIOError(f"cannot write {path}: {exc}") from exc


def _peak_report(grid: MomentumGrid, cfg: RunConfig) -> dict:
    p_min = cfg.output.exclusion_radius
    peak = locate_peak(grid, p_min, cfg.params.lam)
    d_p, d_phi = peak_width(grid, peak)
    return {"p": peak.p, "phi": peak.phi, "W": peak.value, "fwhm_p": d_p, "fwhm_phi": d_phi}


def _simulate(cfg: RunConfig, fld, threads: int, stem: str) -> tuple[MomentumGrid, dict]:
    start = time.perf_counter()
    grid = momentum_distribution(fld, cfg.atom, cfg.params, cfg.grid, threads=threads,
                                 max_terms=cfg.max_terms, model=cfg.model)
    elapsed = time.perf_counter() - start
    files = _write_grid(grid, cfg, stem)
    lam = cfg.params.lam
    summary = {
        "files": files,
        "seconds": elapsed,
        "integral": grid.meta["integral"],
        "captured_weight": fld.captured_weight,
        "normalization_error": grid.meta["integral"] - fld.captured_weight,
        "cutoff": {"n_total_max": fld.n_total_max, "eps_trunc": cfg.params.eps_trunc},
        "rings": [{"n": n, "radius": math.sqrt(n) * lam, "weight": w}
                  for n, w in enumerate(grid.meta["ring_weights"])],
    }
    return grid, summary


def _print_summary(summary: dict) -> None:
    print(f"integral of W      : {summary['integral']:.6f}")
    print(f"captured weight    : {summary['captured_weight']:.6f}")
    print(f"excitation cutoff  : N_max = {summary['cutoff']['n_total_max']}")
    print(f"elapsed            : {summary['seconds']:.2f} s")
    for ring in summary["rings"]:
        if ring["weight"] > 1e-4:
            print(f"  ring n={ring['n']:<3d} p={ring['radius']:8.3f}  weight {ring['weight']:.4f}")
    if "peak" in summary:
        pk = summary["peak"]
        print(f"peak               : p = {pk['p']:.3f}, phi = {pk['phi']:.4f}, "
              f"FWHM (p, phi) = ({pk['fwhm_p']:.3f}, {pk['fwhm_phi']:.4f})")
    for f in summary["files"]:
        print(f"wrote {f}")


def run_simulate(cfg: RunConfig, threads: int = 1) -> dict:
    fld = cfg.field.build(cfg.params, Path(cfg.base_dir))
    grid, summary = _simulate(cfg, fld, threads, cfg.output.stem)
    if cfg.output.exclusion_radius is not None:
        summary["peak"] = _peak_report(grid, cfg)
    _write_json(summary, _out_dir(cfg) / f"{cfg.output.stem}_summary.json")
    _print_summary(summary)
    return summary


def _plan_dict(plan: FieldPlan, lam: float) -> dict:
    radius, phi = predict_deflection(plan.mean_a, plan.mean_b, plan.sign_a, plan.sign_b, lam)
    return {
        "alpha": plan.alpha, "beta": plan.beta, "amp_a": plan.amp_a, "amp_b": plan.amp_b,
        "sign_a": plan.sign_a, "sign_b": plan.sign_b, "r": plan.r_a, "r_prime": plan.r_b,
        "phi_sq": plan.phi_sq, "mean_a": plan.mean_a, "mean_b": plan.mean_b,
        "predicted": {"p": radius, "phi": phi},
    }


def _verify(cfg: RunConfig, plan: FieldPlan, threads: int, stem: str) -> dict:
    fld = plan.field_state(cfg.params.eps_trunc, cfg.params.n_max)
    grid, summary = _simulate(cfg, fld, threads, stem)
    summary["peak"] = _peak_report(grid, cfg)
    return summary


def run_target(cfg: RunConfig, threads: int = 1, verify: bool = False) -> dict:
    t = cfg.target
    plan = plan_fields(t.target, cfg.params.lam, t.r, t.r_prime)
    report = {"target": t.to_dict(), "plan": _plan_dict(plan, cfg.params.lam)}
    print(f"target      : p = {t.p_bar:g}, phi = {t.phi_bar:.4f}")
    print(f"alpha, beta : {plan.alpha.imag:+.4f}i, {plan.beta.imag:+.4f}i  "
          f"(r = {plan.r_a:g}, r' = {plan.r_b:g}, phase pi)")
    if verify:
        report["verification"] = _verify(cfg, plan, threads, cfg.output.stem)
        pk = report["verification"]["peak"]
        print(f"located peak: p = {pk['p']:.3f}, phi = {pk['phi']:.4f}, "
              f"FWHM (p, phi) = ({pk['fwhm_p']:.3f}, {pk['fwhm_phi']:.4f})")
    _write_json(report, _out_dir(cfg) / f"{cfg.output.stem}_plan.json")
    return report


def run_sweep(cfg: RunConfig, threads: int = 1, verify: bool = False) -> dict:
    entries = []
    for i, t in enumerate(cfg.targets):
        entry = {"target": t.to_dict()}
        try:
            plan = plan_fields(t.target, cfg.params.lam, t.r, t.r_prime)
        except OSGError as exc:
            entry["error"] = str(exc)
            entries.append(entry)
            print(f"[{i}] infeasible: {exc}")
            continue
        entry["plan"] = _plan_dict(plan, cfg.params.lam)
        print(f"[{i}] p = {t.p_bar:g}, phi = {t.phi_bar:.4f} -> alpha = {plan.alpha.imag:+.4f}i, "
              f"beta = {plan.beta.imag:+.4f}i")
        if verify or cfg.simulate_targets:
            entry["verification"] = _verify(cfg, plan, threads, f"{cfg.output.stem}_{i:03d}")
        entries.append(entry)
    report = {"targets": entries}
    _write_json(report, _out_dir(cfg) / f"{cfg.output.stem}_sweep.json")
    return report


def run_oracle_check(cfg: Optional[RunConfig], branch: str = "continuous") -> list:
    opts = cfg.oracle.__dict__ if cfg is not None else {}
    results = checks.run_all(branch=branch, **opts)
    for res in results:
        print(res.line())
    if cfg is not None:
        _write_json([{**r.__dict__, "passed": r.passed} for r in results],
                    _out_dir(cfg) / "oracle_report.json")
    return results


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="osglitho", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("simulate", "target", "oracle-check", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, required=name != "oracle-check")
        p.add_argument("--out", type=Path, help="output directory (overrides the config)")
        p.add_argument("--format", choices=FORMATS)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--verify", action="store_true",
                       help="simulate the planned fields and report the located peak")
        p.add_argument("--exclusion-radius", type=float,
                       help="ignore p below this radius when locating peaks")
    return parser


def _apply_flags(cfg: RunConfig, args) -> RunConfig:
    out = cfg.output
    if args.out is not None:
        out = type(out)(str(args.out), out.format, out.stem, out.exclusion_radius)
    if args.format is not None:
        out = type(out)(out.dir, args.format, out.stem, out.exclusion_radius)
    if args.exclusion_radius is not None:
        if args.exclusion_radius < 0:
            raise ConfigError("--exclusion-radius must be non-negative")
        out = type(out)(out.dir, out.format, out.stem, args.exclusion_radius)
    return cfg.with_overrides(output=out)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        cfg = load_config(args.config) if args.config is not None else None
        if cfg is not None:
            cfg = _apply_flags(cfg, args)
        if args.command == "simulate":
            if cfg.field is None:
                raise ConfigError("simulate needs a 'field' section")
            run_simulate(cfg, args.threads)
        elif args.command == "target":
            if cfg.target is None:
                raise ConfigError("target needs a 'target' section")
            run_target(cfg, args.threads, args.verify)
        elif args.command == "sweep":
            if not cfg.targets:
                raise ConfigError("sweep needs a 'targets' list")
            run_sweep(cfg, args.threads, args.verify)
        else:
            results = run_oracle_check(cfg)
            if not all(r.passed for r in results):
                return 1
    except OSGError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
