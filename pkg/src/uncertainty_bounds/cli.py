"""Command-line frontend.

Exit codes: 0 when every checked relation holds, 1 on input errors, 2 when
a relation is violated (which, given the theorems, means a bug).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import explore as ex
from . import pairbounds as pb
from . import triplebounds as tb
from .operators import (
    coherent_state,
    fock_state,
    oscillator_triple,
    parse_complex,
    parse_observable,
)
from .qmcore import (
    HermitianObservable,
    StateVector,
    complete_basis,
    random_observable,
    random_orthogonal_state,
    random_state,
)
from .statefam import Fig1Params, Fig2Params, fig1_state, fig2_state

log = logging.getLogger(__name__)

EXIT_OK, EXIT_INPUT, EXIT_VIOLATION = 0, 1, 2
SWEEP_FIELDS = ("theta", "phi", "relation", "sample", "value")
PAIR_WITH_PERP = {"mp1": ex.optimal_perp_mp, "amended_hr": ex.optimal_perp_mp,
                  "new_sum": ex.optimal_perp_pair, "new_product": ex.optimal_perp_pair}
_FAMILY_ID = re.compile(r"^family\(\s*([^,]+)\s*,\s*([^)]+)\s*\)$")


class ConfigError(ValueError):
    pass


def fmt(x: float) -> str:
    """17 significant digits, enough to round-trip a double."""
    return format(float(x), ".17g")


@dataclass
class SessionConfig:
    dim: int
    observables: list[HermitianObservable]
    state: StateVector
    perp: object = None
    relations: list[str] = field(default_factory=list)
    output_format: str = "json"
    output_path: str | None = None


def _parse_amplitudes(raw, dim: int) -> np.ndarray:
    if not isinstance(raw, list):
        raise ConfigError("amplitudes must be a list of [re, im] pairs")
    v = np.array([parse_complex(z) for z in raw], dtype=complex)
    if v.shape[0] != dim:
        raise ConfigError(f"amplitude list has length {v.shape[0]}, session dim is {dim}")
    return v


def _parse_state(raw, dim: int) -> StateVector:
    if isinstance(raw, list):
        return StateVector(_parse_amplitudes(raw, dim))
    if not isinstance(raw, dict):
        raise ConfigError("state must be an amplitude list or a family object")
    if "amplitudes" in raw:
        return StateVector(_parse_amplitudes(raw["amplitudes"], dim))
    fam = raw.get("family")
    if fam in ("fig1", "fig2"):
        if dim != 3:
            raise ConfigError(f"{fam} states live in dimension 3, session dim is {dim}")
        if fam == "fig1":
            return fig1_state(Fig1Params(float(raw["theta"]), float(raw["phi"])))
        return fig2_state(Fig2Params(float(raw["theta"]), float(raw["phi"])))
    if fam in ("fock", "basis"):
        return fock_state(dim, int(raw.get("n", raw.get("index", 0))))
    if fam == "coherent":
        return coherent_state(dim, parse_complex(raw.get("alpha", 0.0)))
    raise ConfigError(f"unknown state family {fam!r}")


def load_config(path) -> SessionConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    try:
        dim = int(raw["dim"])
        obs = [parse_observable(o, dim) for o in raw.get("observables", [])]
        state = _parse_state(raw["state"], dim)
    except KeyError as exc:
        raise ConfigError(f"missing config key {exc}") from exc
    perp = raw.get("perp")
    if isinstance(perp, list):
        perp = StateVector(_parse_amplitudes(perp, dim))
    elif perp is not None and not (perp == "optimal" or (isinstance(perp, str) and perp.startswith("random:"))):
        raise ConfigError(f"perp must be an amplitude list, 'optimal' or 'random:<seed>', got {perp!r}")
    out = raw.get("output") or {}
    fmt_ = out.get("format", "json")
    if fmt_ not in ("csv", "json"):
        raise ConfigError(f"output format must be csv or json, got {fmt_!r}")
    rels = raw.get("relations", [])
    if not rels:
        raise ConfigError("no relations requested")
    return SessionConfig(dim, obs, state, perp, list(rels), fmt_, out.get("path"))


def _resolve_perp(cfg: SessionConfig, rel: str) -> tuple[StateVector, str]:
    perp = cfg.perp if cfg.perp is not None else "optimal"
    if isinstance(perp, StateVector):
        return perp, "explicit"
    if perp.startswith("random:"):
        seed = int(perp.split(":", 1)[1])
        return random_orthogonal_state(cfg.state, seed), perp
    o = cfg.observables
    choice = ex.optimal_perp_triple(*o[:3], cfg.state) if rel == "th1" else PAIR_WITH_PERP[rel](o[0], o[1], cfg.state)
    return choice.state, "optimal (degenerate: any partner is tight)" if choice.degenerate else "optimal"


def _need(cfg: SessionConfig, n: int, rel: str) -> list[HermitianObservable]:
    if len(cfg.observables) < n:
        raise ConfigError(f"relation {rel} needs {n} observables, config has {len(cfg.observables)}")
    return cfg.observables[:n]


def evaluate_relation(cfg: SessionConfig, rel: str) -> pb.BoundReport:
    psi = cfg.state
    if rel in ("hr", "sc", "mp2", "new_sum_reduced"):
        a, b = _need(cfg, 2, rel)
        f = {"hr": pb.bound_hr, "sc": pb.bound_schrodinger, "mp2": pb.bound_mp_sum2,
             "new_sum_reduced": pb.bound_new_sum_reduced}[rel]
        return f(a, b, psi)
    if rel in PAIR_WITH_PERP:
        a, b = _need(cfg, 2, rel)
        perp, src = _resolve_perp(cfg, rel)
        f = {"mp1": pb.bound_mp_sum, "amended_hr": pb.bound_amended_hr,
             "new_sum": pb.bound_new_sum, "new_product": pb.bound_new_product}[rel]
        rep = f(a, b, psi, perp)
        rep.params["perp_source"] = src
        return rep
    if rel in ("sch3", "thc"):
        f = tb.bound_sch_triple if rel == "sch3" else tb.bound_thc
        return f(*_need(cfg, 3, rel), psi)
    if rel == "th1":
        obs = _need(cfg, 3, rel)
        perp, src = _resolve_perp(cfg, rel)
        rep = tb.bound_th1(*obs, psi, perp)
        rep.params["perp_source"] = src
        return rep
    if rel == "eq31":
        rep, terms = tb.equality_decomposition(*_need(cfg, 3, rel), psi, complete_basis(psi))
        rep.params["terms"] = terms
        return rep
    if rel in ("kw_add", "kw_mult"):
        triple = oscillator_triple(cfg.dim)
        f = tb.bound_kw_additive if rel == "kw_add" else tb.bound_kw_multiplicative
        return f(triple, psi)
    m = _FAMILY_ID.match(rel)
    if m:
        rho, sigma = (float(g) for g in m.groups())
        return tb.bound_general_family(*_need(cfg, 3, rel), psi, rho, sigma)
    raise ConfigError(f"unknown relation {rel!r}")


def report_violated(rep: pb.BoundReport) -> bool:
    if tb.TRUNCATION_FLAG in rep.flags:
        return False
    if rep.relation_id == "eq31":
        return rep.params["residual"] > tb.EQUALITY_TOLERANCE * (1.0 + abs(rep.lhs))
    return not rep.satisfied


def _report_line(rep: pb.BoundReport) -> str:
    status = "unchecked" if tb.TRUNCATION_FLAG in rep.flags else ("VIOLATED" if report_violated(rep) else "ok")
    shown = {k: v for k, v in rep.to_dict()["params"].items() if k not in ("perp", "terms")}
    extra = f" params={json.dumps(shown, sort_keys=True)}" if shown else ""
    flags = f" flags={list(rep.flags)}" if rep.flags else ""
    return (f"{rep.relation_id:<16} lhs={fmt(rep.lhs)} rhs={fmt(rep.rhs)} "
            f"slack={fmt(rep.slack)} {status}{extra}{flags}")


def _write_reports(reports: list[pb.BoundReport], path: str, fmt_: str) -> None:
    if fmt_ == "json":
        Path(path).write_text(json.dumps([r.to_dict() for r in reports], indent=2) + "\n")
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["relation", "lhs", "rhs", "slack", "satisfied", "flags", "params"])
    for r in reports:
        d = r.to_dict()
        w.writerow([r.relation_id, fmt(r.lhs), fmt(r.rhs), fmt(r.slack), int(r.satisfied),
                    ";".join(r.flags), json.dumps(d["params"], sort_keys=True)])
    Path(path).write_text(buf.getvalue())


def cmd_verify(config_path, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        cfg = load_config(config_path)
        log.debug("session dim=%d, %d observables, relations=%s", cfg.dim, len(cfg.observables), cfg.relations)
        reports = [evaluate_relation(cfg, rel) for rel in cfg.relations]
    except (ValueError, ArithmeticError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    for rep in reports:
        print(_report_line(rep), file=stdout)
    if cfg.output_path:
        try:
            _write_reports(reports, cfg.output_path, cfg.output_format)
        except OSError as exc:
            print(f"error: cannot write {cfg.output_path}: {exc}", file=sys.stderr)
            return EXIT_INPUT
    return EXIT_VIOLATION if any(report_violated(r) for r in reports) else EXIT_OK


def render_records(records: list[ex.SweepRecord], fmt_: str) -> str:
    if fmt_ == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_FIELDS)
        for r in records:
            w.writerow([fmt(r.theta), fmt(r.phi), r.relation_id, r.sample_index, fmt(r.value)])
        return buf.getvalue()
    rows = [{"theta": r.theta, "phi": r.phi, "relation": r.relation_id,
             "sample": r.sample_index, "value": r.value} for r in records]
    return json.dumps(rows, indent=1) + "\n"


def cmd_sweep(preset, phi, grid, samples, seed, out, fmt_="csv", stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        records, meta = ex.figure_sweep(preset, float(phi), int(grid), int(samples), int(seed))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    lhs = {r.theta: r.value for r in records if r.relation_id == "sv"}
    bad = [r for r in records if r.sample_index >= 0 and r.value > lhs[r.theta] + pb.SLACK_TOLERANCE]
    meta["violations"] = len(bad)
    try:
        Path(out).write_text(render_records(records, fmt_))
        Path(str(out) + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        print(f"error: cannot write {out}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(f"wrote {len(records)} records to {out}", file=stdout)
    if "crossings" in meta:
        print("crossings: " + ", ".join(f"{x:.4f}" for x in meta["crossings"]), file=stdout)
    return EXIT_VIOLATION if bad else EXIT_OK


def _circ_dist(a, b) -> float:
    d = abs(a - b) % (2 * math.pi)
    return min(d, 2 * math.pi - d)


APPENDIX_TARGETS = ((2 * math.pi / 3, 4 * math.pi / 3), (-2 * math.pi / 3, -4 * math.pi / 3))


def appendix_scan(grid_n: int, instances: int = 100, seed: int = 0) -> dict:
    """Locate the extremal coefficients on the grid and audit the whole family on random triples."""
    if grid_n < 8:
        raise ValueError(f"appendix grid must be at least 8, got {grid_n}")
    rho, sigma, mu, nu = tb.family_grid(grid_n)
    step = 2 * math.pi / grid_n
    mu_max = np.nanmax(mu)
    abs_nu = np.abs(nu)
    nu_max = np.nanmax(abs_nu)
    cells = {
        "mu": [(float(rho[i, j]), float(sigma[i, j])) for i, j in np.argwhere(mu >= mu_max - 1e-12)],
        "abs_nu": [(float(rho[i, j]), float(sigma[i, j])) for i, j in np.argwhere(abs_nu >= nu_max - 1e-12)],
    }

    def near(pt, tgt):
        return _circ_dist(pt[0], tgt[0]) <= step + 1e-12 and _circ_dist(pt[1], tgt[1]) <= step + 1e-12

    located = all(
        all(any(near(p, t) for t in APPENDIX_TARGETS) for p in pts)
        and all(any(near(p, t) for p in pts) for t in APPENDIX_TARGETS)
        for pts in cells.values()
    )
    rng = np.random.default_rng(seed)
    min_slack = math.inf
    for _ in range(instances):
        a, b, c = (random_observable(3, rng) for _ in range(3))
        t = tb.triple_moments(a, b, c, random_state(3, rng))
        slack = t.var_total - (mu * t.var_sum_op + nu * t.kappa)
        min_slack = min(min_slack, float(np.nanmin(slack)))
    return {
        "grid": grid_n,
        "mu_max": float(mu_max),
        "abs_nu_max": float(nu_max),
        "argmax": cells,
        "argmax_at_targets": bool(located),
        "audit_instances": instances,
        "audit_min_slack": min_slack,
        "mu_nu_at_targets": [
            {"rho": r, "sigma": s, "mu": tb.mu_nu(r, s).mu, "nu": tb.mu_nu(r, s).nu} for r, s in APPENDIX_TARGETS
        ],
        "note": "|mu| is unbounded near rho = sigma = 0; the maximum is taken over signed mu",
    }


def cmd_appendix(grid_n, out, instances=100, seed=0, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        res = appendix_scan(int(grid_n), int(instances), int(seed))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    rho, sigma, mu, nu = tb.family_grid(int(grid_n))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rho", "sigma", "mu", "nu"])
    for r, s, m, n in zip(rho.ravel(), sigma.ravel(), mu.ravel(), nu.ravel()):
        if not math.isnan(m):
            w.writerow([fmt(r), fmt(s), fmt(m), fmt(n)])
    try:
        Path(out).write_text(buf.getvalue())
        Path(str(out) + ".meta.json").write_text(json.dumps(res, indent=2) + "\n")
    except OSError as exc:
        print(f"error: cannot write {out}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(f"max mu = {fmt(res['mu_max'])}, max |nu| = {fmt(res['abs_nu_max'])}", file=stdout)
    print(f"argmax at (+-2pi/3, +-4pi/3): {res['argmax_at_targets']}", file=stdout)
    print(f"family audit over {res['audit_instances']} triples: min slack = {res['audit_min_slack']:.3e}", file=stdout)
    ok = res["argmax_at_targets"] and res["audit_min_slack"] >= -pb.SLACK_TOLERANCE
    return EXIT_OK if ok else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uncertainty-bounds", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="evaluate relations for a configured session")
    v.add_argument("--config", required=True)

    s = sub.add_parser("sweep", help="emit figure sweep records")
    s.add_argument("--preset", required=True, choices=("fig1", "fig2"))
    s.add_argument("--phi", type=float, required=True, help="radians")
    s.add_argument("--grid", type=int, default=200)
    s.add_argument("--samples", type=int, default=20)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--format", choices=("csv", "json"), default="csv")

    a = sub.add_parser("appendix", help="scan the (rho, sigma) coefficient family")
    a.add_argument("--grid", type=int, default=720)
    a.add_argument("--out", required=True)
    a.add_argument("--instances", type=int, default=100)
    a.add_argument("--seed", type=int, default=0)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if args.command == "verify":
        return cmd_verify(args.config)
    if args.command == "sweep":
        if args.seed < 0 or args.seed >= 2**64:
            print("error: seed must be an unsigned 64-bit integer", file=sys.stderr)
            return EXIT_INPUT
        return cmd_sweep(args.preset, args.phi, args.grid, args.samples, args.seed, args.out, args.format)
    return cmd_appendix(args.grid, args.out, args.instances, args.seed)


if __name__ == "__main__":
    sys.exit(main())
