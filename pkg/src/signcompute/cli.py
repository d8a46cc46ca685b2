"""Command-line experiment runner.

Subcommands: ``codebook``, ``verify``, ``simulate``, ``slots``, ``figures``.
A JSON config file (``--config``) may supply any flag; flags given on the
command line win. The exit status is 0 only if every verification passed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sympy import isprime

from . import analysis
from .finite_field import ext_pow
from .protocol import SystemParams, cached_codebook, run_trial, simulate_slot_count
from .signature_code import (
    CodebookError,
    DecodeError,
    SignatureCodebook,
    build_codebook,
    count_subsets,
    signature_bits,
    user_element,
    verify_uniqueness,
    within_length_bound,
)

FIG3_K = (1, 4, 16)
FIG4_P = ((3, "p3M"), (6, "p6M"), (12, "p12M"))
FIG5_K = (3, 8, 16)
FIG_M = 1031


def fmt(v) -> str:
    """10 significant digits for floats, exact text for ints."""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format(float(v), ".10g")


def write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def pool_map(fn, items, workers: int):
    """Ordered map, optionally over a process pool."""
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    m: int | None = None
    k: int | None = None
    q: int = 2
    p: float = 0.1
    power: float = 100.0
    d_bits: int = 64
    trials: int = 1000
    seed: int = 0
    l: int | None = None
    l_max: int = 20
    out: str = "out"
    codebook: str | None = None
    group_cap: int = 10**9
    subset_cap: int = 10**6
    workers: int = 1

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "ExperimentConfig":
        fields = cls.__dataclass_fields__
        return cls(**{k: v for k, v in vars(ns).items() if k in fields and v is not None})


# ---------------------------------------------------------------------------
# codebook / verify
# ---------------------------------------------------------------------------


def _require(cfg: ExperimentConfig, *names):
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise SystemExit(f"missing required option(s): {', '.join('--' + n.replace('_', '-') for n in missing)}")


def _validate_params(M: int, K: int, q: int, group_cap: int) -> None:
    if not isprime(M):
        raise CodebookError(f"M={M} is not prime")
    if K < 1:
        raise CodebookError("K must be >= 1")
    if not isprime(q) or q > M:
        raise CodebookError(f"q={q} must be a prime not exceeding M")
    if M**K - 1 > group_cap:
        raise CodebookError(
            f"construction beyond desk scale: group order M^K - 1 = {M**K - 1} exceeds cap {group_cap}; "
            f"raise --group-cap to at least that to attempt it"
        )


def verify_codebook(cb: SignatureCodebook, subset_cap: int) -> dict:
    """Checks run by ``codebook`` and ``verify``; key ``ok`` aggregates them."""
    fld = cb.field
    a = fld.generator()
    logs_ok = all(ext_pow(fld, a, s) == user_element(fld, u) for u, s in cb.user_to_s.items())
    report = {
        "M": cb.M,
        "K": cb.K,
        "q": cb.q,
        "users": len(cb.user_to_s),
        "sig_len": cb.sig_len,
        "signature_bits": signature_bits(cb),
        "length_bound_bits": analysis.signature_overhead_bits(cb.M, cb.K),
        "length_bound_ok": within_length_bound(cb.M, cb.K, cb.q),
        "logs_ok": logs_ok,
        "distinct_s": len(set(cb.user_to_s.values())) == len(cb.user_to_s),
    }
    n_subsets = count_subsets(len(cb.user_to_s), cb.K)
    if n_subsets <= subset_cap:
        try:
            unique, total = verify_uniqueness(cb, decode=True)
        except DecodeError as exc:
            report["subsets_unique"] = f"decoder error: {exc}"
            report["uniqueness_ok"] = False
        else:
            report["subsets_unique"] = f"{unique}/{total}"
            report["uniqueness_ok"] = unique == total
    else:
        report["subsets_unique"] = f"skipped ({n_subsets} subsets > cap {subset_cap})"
        report["uniqueness_ok"] = None
    report["ok"] = all(report[k] is not False for k in ("length_bound_ok", "logs_ok", "distinct_s", "uniqueness_ok"))
    return report


def _print_report(report: dict) -> None:
    for k, v in report.items():
        print(f"{k}: {v}")


def cmd_codebook(cfg: ExperimentConfig) -> int:
    """Build a signature codebook, save it as JSON and verify it."""
    _require(cfg, "m", "k")
    _validate_params(cfg.m, cfg.k, cfg.q, cfg.group_cap)
    cb = build_codebook(cfg.m, cfg.k, cfg.q)
    out = Path(cfg.out)
    path = out if out.suffix == ".json" else out / f"codebook_M{cfg.m}_K{cfg.k}_q{cfg.q}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    cb.save(path)
    report = verify_codebook(cb, cfg.subset_cap)
    print(f"wrote {path}")
    _print_report(report)
    if report["uniqueness_ok"]:
        print(f"{report['subsets_unique']} subsets unique")
    return 0 if report["ok"] else 1


def cmd_verify(cfg: ExperimentConfig) -> int:
    """Re-run the codebook checks on a saved or freshly built codebook."""
    if cfg.codebook:
        cb = SignatureCodebook.load(cfg.codebook)
    else:
        _require(cfg, "m", "k")
        _validate_params(cfg.m, cfg.k, cfg.q, cfg.group_cap)
        cb = build_codebook(cfg.m, cfg.k, cfg.q)
    report = verify_codebook(cb, cfg.subset_cap)
    _print_report(report)
    print("PASS" if report["ok"] else "FAIL")
    return 0 if report["ok"] else 1


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _TrialJob:
    params: SystemParams
    trial: int
    fixed_L: int | None
    want_log: bool


def _run_job(job: _TrialJob):
    import io

    buf = io.StringIO() if job.want_log else None
    outcome = run_trial(job.params, job.trial, job.fixed_L, log=buf)
    return outcome, (buf.getvalue() if buf is not None else "")


def cmd_simulate(cfg: ExperimentConfig) -> int:
    """Run seeded contention periods through the full stack."""
    _require(cfg, "m", "k")
    _validate_params(cfg.m, cfg.k, cfg.q, cfg.group_cap)
    params = SystemParams(cfg.m, cfg.k, cfg.q, cfg.p, cfg.power, cfg.d_bits, cfg.seed)
    cached_codebook(cfg.m, cfg.k, cfg.q)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [_TrialJob(params, t, cfg.l, True) for t in range(cfg.trials)]
    results = pool_map(_run_job, jobs, cfg.workers)

    with open(out / "transcript.jsonl", "w") as fh:
        for _, text in results:
            fh.write(text)
    outcomes = [o for o, _ in results]
    write_csv(
        out / "trials.csv",
        ["trial", "L", "slots_used", "zero_error", "counts_ok"],
        [(o.trial, o.L, o.slots_used, int(o.zero_error), int(o.counts_ok)) for o in outcomes],
    )

    active = [o for o in outcomes if o.L > 0]
    ratios = np.array([o.L / o.slots_used for o in active]) if active else np.zeros(0)
    summary = {
        "trials": len(outcomes),
        "nonempty_trials": len(active),
        "zero_error": all(o.zero_error for o in outcomes),
        "counts_ok": all(o.counts_ok for o in outcomes),
        "mean_slots": float(np.mean([o.slots_used for o in active])) if active else 0.0,
    }
    ok = summary["zero_error"] and summary["counts_ok"]
    if cfg.l is not None:
        if cfg.l <= cfg.k:
            summary["slots_equal_L"] = all(o.slots_used == o.L for o in active)
            ok = ok and summary["slots_equal_L"]
        summary["S_exact"] = float(analysis.expected_slots(cfg.l, cfg.k))
    elif len(ratios) > 1:
        mean = float(ratios.mean())
        se = float(ratios.std(ddof=1) / math.sqrt(len(ratios)))
        expected = analysis.expected_empirical_res_rate(cfg.m, cfg.p, cfg.k)
        summary.update(
            mean_resolution_ratio=mean,
            stderr=se,
            expected_resolution_ratio=expected,
            avg_res_rate=analysis.exact_res_rate(cfg.m, cfg.p, cfg.k),
            within_3se=abs(mean - expected) <= 3 * se,
        )
    rows = [(k, v if isinstance(v, (int, float)) and not isinstance(v, bool) else str(v)) for k, v in summary.items()]
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in rows:
            w.writerow([k, fmt(v) if isinstance(v, (int, float)) else v])
    _print_report(summary)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# slots
# ---------------------------------------------------------------------------


def cmd_slots(cfg: ExperimentConfig) -> int:
    """Tabulate exact S(L) against Monte Carlo and the linear bounds."""
    _require(cfg, "k")
    K, L_max = cfg.k, cfg.l_max
    table = analysis.slot_count_table(K, L_max)
    report = analysis.check_bounds(table, K, L_max)
    a, b = analysis.alpha_star(K), analysis.beta_star(K)
    mc = pool_map(_mc_point, [(L, K, cfg.trials, [cfg.seed, K, L]) for L in range(1, L_max + 1)], cfg.workers)
    rows = []
    mc_ok = True
    for L in range(1, L_max + 1):
        mean, se = mc[L - 1]
        S = table[L]
        agree = abs(mean - float(S)) <= 3 * se if se > 0 else mean == S
        mc_ok &= agree
        rows.append((L, str(S), float(S), float(a * L - 1), float(b * L - 1), mean, se))
    out = Path(cfg.out)
    path = out if out.suffix == ".csv" else out / f"slots_K{K}.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["L", "S_exact_fraction", "S_exact", "lower", "upper", "mc_mean", "mc_stderr"])
        for r in rows:
            w.writerow([r[0], r[1]] + [fmt(v) for v in r[2:]])
    print(f"wrote {path}")
    for row in report.violations:
        print(f"bound violation at L={row.L}: {float(row.lower)} <= {float(row.S)} <= {float(row.upper)} fails")
    print(f"bounds {'hold' if report.ok else 'VIOLATED'} for {K} < L <= {L_max}")
    print(f"Monte Carlo {'agrees' if mc_ok else 'DISAGREES'} within 3 standard errors")
    return 0 if report.ok and mc_ok else 1


def _mc_point(args):
    L, K, trials, seed = args
    return simulate_slot_count(L, K, trials, seed)


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------


def fig3_rows(L_max: int = 20):
    tables = {K: analysis.slot_count_table(K, L_max) for K in FIG3_K}
    for L in range(1, L_max + 1):
        row = [L]
        for K in FIG3_K:
            row += [
                float(tables[K][L]),
                float(analysis.alpha_star(K) * L - 1),
                float(analysis.beta_star(K) * L - 1),
            ]
        yield row


def fig3_header():
    return ["L"] + [f"{c}_K{K}" for K in FIG3_K for c in ("S_exact", "lower", "upper")]


def _fig4_point(args):
    M, c, K = args
    return analysis.avg_res_rate_bound(M, c / M, K)


def fig4_rows(M: int = FIG_M, K_max: int = 20, workers: int = 1):
    points = [(M, c, K) for K in range(1, K_max + 1) for c, _ in FIG4_P]
    values = pool_map(_fig4_point, points, workers)
    n = len(FIG4_P)
    for i, K in enumerate(range(1, K_max + 1)):
        yield [K] + values[i * n : (i + 1) * n]


def fig4_header():
    return ["K"] + [f"Rres_{label}" for _, label in FIG4_P]


def fig5_grid():
    return [int(d) for d in np.unique(np.round(np.logspace(1, 5, 41)).astype(int))]


def fig5_rows(M: int = FIG_M, c: int = 3, P: float = 100.0):
    p = c / M
    for D in fig5_grid():
        bounds = [analysis.net_rate_bounds(M, p, K, P, D) for K in FIG5_K]
        yield [D] + [b.lower for b in bounds] + [bounds[0].upper, analysis.r_plnc(P)]


def fig5_header():
    return ["D"] + [f"Rnet_K{K}" for K in FIG5_K] + ["upper", "half_log2P"]


def cmd_figures(cfg: ExperimentConfig) -> int:
    """Write the figure data CSVs."""
    out = Path(cfg.out)
    write_csv(out / "fig3.csv", fig3_header(), fig3_rows())
    write_csv(out / "fig4.csv", fig4_header(), fig4_rows(workers=cfg.workers))
    write_csv(out / "fig5.csv", fig5_header(), fig5_rows(P=cfg.power))
    print(f"wrote {out / 'fig3.csv'}, {out / 'fig4.csv'}, {out / 'fig5.csv'}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

COMMANDS = {
    "codebook": cmd_codebook,
    "verify": cmd_verify,
    "simulate": cmd_simulate,
    "slots": cmd_slots,
    "figures": cmd_figures,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file whose keys mirror the flags")
    common.add_argument("--m", type=int, help="number of users (prime)")
    common.add_argument("--k", type=int, help="decodability threshold K")
    common.add_argument("--q", type=int, help="signature alphabet size (prime, <= M)")
    common.add_argument("--p", type=float, help="activation probability")
    common.add_argument("--power", type=float, help="SNR P")
    common.add_argument("--d-bits", type=int, dest="d_bits", help="payload bits D")
    common.add_argument("--trials", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--l", type=int, help="fixed number of active users")
    common.add_argument("--l-max", type=int, dest="l_max")
    common.add_argument("--out", help="output file or directory")
    common.add_argument("--codebook", help="codebook file to verify")
    common.add_argument("--group-cap", type=int, dest="group_cap", help="largest M^K - 1 to construct")
    common.add_argument("--subset-cap", type=int, dest="subset_cap", help="largest subset count to verify exhaustively")
    common.add_argument("--workers", type=int)

    parser = argparse.ArgumentParser(prog="signcompute", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=(fn.__doc__ or name).splitlines()[0])
    return parser


def load_config(path) -> dict:
    raw = json.loads(Path(path).read_text())
    return {k.replace("-", "_"): v for k, v in raw.items()}


def parse_config(argv=None) -> ExperimentConfig:
    parser = build_parser()
    ns = parser.parse_args(argv)
    merged = load_config(ns.config) if ns.config else {}
    merged.update({k: v for k, v in vars(ns).items() if v is not None})
    merged["command"] = ns.command
    fields = ExperimentConfig.__dataclass_fields__
    unknown = set(merged) - set(fields) - {"config"}
    if unknown:
        parser.error(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(**{k: v for k, v in merged.items() if k in fields})


def main(argv=None) -> int:
    cfg = parse_config(argv)
    try:
        return COMMANDS[cfg.command](cfg)
    except (CodebookError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
