"""Command-line entry point: ``occr {score,synth,lar,validate,ltv}``.

Exit codes: 0 success, 1 validation/acceptance failure, 2 I/O error,
64 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from occr import harness, ingest
from occr.aggregate import dynamic_ltv, ltv_adjustment, score_wallets
from occr.domain import AssetStats, ScoreConfig
from occr.errors import NoOpenPositions, OccrError, ParseError, SchemaVersionMismatch, UnknownAsset
from occr.larsim import current_subscore
from occr.rng import ordered_map, substream
from occr.synth import LoanGenParams, TxnGenParams, generate_wallet

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2
EXIT_USAGE = 64

TABLE1_MEAN_TOL = 0.005
TABLE2_MEAN_TOL = 0.001
TABLE1_MIN_COVERAGE = 0.93
TABLE2_MIN_COVERAGE = 0.90
ORACLE_Z = 5.0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _config(args) -> ScoreConfig:
    overrides = {
        "rng_seed": getattr(args, "seed", None),
        "sim_batch_size": getattr(args, "batch_size", None),
        "sim_max_batches": getattr(args, "max_batches", None),
        "sim_epsilon": getattr(args, "epsilon", None),
        "ltv_fixed": getattr(args, "ltv_fixed", None),
        "ltv_alpha": getattr(args, "ltv_alpha", None),
        "ltv_cap": getattr(args, "ltv_cap", None),
        "occr_avg": getattr(args, "avg", None),
        "default_score": getattr(args, "default_score", None),
    }
    try:
        return ingest.load_config(getattr(args, "config", None), **overrides)
    except ValueError as e:
        raise UsageError(f"bad configuration: {e}") from None


def _load_inputs(args):
    wallets = ingest.parse_wallets(args.wallets)
    stats = ingest.load_asset_stats(args.assets)
    good, errors = ingest.validate_all(wallets)
    return good, stats, errors


def cmd_score(args) -> int:
    cfg = _config(args)
    wallets, stats, errors = _load_inputs(args)
    if errors:
        for e in errors:
            _err(f"invalid wallet {e.wallet_id}: {e}")
        return EXIT_INVALID
    missing = [
        (w.wallet_id, leg.asset_id)
        for w in wallets for loan in w.loans for leg in loan.collaterals
        if leg.asset_id not in stats
    ]
    if missing:
        for wid, asset in dict.fromkeys(missing):
            _err(f"wallet {wid}: unknown asset {asset!r}")
        return EXIT_INVALID
    reports = score_wallets(wallets, stats, cfg, threads=args.threads)
    ingest.write_reports(reports, args.out)
    print(f"scored {len(reports)} wallets -> {args.out}")
    return EXIT_OK


def cmd_synth(args) -> int:
    txn = TxnGenParams(args.p, args.alpha, args.x_min, args.txns)
    loan = LoanGenParams(args.loan_alpha, args.loan_x_min, args.l_min, args.l_max, args.loans,
                         s_h=args.s_h, p_open=args.p_open)
    assets = [
        AssetStats("ETH", 0.80, 3000.0),
        AssetStats("WBTC", 0.60, 60000.0),
        AssetStats("USDC", 0.02, 1.0),
    ]
    ids = [a.asset_id for a in assets]

    def one(i: int):
        rng = substream(args.seed, i)
        holdings = float(rng.uniform(0.0, args.holdings_max))
        return generate_wallet(txn, loan, holdings, rng, wallet_id=f"w{i:05d}", asset_ids=ids)

    wallets = ordered_map(one, range(args.wallets), args.threads)
    ingest.write_wallets(wallets, args.out)
    if args.assets_out:
        ingest.write_asset_stats(assets, args.assets_out)
    print(f"wrote {len(wallets)} wallets -> {args.out}")
    return EXIT_OK


def cmd_lar(args) -> int:
    cfg = _config(args)
    wallets, stats, errors = _load_inputs(args)
    if errors:
        for e in errors:
            _err(f"invalid wallet {e.wallet_id}: {e}")
        return EXIT_INVALID
    chosen = [w for w in wallets if args.wallet_id is None or w.wallet_id == args.wallet_id]
    if not chosen:
        _err(f"wallet {args.wallet_id!r} not found")
        return EXIT_INVALID
    wallet = chosen[0]
    try:
        sim = asdict(current_subscore(wallet, stats, cfg))
    except NoOpenPositions:
        sim = {"s_c": 0.0, "paths_used": 0, "lar_mean": 0.0, "lar_variance": 0.0,
               "converged": True, "batches": 0, "exceed_count": 0}
    print(json.dumps({"wallet_id": wallet.wallet_id, **sim}, indent=2))
    return EXIT_OK


def cmd_ltv(args) -> int:
    cfg = _config(args)
    out = {
        "occr": args.occr,
        "adjustment": ltv_adjustment(args.occr, cfg),
        "ltv": dynamic_ltv(args.occr, cfg),
    }
    print(json.dumps(out))
    return EXIT_OK


def _table_verdicts(table: str, results):
    tol, min_cp = ((TABLE1_MEAN_TOL, TABLE1_MIN_COVERAGE) if table == "table1"
                   else (TABLE2_MEAN_TOL, TABLE2_MIN_COVERAGE))
    return [abs(r.mean_estimate - r.theoretical_mean) <= tol and min_cp <= r.coverage <= 1.0
            for r in results]


def cmd_validate(args) -> int:
    if not 0 < args.scale <= 1:
        raise UsageError("--scale must be in (0, 1]")
    if args.table == "oracles":
        checks = harness.oracle_crosschecks(args.seed, args.scale, args.threads)
        verdicts = [c.passed(ORACLE_Z) for c in checks]
        for c, ok in zip(checks, verdicts):
            print(f"{'PASS' if ok else 'FAIL'}  {c.name:<38} est={c.estimate:.6g} "
                  f"expected={c.expected:.6g} z={c.z:+.2f}")
        payload = [{**asdict(c), "z": c.z, "passed": ok} for c, ok in zip(checks, verdicts)]
    else:
        try:
            specs = harness.table_specs(args.table, args.scale, args.seed, args.threads,
                                        args.replications, args.per_rep_n)
        except OccrError as e:
            raise UsageError(str(e)) from None
        results = [harness.run_study(s) for s in specs]
        verdicts = _table_verdicts(args.table, results)
        print(harness.format_table(results, harness.TABLES[args.table][2]))
        for i, ok in enumerate(verdicts, 1):
            print(f"row {i}: {'PASS' if ok else 'FAIL'}")
        payload = [{**asdict(r), "passed": ok} for r, ok in zip(results, verdicts)]
    if args.out:
        doc = {"table": args.table, "scale": args.scale, "seed": args.seed, "rows": payload}
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK if all(verdicts) else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="occr", description="On-chain credit risk scoring")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common_sim(p):
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--seed", type=int, help="RNG seed (overrides config)")
        p.add_argument("--batch-size", type=int, help="paths per simulation batch")
        p.add_argument("--max-batches", type=int, help="batch cap for the LaR simulation")
        p.add_argument("--epsilon", type=float, help="relative variance convergence tolerance")

    p = sub.add_parser("score", help="score every wallet in a wallet file")
    p.add_argument("--wallets", required=True, help="wallet JSON file")
    p.add_argument("--assets", required=True, help="asset statistics JSON file")
    p.add_argument("--out", required=True, help="report JSON file to write")
    p.add_argument("--threads", type=int, default=1, help="worker threads (output is identical for any value)")
    p.add_argument("--default-score", type=float, help="OCCR for wallets without history")
    p.add_argument("--ltv-fixed", type=float, help="market LTV")
    p.add_argument("--ltv-alpha", type=float, help="LTV sensitivity to the OCCR score")
    p.add_argument("--ltv-cap", type=float, help="maximum LTV offer")
    p.add_argument("--avg", type=float, help="market average OCCR score")
    common_sim(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("synth", help="generate a synthetic wallet file")
    p.add_argument("--wallets", type=int, default=10, help="number of wallets")
    p.add_argument("--seed", type=int, default=0, help="RNG seed")
    p.add_argument("--out", required=True, help="wallet JSON file to write")
    p.add_argument("--assets-out", help="also write a matching asset file")
    p.add_argument("--threads", type=int, default=1, help="worker threads")
    p.add_argument("--txns", type=int, default=100, help="transactions per wallet")
    p.add_argument("--p", type=float, default=0.6, help="credit probability")
    p.add_argument("--alpha", type=float, default=2.5, help="transaction Pareto shape")
    p.add_argument("--x-min", type=float, default=100.0, help="transaction Pareto scale")
    p.add_argument("--loans", type=int, default=8, help="loans per wallet")
    p.add_argument("--loan-alpha", type=float, default=2.5, help="collateral Pareto shape")
    p.add_argument("--loan-x-min", type=float, default=1000.0, help="collateral Pareto scale")
    p.add_argument("--l-min", type=float, default=0.5, help="lower LTV bound")
    p.add_argument("--l-max", type=float, default=0.8, help="upper LTV bound")
    p.add_argument("--s-h", type=float, default=0.2, help="liquidation probability of closed loans")
    p.add_argument("--p-open", type=float, default=0.2, help="probability a loan is still open")
    p.add_argument("--holdings-max", type=float, default=5000.0, help="holdings ~ U(0, max)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("lar", help="run the LaR simulation for one wallet")
    p.add_argument("--wallets", required=True, help="wallet JSON file")
    p.add_argument("--assets", required=True, help="asset statistics JSON file")
    p.add_argument("--wallet-id", help="wallet to simulate (default: first)")
    common_sim(p)
    p.set_defaults(func=cmd_lar)

    p = sub.add_parser("validate", help="reproduce the replication tables or run oracle checks")
    p.add_argument("table", choices=["table1", "table2", "oracles"])
    p.add_argument("--scale", type=float, default=1.0, help="fraction of full replications and sample size")
    p.add_argument("--seed", type=int, default=0, help="RNG seed")
    p.add_argument("--out", help="JSON results file")
    p.add_argument("--threads", type=int, default=1, help="worker threads")
    p.add_argument("--replications", type=int, help="override the replication count")
    p.add_argument("--per-rep-n", type=int, help="override the per-replication sample size")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("ltv", help="quote the dynamic LTV for an OCCR score")
    p.add_argument("--occr", type=float, required=True, help="wallet OCCR score")
    p.add_argument("--avg", type=float, help="market average OCCR score")
    p.add_argument("--ltv-fixed", type=float, help="market LTV")
    p.add_argument("--ltv-alpha", type=float, help="sensitivity")
    p.add_argument("--ltv-cap", type=float, help="maximum LTV offer")
    p.add_argument("--config", help="flat key = value config file")
    p.set_defaults(func=cmd_ltv)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        _err(f"occr: error: {e}")
        return EXIT_USAGE
    except OSError as e:
        _err(f"occr: I/O error: {e}")
        return EXIT_IO
    except (ParseError, SchemaVersionMismatch) as e:
        _err(f"occr: {e}")
        return EXIT_INVALID
    except UnknownAsset as e:
        _err(f"occr: {e}")
        return EXIT_INVALID
    except (OccrError, ValueError) as e:
        _err(f"occr: {e}")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
