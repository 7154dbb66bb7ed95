"""JSON readers and writers for wallet, asset and report files, plus the
flat key-value config format.

Wallet file::

    {"schema_version": 1, "wallets": [{"wallet_id": ..., "holdings_usd": ...,
      "transactions": [{"timestamp": ISO-8601, "amount_usd": ..., "direction": "credit"|"debit"}],
      "loans": [{"loan_id": ..., "opened_at": "YYYY-MM-DD", "closed_at": "YYYY-MM-DD"?,
                 "status": "repaid"|"liquidated"|"open", "loan_usd": ..., "ltv_at_open": ...,
                 "liquidation_threshold": ...?, "collaterals": [{"asset": ..., "amount_usd": ...}]}]}]}

Asset file::

    {"assets": [{"asset": ..., "annualized_volatility": ..., "spot_price_usd": ..., "drift": ...?}]}
"""

from __future__ import annotations

import dataclasses
import datetime as dt
import json
import os
from pathlib import Path
from typing import Any, Iterable, Mapping

from occr.domain import (
    AssetStats,
    CollateralLeg,
    Direction,
    LoanPosition,
    LoanStatus,
    ScoreConfig,
    Transaction,
    WalletHistory,
    WalletScoreReport,
    validate_wallet,
)
from occr.errors import DuplicateAsset, ParseError, SchemaVersionMismatch, ValidationError

SCHEMA_VERSION = 1
SIG_DIGITS = 12


def _read_json(path: str | os.PathLike) -> Any:
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(f"{path}: not UTF-8", offset=e.start) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        offset = len(text[: e.pos].encode("utf-8"))
        raise ParseError(f"{path}: {e.msg}", line=e.lineno, offset=offset) from None


def _field(obj: Mapping, name: str, where: str):
    try:
        return obj[name]
    except (KeyError, TypeError):
        raise ParseError(f"{where}: missing field {name!r}") from None


def _number(obj: Mapping, name: str, where: str) -> float:
    value = _field(obj, name, where)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where}: field {name!r} must be a number")
    return float(value)


def parse_timestamp(text: str) -> dt.datetime:
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    ts = dt.datetime.fromisoformat(text)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=dt.timezone.utc)
    return ts.astimezone(dt.timezone.utc)


def _date(text: str, where: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except (TypeError, ValueError):
        raise ParseError(f"{where}: bad date {text!r}") from None


def _enum(cls, text, where):
    try:
        return cls(str(text).lower())
    except ValueError:
        raise ParseError(f"{where}: bad {cls.__name__} {text!r}") from None


def _parse_loan(obj: Mapping, where: str) -> LoanPosition:
    lid = str(_field(obj, "loan_id", where))
    where = f"{where} loan {lid}"
    legs = tuple(
        CollateralLeg(str(_field(c, "asset", where)), _number(c, "amount_usd", where))
        for c in _field(obj, "collaterals", where)
    )
    closed = obj.get("closed_at")
    lt = obj.get("liquidation_threshold")
    return LoanPosition(
        loan_id=lid,
        opened_at=_date(_field(obj, "opened_at", where), where),
        closed_at=None if closed is None else _date(closed, where),
        status=_enum(LoanStatus, _field(obj, "status", where), where),
        loan_usd=_number(obj, "loan_usd", where),
        ltv_at_open=_number(obj, "ltv_at_open", where),
        liquidation_threshold=None if lt is None else float(lt),
        collaterals=legs,
    )


def _parse_wallet(obj: Mapping, idx: int) -> WalletHistory:
    wid = str(_field(obj, "wallet_id", f"wallet #{idx}"))
    where = f"wallet {wid}"
    txns = []
    for i, t in enumerate(obj.get("transactions", [])):
        try:
            ts = parse_timestamp(_field(t, "timestamp", where))
        except (TypeError, ValueError):
            raise ParseError(f"{where}: bad timestamp in transaction #{i}") from None
        txns.append(Transaction(
            timestamp=ts,
            amount_usd=_number(t, "amount_usd", where),
            direction=_enum(Direction, _field(t, "direction", where), where),
            tx_id=str(t.get("tx_id", f"{wid}#tx{i}")),
        ))
    loans = tuple(_parse_loan(loan, where) for loan in obj.get("loans", []))
    return WalletHistory(
        wallet_id=wid,
        holdings_usd=_number(obj, "holdings_usd", where),
        loans=loans,
        transactions=tuple(txns),
    )


def assign_recency(wallets: list[WalletHistory]) -> list[WalletHistory]:
    """Map timestamps linearly onto [0, 1] over the oldest..newest transaction.

    The window spans every transaction in the batch; a zero-length window
    maps to 1.0.
    """
    stamps = [tx.timestamp for w in wallets for tx in w.transactions]
    if not stamps:
        return wallets
    start, end = min(stamps), max(stamps)
    span = (end - start).total_seconds()

    def weight(ts: dt.datetime) -> float:
        if span <= 0:
            return 1.0
        return min(max((ts - start).total_seconds() / span, 0.0), 1.0)

    return [
        dataclasses.replace(
            w,
            transactions=tuple(
                dataclasses.replace(tx, recency_weight=weight(tx.timestamp)) for tx in w.transactions
            ),
        )
        for w in wallets
    ]


def parse_wallets(path: str | os.PathLike) -> list[WalletHistory]:
    """Read a wallet file without validating invariants (recency assigned)."""
    doc = _read_json(path)
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be an object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionMismatch(f"{path}: schema_version {version!r}, expected {SCHEMA_VERSION}")
    wallets = [_parse_wallet(w, i) for i, w in enumerate(_field(doc, "wallets", str(path)))]
    return assign_recency(wallets)


def validate_all(wallets: Iterable[WalletHistory]) -> tuple[list[WalletHistory], list[ValidationError]]:
    """Validate every wallet, collecting errors tagged with their wallet id."""
    good, errors = [], []
    for w in wallets:
        try:
            good.append(validate_wallet(w))
        except ValidationError as e:
            e.wallet_id = w.wallet_id
            errors.append(e)
    return good, errors


def load_wallets(path: str | os.PathLike) -> list[WalletHistory]:
    good, errors = validate_all(parse_wallets(path))
    if errors:
        raise errors[0]
    return good


def load_asset_stats(path: str | os.PathLike) -> dict[str, AssetStats]:
    doc = _read_json(path)
    out: dict[str, AssetStats] = {}
    for i, a in enumerate(_field(doc, "assets", str(path))):
        aid = str(_field(a, "asset", f"asset #{i}"))
        if aid in out:
            raise DuplicateAsset(aid)
        out[aid] = AssetStats(
            asset_id=aid,
            annualized_volatility=_number(a, "annualized_volatility", aid),
            spot_price_usd=_number(a, "spot_price_usd", aid),
            drift=float(a.get("drift", 0.0)),
        )
    return out


def _fmt(x):
    if isinstance(x, float):
        return float(f"{x:.{SIG_DIGITS}g}")
    return x


def _dump(doc: Any, path: str | os.PathLike) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def write_reports(reports: Iterable[WalletScoreReport], path: str | os.PathLike) -> None:
    rows = sorted(reports, key=lambda r: r.wallet_id)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "reports": [{k: _fmt(v) for k, v in r.as_dict().items()} for r in rows],
    }
    _dump(doc, path)


def wallet_to_json(w: WalletHistory) -> dict:
    def loan(x: LoanPosition) -> dict:
        d = {
            "loan_id": x.loan_id,
            "opened_at": x.opened_at.isoformat(),
            "status": x.status.value,
            "loan_usd": _fmt(x.loan_usd),
            "ltv_at_open": _fmt(x.ltv_at_open),
            "collaterals": [{"asset": c.asset_id, "amount_usd": _fmt(c.amount_usd)} for c in x.collaterals],
        }
        if x.closed_at is not None:
            d["closed_at"] = x.closed_at.isoformat()
        if x.liquidation_threshold is not None:
            d["liquidation_threshold"] = _fmt(x.liquidation_threshold)
        return d

    return {
        "wallet_id": w.wallet_id,
        "holdings_usd": _fmt(w.holdings_usd),
        "transactions": [
            {
                "timestamp": tx.timestamp.isoformat(),
                "amount_usd": _fmt(tx.amount_usd),
                "direction": tx.direction.value,
            }
            for tx in w.transactions
        ],
        "loans": [loan(x) for x in w.loans],
    }


def write_wallets(wallets: Iterable[WalletHistory], path: str | os.PathLike) -> None:
    _dump({"schema_version": SCHEMA_VERSION, "wallets": [wallet_to_json(w) for w in wallets]}, path)


def write_asset_stats(stats: Iterable[AssetStats], path: str | os.PathLike) -> None:
    doc = {"assets": [
        {"asset": a.asset_id, "annualized_volatility": _fmt(a.annualized_volatility),
         "spot_price_usd": _fmt(a.spot_price_usd), "drift": _fmt(a.drift)}
        for a in stats
    ]}
    _dump(doc, path)


# Config file: one ``key = value`` per line, ``#`` starts a comment.

def _opt(conv):
    def parse(text: str):
        return None if text.strip().lower() in ("", "none", "null") else conv(text)
    return parse


def _weights(text: str):
    parts = [float(x) for x in text.replace(",", " ").split()]
    if len(parts) != 5:
        raise ValueError("weights needs five numbers")
    return tuple(parts)


CONFIG_PARSERS = {
    "weights": _weights,
    "liquidation_proportion": float,
    "sigmoid_midpoint": _opt(float),
    "sim_batch_size": int,
    "sim_epsilon": float,
    "sim_max_batches": int,
    "sim_horizon_days": int,
    "sim_steps_per_day": int,
    "rng_seed": int,
    "ltv_fixed": float,
    "ltv_alpha": float,
    "ltv_cap": float,
    "occr_avg": float,
    "default_score": _opt(float),
    "new_credit_window_days": int,
    "sigma_max": _opt(float),
    "as_of": _opt(dt.date.fromisoformat),
}


def parse_config_text(text: str) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("config line needs key = value", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_PARSERS:
            raise ParseError(f"unknown config key {key!r}", line=lineno)
        try:
            out[key] = CONFIG_PARSERS[key](value)
        except ValueError as e:
            raise ParseError(f"config key {key!r}: {e}", line=lineno) from None
    return out


def load_config(path: str | os.PathLike | None, **overrides) -> ScoreConfig:
    """Defaults, then the file, then non-None ``overrides``."""
    values = parse_config_text(Path(path).read_text(encoding="utf-8")) if path else {}
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ScoreConfig(**values)
