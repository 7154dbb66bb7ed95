import datetime as dt
import json

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from conftest import D0, T0, make_loan, make_tx
from occr import ingest
from occr.aggregate import universe_sigma_max
from occr.domain import AssetStats, ScoreConfig, WalletHistory, WalletScoreReport
from occr.errors import DuplicateAsset, ParseError, SchemaVersionMismatch
from occr.synth import LoanGenParams, TxnGenParams, generate_wallet
from occr.rng import substream


def _wallet_file(tmp_path, wallets, version=1):
    path = tmp_path / "w.json"
    path.write_text(json.dumps({"schema_version": version, "wallets": wallets}))
    return path


def _tx(ts, amount=10.0, direction="credit"):
    return {"timestamp": ts, "amount_usd": amount, "direction": direction}


def test_recency_endpoints(tmp_path):
    path = _wallet_file(tmp_path, [{"wallet_id": "a", "holdings_usd": 1,
                                    "transactions": [_tx("2024-03-01T00:00:00Z"), _tx("2024-01-01T00:00:00Z")]}])
    (w,) = ingest.load_wallets(path)
    assert [t.recency_weight for t in w.transactions] == [0.0, 1.0]


def test_single_transaction_full_weight(tmp_path):
    path = _wallet_file(tmp_path, [{"wallet_id": "a", "holdings_usd": 1,
                                    "transactions": [_tx("2024-01-01T00:00:00")]}])
    (w,) = ingest.load_wallets(path)
    assert w.transactions[0].recency_weight == 1.0
    assert w.transactions[0].timestamp.tzinfo is not None


def test_malformed_json_reports_offset(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"schema_version": 1,\n "wallets": [}')
    with pytest.raises(ParseError) as info:
        ingest.load_wallets(path)
    assert info.value.line == 2
    assert info.value.offset == len('{"schema_version": 1,\n "wallets": [')


def test_schema_version_checked(tmp_path):
    with pytest.raises(SchemaVersionMismatch):
        ingest.load_wallets(_wallet_file(tmp_path, [], version=2))


def test_missing_field_is_parse_error(tmp_path):
    with pytest.raises(ParseError):
        ingest.load_wallets(_wallet_file(tmp_path, [{"wallet_id": "a"}]))


def test_validation_errors_carry_wallet_id(tmp_path):
    loan = {"loan_id": "L", "opened_at": "2024-01-01", "status": "open", "loan_usd": 90,
            "ltv_at_open": 0.8, "collaterals": [{"asset": "ETH", "amount_usd": 100}]}
    path = _wallet_file(tmp_path, [{"wallet_id": "bad", "holdings_usd": 1, "loans": [loan]},
                                   {"wallet_id": "ok", "holdings_usd": 1}])
    good, errors = ingest.validate_all(ingest.parse_wallets(path))
    assert [w.wallet_id for w in good] == ["ok"]
    assert [e.wallet_id for e in errors] == ["bad"]


def _assets(tmp_path, rows):
    path = tmp_path / "a.json"
    path.write_text(json.dumps({"assets": rows}))
    return path


def test_asset_stats(tmp_path):
    stats = ingest.load_asset_stats(_assets(tmp_path, [
        {"asset": "A", "annualized_volatility": 0.5, "spot_price_usd": 1},
        {"asset": "B", "annualized_volatility": 0.8, "spot_price_usd": 2},
    ]))
    assert len(stats) == 2
    assert universe_sigma_max(stats, ScoreConfig()) == 0.8
    assert ingest.load_asset_stats(_assets(tmp_path, [])) == {}


def test_duplicate_asset(tmp_path):
    row = {"asset": "A", "annualized_volatility": 0.5, "spot_price_usd": 1}
    with pytest.raises(DuplicateAsset):
        ingest.load_asset_stats(_assets(tmp_path, [row, row]))


def _report(wid, x=0.1):
    return WalletScoreReport(wid, x, 0.0, 0.0, 0.0, 0.0, x, x, 0.75)


def test_write_reports_empty(tmp_path):
    ingest.write_reports([], tmp_path / "r.json")
    doc = json.loads((tmp_path / "r.json").read_text())
    assert doc == {"schema_version": 1, "reports": []}


def test_write_reports_sorted_and_stable(tmp_path):
    reports = [_report("b", 1 / 3), _report("a", 2 / 3)]
    ingest.write_reports(reports, tmp_path / "1.json")
    ingest.write_reports(reports, tmp_path / "2.json")
    raw = (tmp_path / "1.json").read_bytes()
    assert raw == (tmp_path / "2.json").read_bytes()
    doc = json.loads(raw)
    assert [r["wallet_id"] for r in doc["reports"]] == ["a", "b"]
    assert doc["reports"][0]["s_h"] == 0.666666666667
    assert set(doc["reports"][0]) == set(_report("x").as_dict())


def test_config_precedence(tmp_path):
    path = tmp_path / "cfg.txt"
    path.write_text("# comment\nrng_seed = 3\nltv_cap = 0.95  # inline\ndefault_score = none\n"
                    "weights = 0.3 0.3 0.2 -0.1 0.1\nas_of = 2024-06-01\n")
    cfg = ingest.load_config(path, rng_seed=9)
    assert cfg.rng_seed == 9
    assert cfg.ltv_cap == 0.95
    assert cfg.default_score is None
    assert cfg.weights == (0.3, 0.3, 0.2, -0.1, 0.1)
    assert cfg.as_of == dt.date(2024, 6, 1)
    assert ingest.load_config(None) == ScoreConfig()


@pytest.mark.parametrize("text", ["nonsense", "bogus_key = 1", "rng_seed = x", "weights = 1 2"])
def test_config_errors(text):
    with pytest.raises(ParseError):
        ingest.parse_config_text(text)


@settings(max_examples=25, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.integers(0, 2**32 - 1), st.integers(0, 6), st.integers(0, 6))
def test_round_trip(tmp_path, seed, n_tx, n_loans):
    rng = substream(seed)
    w = generate_wallet(TxnGenParams(0.5, 3.0, 10.0, n_tx), LoanGenParams(3.0, 100.0, 0.5, 0.8, n_loans, 0.3, 0.3),
                        50.0, rng, asset_ids=("ETH", "WBTC"))
    path = tmp_path / "rt.json"
    ingest.write_wallets([w], path)
    (back,) = ingest.load_wallets(path)
    assert back.wallet_id == w.wallet_id and back.holdings_usd == w.holdings_usd
    assert len(back.loans) == len(w.loans) and len(back.transactions) == len(w.transactions)
    for a, b in zip(back.loans, w.loans):
        assert (a.loan_id, a.status, a.opened_at, a.closed_at) == (b.loan_id, b.status, b.opened_at, b.closed_at)
        assert a.loan_usd == pytest.approx(b.loan_usd, rel=1e-11)
        assert a.liquidation_threshold == pytest.approx(b.liquidation_threshold, rel=1e-11)
        assert a.collaterals[0].asset_id == b.collaterals[0].asset_id
    for a, b in zip(back.transactions, w.transactions):
        assert (a.timestamp, a.direction) == (b.timestamp, b.direction)
        assert a.amount_usd == pytest.approx(b.amount_usd, rel=1e-11)
    weights = [t.recency_weight for t in back.transactions]
    assert weights == sorted(weights)
