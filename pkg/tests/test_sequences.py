import pytest

from superfair.errors import Malformed, SequenceTooShort, UnknownSymbol, UnsupportedBase
from superfair.sequences import (
    Champernowne,
    FileSource,
    Periodic,
    base_digits,
    block_frequency_report,
    champernowne_stream,
    parse_source,
)

DEC = tuple("0123456789")


def test_champernowne_prefixes():
    assert "".join(champernowne_stream(DEC).take(15)) == "123456789101112"
    assert "".join(champernowne_stream("01").take(25)) == "1101110010111011110001001"
    assert champernowne_stream("01").take(1) == ("1",)


def test_champernowne_alphabet_mapping():
    assert "".join(Champernowne("ab").take(5)) == "bbabb"


def test_champernowne_reproducible():
    assert Champernowne("012").take(500) == Champernowne("012").take(500)


def test_unsupported_base():
    with pytest.raises(UnsupportedBase):
        champernowne_stream("0")


def test_base_digits():
    assert base_digits(6, 2) == [1, 1, 0]
    assert base_digits(0, 3) == []


def test_periodic_frequencies():
    rep = block_frequency_report(Periodic("01", "01"), 10_000, 2)
    f = rep["frequencies"]
    assert f["0"] == f["1"] == 0.5
    assert f["00"] == 0 and f["11"] == 0
    assert rep["max_deviation"][2] == pytest.approx(0.25, abs=1e-3)


def test_all_zero_source():
    assert block_frequency_report(Periodic("01", "0"), 100, 1)["frequencies"]["1"] == 0


def _ones_in_prefix(n):
    bits = []
    i = 1
    while len(bits) < n:
        bits.extend(bin(i)[2:])
        i += 1
    return bits[:n].count("1")


def test_champernowne_deviation_matches_direct_count():
    # every binary numeral starts with 1, so the excess of ones decays
    # only like 1/(2 log2 n): about 0.03 at n = 10^6
    n = 10**6
    rep = block_frequency_report(Champernowne("01"), n, 3)
    assert rep["max_deviation"][1] == pytest.approx(_ones_in_prefix(n) / n - 0.5, abs=1e-12)
    assert 0.02 < rep["max_deviation"][1] < 0.04
    assert max(rep["max_deviation"].values()) < 0.05


def test_champernowne_deviation_trend():
    small = block_frequency_report(Champernowne("01"), 10**4, 3)["max_deviation"]
    large = block_frequency_report(Champernowne("01"), 10**5, 3)["max_deviation"]
    assert max(large.values()) <= max(small.values())


def test_file_source(tmp_path):
    p = tmp_path / "x.txt"
    p.write_text("ab b\na\n", encoding="utf-8")
    assert FileSource("ab", p).take(4) == ("a", "b", "b", "a")
    with pytest.raises(SequenceTooShort):
        FileSource("ab", p).take(5)
    p.write_text("abc", encoding="utf-8")
    with pytest.raises(UnknownSymbol):
        FileSource("ab", p)


def test_parse_source():
    assert parse_source("periodic:10", "01").take(3) == ("1", "0", "1")
    assert parse_source("periodic:x,y", ("x", "y", "zz")).take(3) == ("x", "y", "x")
    r = parse_source("random:7", "01")
    assert r.take(100) == parse_source("random:7", "01").take(100)
    assert set(r.take(100)) <= {"0", "1"}
    assert r.take(100) != parse_source("random:8", "01").take(100)
    for bad in ("nope", "periodic:", "random:x", "champernowne:3"):
        with pytest.raises(Malformed):
            parse_source(bad, "01")


def test_report_preconditions():
    with pytest.raises(Malformed):
        block_frequency_report(Periodic("01", "0"), 2, 3)
