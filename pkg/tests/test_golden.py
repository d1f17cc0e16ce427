import shutil

import pytest
from hypothesis import given
from hypothesis import strategies as st

from s4tower.golden import REGISTRY, GoldenError, golden_diff, golden_dir, golden_path
from s4tower.tables import EMPTY, Table, parse_tsv, render


@pytest.mark.parametrize("ident", list(REGISTRY))
def test_golden_tables_reproduce(ident):
    assert golden_diff(ident) == []


def test_corpus_is_complete():
    assert len(REGISTRY) == 13
    assert {p.name for p in golden_dir().glob("*.tsv")} == {e.filename for e in REGISTRY.values()}


@pytest.fixture
def corpus(tmp_path):
    for e in REGISTRY.values():
        shutil.copy(golden_path(e.ident), tmp_path / e.filename)
    return tmp_path


def test_tampered_row_gives_one_difference(corpus):
    path = corpus / "em_KZ2_5_p2.tsv"
    lines = path.read_text().splitlines(keepends=True)
    lines[3] = lines[3].replace("Sq2 i5", "Sq2 i6")
    path.write_text("".join(lines))
    diffs = golden_diff("em-KZ2-5-p2", corpus)
    assert len(diffs) == 1 and diffs[0].row == "2"


def test_whitespace_only_change_is_reported(corpus):
    path = corpus / "em_HZ_p2.tsv"
    path.write_text(path.read_text() + "\n")
    assert len(golden_diff("em-HZ-p2", corpus)) == 1


def test_missing_file(corpus):
    (corpus / "postnikov_p2.tsv").unlink()
    with pytest.raises(GoldenError, match="missing"):
        golden_diff("postnikov-p2", corpus)


def test_unknown_id():
    with pytest.raises(GoldenError, match="unknown"):
        golden_diff("em-KZ7-p11")


def test_env_override(corpus, monkeypatch):
    monkeypatch.setenv("S4TOWER_GOLDEN_DIR", str(corpus))
    assert golden_dir() == corpus
    assert golden_dir("/elsewhere").as_posix() == "/elsewhere"


cell = st.text(st.characters(blacklist_categories=("Cs", "Cc", "Zl", "Zp"), blacklist_characters="\t#"), max_size=12).filter(
    lambda s: s.strip() == s and s != EMPTY
)


@given(st.integers(1, 4).flatmap(lambda k: st.tuples(
    st.lists(cell.filter(bool), min_size=k, max_size=k),
    st.lists(st.lists(cell, min_size=k, max_size=k).filter(lambda r: r[0]), max_size=6),
)))
def test_tsv_round_trip(table):
    cols, rows = table
    t = Table(cols, rows)
    back = parse_tsv(render(t, "tsv"))
    assert (back.columns, back.rows) == (cols, rows)


@pytest.mark.parametrize("ident", ["em-KZ4-p3", "postnikov-p35", "unstable-x2"])
def test_rendering_is_deterministic(ident):
    a, b = REGISTRY[ident].compute(), REGISTRY[ident].compute()
    for fmt in ("text", "tsv", "md", "json"):
        assert render(a, fmt) == render(b, fmt)
