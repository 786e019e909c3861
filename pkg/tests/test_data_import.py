import polars as pl
import pytest

from app.services.data_import import DataImporter, write_tsv


@pytest.fixture
def importer():
    return DataImporter()


def test_read_occupations(importer, settings):
    df = importer.read_occupations(settings.occupations_file)
    assert df.columns == ["name", "percent_female"]
    assert df.row(0) == ("carpenter", "2")
    assert df.height == 40


def test_read_dictionary_skips_comments(importer, settings):
    df = importer.read_dictionary(settings.dictionary_file)
    assert df.columns == DataImporter.DICTIONARY_COLUMNS
    assert df.row(0) == ("she", "he", "-", "1", "-")


def test_short_rows_are_padded(importer, tmp_path):
    path = tmp_path / "pairs.tsv"
    path.write_text("she\the\nher book\this book\tPRP$ NN\n", encoding="utf-8")
    df = importer.read_span_pairs(path)
    assert df.rows() == [("she", "he", None), ("her book", "his book", "PRP$ NN")]


def test_span_pairs_keep_hash_words(importer, tmp_path):
    path = tmp_path / "pairs.tsv"
    path.write_text("#1 mom\t#1 dad\n", encoding="utf-8")
    assert importer.read_span_pairs(path).row(0)[:2] == ("#1 mom", "#1 dad")


def test_gazetteer_drops_blank_lines(importer, tmp_path):
    path = tmp_path / "jobs.txt"
    path.write_text("# titles\nnurse\n  \n construction worker \n", encoding="utf-8")
    assert importer.read_gazetteer(path).get_column("phrase").to_list() == ["nurse", "construction worker"]


def test_empty_file(importer, tmp_path):
    path = tmp_path / "empty.tsv"
    path.write_text("", encoding="utf-8")
    assert importer.read_dictionary(path).is_empty()
    assert importer.read_gender_list(path).columns == ["phrase", "male", "female", "neutral", "plural"]


def test_missing_file(importer, tmp_path):
    with pytest.raises(FileNotFoundError):
        importer.read_occupations(tmp_path / "missing.csv")


def test_write_tsv():
    df = pl.DataFrame({"source": ["she", "her"], "target": ["he", "his"]})
    assert write_tsv(df) == "she\the\nher\this\n"
    assert write_tsv(df, "source\ttarget").startswith("# source\ttarget\n")
