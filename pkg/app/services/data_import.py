import logging
from pathlib import Path
from typing import Dict, Union

import polars as pl

from app.errors import InputError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class DataImporter:
    """Reads the toolkit's tab- and comma-separated resources into polars frames.

    Every column is read as text; the services convert and validate values so
    errors can point at the offending row.
    """

    DICTIONARY_COLUMNS = ["source", "target", "pos", "frequency", "case"]
    SPAN_PAIR_COLUMNS = ["original", "edited", "pos"]
    GENDER_LIST_COLUMNS = ["phrase", "counts"]
    COUNT_COLUMNS = ["male", "female", "neutral", "plural"]

    def read_occupations(self, path: PathLike) -> pl.DataFrame:
        df = self._read(path, ["name", "percent_female"], separator=",", has_header=True)
        logger.debug("Loaded %d occupation rows from %s", len(df), path)
        return df

    def read_dictionary(self, path: PathLike) -> pl.DataFrame:
        return self._read(path, self.DICTIONARY_COLUMNS)

    def read_span_pairs(self, path: PathLike) -> pl.DataFrame:
        return self._read(path, self.SPAN_PAIR_COLUMNS, comment_prefix=None)

    def read_gazetteer(self, path: PathLike) -> pl.DataFrame:
        df = self._read(path, ["phrase"])
        return df.with_columns(pl.col("phrase").str.strip_chars()).filter(pl.col("phrase") != "")

    def read_gender_list(self, path: PathLike) -> pl.DataFrame:
        """Read `phrase TAB male female neutral plural` rows into one integer column per count."""
        df = self._read(path, self.GENDER_LIST_COLUMNS, comment_prefix=None)
        if df.is_empty():
            return pl.DataFrame(schema={"phrase": pl.Utf8, **{c: pl.Int64 for c in self.COUNT_COLUMNS}})
        bad = df.filter(pl.col("counts").is_null() | (pl.col("counts").str.strip_chars().str.count_matches(r"\s+") != 3))
        if not bad.is_empty():
            raise InputError(f"gender list row for {bad['phrase'][0]!r} does not have four counts")
        try:
            return (
                df.with_columns(pl.col("counts").str.strip_chars().str.replace_all(r"\s+", " ")
                                .str.split_exact(" ", 3)
                                .struct.rename_fields(self.COUNT_COLUMNS))
                .unnest("counts")
                .with_columns([pl.col(c).cast(pl.Int64, strict=True) for c in self.COUNT_COLUMNS])
            )
        except pl.exceptions.ComputeError as exc:
            raise InputError(f"gender list counts must be integers: {exc}") from exc

    def _read(self, path: PathLike, columns: list, separator: str = "\t", has_header: bool = False,
              comment_prefix: Union[str, None] = "#") -> pl.DataFrame:
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"File {path} does not exist")
        schema: Dict[str, pl.DataType] = {name: pl.Utf8 for name in columns}
        try:
            return pl.read_csv(
                path,
                separator=separator,
                has_header=has_header,
                schema=schema,
                comment_prefix=comment_prefix,
                quote_char=None,
                truncate_ragged_lines=True,
                encoding="utf8",
            )
        except pl.exceptions.NoDataError:
            logger.warning("%s contains no rows", path)
            return pl.DataFrame(schema=schema)


def write_tsv(df: pl.DataFrame, header_comment: str = "") -> str:
    """Render a frame as headerless TSV, optionally preceded by a '#' comment line."""
    body = df.write_csv(separator="\t", include_header=False, quote_style="never")
    return f"# {header_comment}\n{body}" if header_comment else body
