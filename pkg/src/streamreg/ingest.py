"""Chunked reading of delimited text files into design/response arrays.

A DelimitedSource maps named header columns onto a numeric design matrix
(with a leading intercept column) and a response vector, yielding chunks of
a bounded row count so memory stays flat in the file size. It satisfies the
resettable chunk-source contract used by the model fitters: reset replays
the identical row sequence from the top.

Missing values become NaN; downstream consumers decide whether NaN rows are
dropped (and counted) or fatal. Structurally bad rows — wrong field count,
unparsable numbers — are skipped and counted by default, or abort the read
when the source is built with on_malformed="abort".
"""

from __future__ import annotations

import csv
import gzip
from collections import Counter

import numpy as np
from numpy.typing import NDArray

from .errors import HeaderMismatch, MalformedRow

__all__ = ["DelimitedSource", "stream_file", "drop_nonfinite"]

NA_MARKERS = frozenset({"", "NA", "NaN", "nan", "NULL", "null"})


def _open_text(path: str):
    if path.endswith(".gz"):
        return gzip.open(path, "rt", encoding="utf-8", newline="")
    return open(path, encoding="utf-8", newline="")


class DelimitedSource:
    """Streaming (design, response) chunks from a delimited text file."""

    def __init__(
        self,
        path: str,
        response: str,
        covariates: list[str],
        chunk_size: int = 500_000,
        delimiter: str = ",",
        on_malformed: str = "skip",
        add_intercept: bool = True,
    ):
        if chunk_size < 1:
            raise ValueError(f"chunk_size must be positive, got {chunk_size}")
        if on_malformed not in ("skip", "abort"):
            raise ValueError(f"on_malformed must be skip or abort, got {on_malformed!r}")
        if not covariates:
            raise ValueError("need at least one covariate column")
        self.path = path
        self.response = response
        self.covariates = list(covariates)
        self.chunk_size = chunk_size
        self.delimiter = delimiter
        self.on_malformed = on_malformed
        self.add_intercept = add_intercept
        self.n_malformed = 0
        self.malformed_reasons: Counter[str] = Counter()
        self.rows_yielded = 0
        self._fh = None
        self._reader = None
        self._exhausted = False
        self._pick: list[int] = []
        self._width = 0

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None
            self._reader = None

    def _open(self) -> None:
        self.close()
        self._exhausted = False
        self._fh = _open_text(self.path)
        self._reader = csv.reader(self._fh, delimiter=self.delimiter)
        try:
            header = next(self._reader)
        except StopIteration:
            raise HeaderMismatch(f"{self.path} is empty; expected a header row")
        header = [h.strip() for h in header]
        wanted = [self.response] + self.covariates
        missing = [name for name in wanted if name not in header]
        if missing:
            raise HeaderMismatch(
                f"columns {missing} not found in header of {self.path}"
            )
        self._pick = [header.index(name) for name in wanted]
        self._width = len(header)

    def next_chunk(
        self, reset: bool = False
    ) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        if reset or (self._fh is None and not self._exhausted):
            self._open()
        q = len(self.covariates) + (1 if self.add_intercept else 0)
        if self._exhausted:
            return np.empty((0, q)), np.empty(0)
        rows: list[list[float]] = []
        assert self._reader is not None
        for record in self._reader:
            parsed = self._parse(record)
            if parsed is not None:
                rows.append(parsed)
                if len(rows) == self.chunk_size:
                    break
        if not rows:
            self._exhausted = True
            self.close()
            return np.empty((0, q)), np.empty(0)
        block = np.asarray(rows)
        self.rows_yielded += block.shape[0]
        if self.add_intercept:
            x = np.empty((block.shape[0], q))
            x[:, 0] = 1.0
            x[:, 1:] = block[:, 1:]
        else:
            x = np.ascontiguousarray(block[:, 1:])
        return x, np.ascontiguousarray(block[:, 0])

    def _parse(self, record: list[str]) -> list[float] | None:
        if len(record) != self._width:
            self._reject("field-count", record)
            return None
        out = []
        for idx in self._pick:
            field = record[idx].strip()
            if field in NA_MARKERS:
                out.append(np.nan)
                continue
            try:
                out.append(float(field))
            except ValueError:
                self._reject("not-numeric", record)
                return None
        return out

    def _reject(self, reason: str, record: list[str]) -> None:
        if self.on_malformed == "abort":
            raise MalformedRow(f"{reason}: {record!r}")
        self.n_malformed += 1
        self.malformed_reasons[reason] += 1


def stream_file(
    path: str,
    chunk_size: int,
    response: str,
    covariates: list[str],
    **kwargs,
) -> DelimitedSource:
    """Build a DelimitedSource; thin naming convenience over the constructor."""
    return DelimitedSource(
        path, response=response, covariates=covariates, chunk_size=chunk_size, **kwargs
    )


def drop_nonfinite(x, y) -> tuple[NDArray[np.float64], NDArray[np.float64], int]:
    """Remove rows with NaN or infinity; returns surviving rows and the drop count."""
    keep = np.isfinite(x).all(axis=1) & np.isfinite(y)
    dropped = int(x.shape[0] - keep.sum())
    if dropped:
        return x[keep], y[keep], dropped
    return x, y, 0
