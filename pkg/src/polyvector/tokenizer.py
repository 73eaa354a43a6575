"""Tokenizers used for chunk sizing and token budgets.

A tokenizer only has to report token character spans; window text is then
cut straight from the source so no decode step is needed.
"""

from __future__ import annotations

import re
from typing import Protocol


class Tokenizer(Protocol):
    name: str

    def spans(self, text: str) -> list[tuple[int, int]]: ...

    def count(self, text: str) -> int: ...


class SimpleTokenizer:
    """Words and single punctuation marks, the offline default."""

    name = "simple"
    _pattern = re.compile(r"\w+|[^\w\s]")

    def spans(self, text: str) -> list[tuple[int, int]]:
        return [m.span() for m in self._pattern.finditer(text)]

    def count(self, text: str) -> int:
        return sum(1 for _ in self._pattern.finditer(text))


class TiktokenTokenizer:
    """Byte-pair tokenizer backed by ``tiktoken`` (optional dependency).

    The encoding file must be available locally or downloadable.
    """

    def __init__(self, encoding: str = "cl100k_base") -> None:
        import tiktoken

        self.name = f"tiktoken:{encoding}"
        self._enc = tiktoken.get_encoding(encoding)

    def spans(self, text: str) -> list[tuple[int, int]]:
        tokens = self._enc.encode(text)
        _, offsets = self._enc.decode_with_offsets(tokens)
        ends = offsets[1:] + [len(text)]
        return list(zip(offsets, ends))

    def count(self, text: str) -> int:
        return len(self._enc.encode(text))


def get_tokenizer(name: str = "simple") -> Tokenizer:
    if name == "simple":
        return SimpleTokenizer()
    if name.startswith("tiktoken"):
        _, _, encoding = name.partition(":")
        return TiktokenTokenizer(encoding or "cl100k_base")
    raise ValueError(f"unknown tokenizer {name!r}")
