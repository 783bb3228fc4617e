"""Symbol sources: Champernowne, periodic, file-backed and seeded random."""

from __future__ import annotations

from itertools import count, islice
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import Malformed, SequenceTooShort, UnknownSymbol, UnsupportedBase


def base_digits(n: int, k: int) -> list:
    out = []
    while n:
        n, d = divmod(n, k)
        out.append(d)
    return out[::-1]


class SequenceSource:
    """A fresh iterator over symbols of ``alphabet``.

    ``iter_symbols`` restarts from the beginning every time, so a source
    object can be reused; an individual iterator is single-consumer.
    """

    kind = "abstract"

    def __init__(self, alphabet):
        self.alphabet = tuple(alphabet)

    def iter_symbols(self) -> Iterator:
        raise NotImplementedError

    def iter_indices(self) -> Iterator[int]:
        pos = {a: i for i, a in enumerate(self.alphabet)}
        return (pos[a] for a in self.iter_symbols())

    def take(self, n: int) -> tuple:
        w = tuple(islice(self.iter_symbols(), n))
        if len(w) < n:
            raise SequenceTooShort(f"{self.describe()} yields {len(w)} symbols, {n} needed")
        return w

    def describe(self) -> str:
        return self.kind


class Champernowne(SequenceSource):
    kind = "champernowne"

    def __init__(self, alphabet):
        super().__init__(alphabet)
        if len(self.alphabet) < 2:
            raise UnsupportedBase("Champernowne needs an alphabet of size at least 2")

    def iter_symbols(self):
        k = len(self.alphabet)
        for n in count(1):
            for d in base_digits(n, k):
                yield self.alphabet[d]


class Periodic(SequenceSource):
    kind = "periodic"

    def __init__(self, alphabet, word):
        super().__init__(alphabet)
        self.word = tuple(word)
        if not self.word:
            raise Malformed("periodic source needs a non-empty word")
        for a in self.word:
            if a not in self.alphabet:
                raise UnknownSymbol(f"symbol {a!r} not in alphabet")

    def iter_symbols(self):
        while True:
            yield from self.word

    def describe(self):
        return "periodic:" + "".join(self.word)


class FileSource(SequenceSource):
    """One symbol per code point; whitespace is skipped."""

    kind = "file"

    def __init__(self, alphabet, path):
        super().__init__(alphabet)
        self.path = Path(path)
        try:
            text = self.path.read_text(encoding="utf-8")
        except OSError as exc:
            raise Malformed(f"cannot read sequence file: {exc}") from None
        self.symbols = tuple(c for c in text if not c.isspace())
        bad = sorted(set(self.symbols) - set(self.alphabet))
        if bad:
            raise UnknownSymbol(f"{path}: symbols {bad} not in alphabet")

    def iter_symbols(self):
        return iter(self.symbols)

    def describe(self):
        return f"file:{self.path}"


class RandomSource(SequenceSource):
    kind = "random"
    CHUNK = 4096

    def __init__(self, alphabet, seed: int):
        super().__init__(alphabet)
        self.seed = int(seed)

    def iter_symbols(self):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(self.seed)))
        k = len(self.alphabet)
        while True:
            for d in rng.integers(0, k, size=self.CHUNK):
                yield self.alphabet[d]

    def describe(self):
        return f"random:{self.seed}"


def champernowne_stream(alphabet) -> Champernowne:
    return Champernowne(alphabet)


def parse_source(text: str, alphabet) -> SequenceSource:
    """``champernowne | periodic:<word> | file:<path> | random:<seed>``.

    Periodic words are split into characters when every symbol is a single
    character, otherwise on commas.
    """
    alphabet = tuple(alphabet)
    kind, _, arg = text.partition(":")
    if kind == "champernowne" and not arg:
        return Champernowne(alphabet)
    if kind == "periodic" and arg:
        word = tuple(arg) if all(len(a) == 1 for a in alphabet) else tuple(arg.split(","))
        return Periodic(alphabet, word)
    if kind == "file" and arg:
        return FileSource(alphabet, arg)
    if kind == "random":
        try:
            return RandomSource(alphabet, int(arg or 0))
        except ValueError:
            raise Malformed(f"random seed must be an integer, got {arg!r}") from None
    raise Malformed(f"unknown sequence source {text!r}")


def block_frequency_report(src: SequenceSource, n: int, maxlen: int) -> dict:
    """Sliding-window frequencies of every word of length ``1..maxlen``
    in the first ``n`` symbols, with the worst deviation from ``k^-len``."""
    if not 1 <= maxlen <= n:
        raise Malformed("need n >= maxlen >= 1")
    k = len(src.alphabet)
    idx = np.fromiter(islice(src.iter_indices(), n), dtype=np.int64, count=-1)
    if len(idx) < n:
        raise SequenceTooShort(f"{src.describe()} yields {len(idx)} symbols, {n} needed")
    freqs, dev = {}, {}
    for L in range(1, maxlen + 1):
        windows = n - L + 1
        code = np.zeros(windows, dtype=np.int64)
        for j in range(L):
            code = code * k + idx[j:j + windows]
        counts = np.bincount(code, minlength=k ** L) / windows
        for c in range(k ** L):
            word = "".join(src.alphabet[d] for d in ([0] * L + base_digits(c, k))[-L:]) if L else ""
            freqs[word] = float(counts[c])
        dev[L] = float(np.max(np.abs(counts - k ** -L)))
    return {"n": n, "frequencies": freqs, "max_deviation": dev}
