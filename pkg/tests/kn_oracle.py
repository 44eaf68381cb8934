"""Brute-force interpolated Kneser-Ney, evaluated straight from the recursion.

Deliberately naive: counts come from rescanning the streams, nothing is
precomputed in backoff form. Used as the reference for the trained
models.
"""

from functools import lru_cache

START = "<start>"


class BruteKN:
    def __init__(self, streams, n_symbols, is_char, is_word, eos, eow, order, prune_words=4,
                 fallback=0.75):
        self.streams = [tuple(s) for s in streams]
        self.n_symbols = n_symbols
        self.is_char = is_char
        self.is_word = is_word
        self.eos = eos
        self.eow = eow
        self.order = order
        self.prune_words = prune_words
        self.fallback = fallback
        self.count = lru_cache(maxsize=None)(self._count)
        self.discounts = lru_cache(maxsize=None)(self._discounts)

    def occurrences(self, gram):
        k = len(gram)
        for s in self.streams:
            for p in range(len(s) - k + 1):
                if s[p:p + k] == gram:
                    yield s, p

    def pruned(self, history):
        return len(history) > self.prune_words and all(self.is_word(x) for x in history)

    def _count(self, gram):
        if self.pruned(gram[:-1]):
            return 0
        if len(gram) == self.order:
            return sum(1 for _ in self.occurrences(gram))
        return len({s[p - 1] if p > 0 else START for s, p in self.occurrences(gram)})

    def grams(self, k):
        out = set()
        for s in self.streams:
            for p in range(len(s) - k + 1):
                out.add(s[p:p + k])
        return out

    def _discounts(self, k):
        coc = {}
        for g in self.grams(k):
            c = self.count(g)
            if c:
                coc[c] = coc.get(c, 0) + 1
        n1, n2, n3, n4 = (coc.get(i, 0) for i in (1, 2, 3, 4))
        if n1 and n2 and n3:
            y = n1 / (n1 + 2 * n2)
            d1 = 1 - 2 * y * n2 / n1
            d2 = 2 - 3 * y * n3 / n2
            d3 = 3 - 4 * y * n4 / n3
            if 0 < d1 < 1 and 0 < d2 < 2 and 0 < d3 < 3:
                return d1, d2, d3
        return self.fallback, self.fallback, self.fallback

    def disc(self, k, c):
        d = self.discounts(k)
        return 0.0 if c == 0 else d[0] if c == 1 else d[1] if c == 2 else d[2]

    def allowed(self, internal):
        if internal:
            return [s for s in range(self.n_symbols) if self.is_char(s) or s == self.eow]
        return [s for s in range(self.n_symbols) if s != self.eow]

    def unigram_base(self, s):
        total = sum(self.count((x,)) for x in range(self.n_symbols))
        gamma = sum(self.disc(1, self.count((x,))) for x in range(self.n_symbols)) / total
        c = self.count((s,))
        return (c - self.disc(1, c)) / total + gamma / self.n_symbols

    def prob(self, s, history):
        """p(s | history) with the history's class taken from its last symbol."""
        internal = bool(history) and self.is_char(history[-1])
        if s not in self.allowed(internal):
            return 0.0
        h = tuple(history[max(0, len(history) - (self.order - 1)):]) if self.order > 1 else ()
        return self._prob(s, h, internal)

    def _prob(self, s, h, internal):
        if not h:
            z = sum(self.unigram_base(x) for x in self.allowed(internal))
            return self.unigram_base(s) / z
        k = len(h) + 1
        followers = [g[-1] for g in self.grams(k) if g[:-1] == h]
        counts = [self.count(h + (x,)) for x in followers]
        total = sum(counts)
        if total == 0:
            return self._prob(s, h[1:], internal)
        gamma = sum(self.disc(k, c) for c in counts) / total
        c = self.count(h + (s,))
        return max(c - self.disc(k, c), 0.0) / total + gamma * self._prob(s, h[1:], internal)
