"""String similarity primitives.

Levenshtein distance (and its max-length-normalized form), a Unicode-aware
tokenizer, BLEU, Rouge-L, and token-frequency cosine similarity. Edit units
are Unicode scalar values throughout; the distance kernel is Myers' bit-
parallel algorithm running on arbitrary-width Python integers, so a whole
256-character pattern is processed per text character.
"""

from __future__ import annotations

import math
from collections import Counter
from typing import Sequence

from .errors import EmptyInput

TokenSequence = Sequence[str]

BLEU_EPSILON = 1e-9


def levenshtein(a: str, b: str) -> int:
    """Minimum number of single-code-point insertions, deletions, substitutions."""
    if a == b:
        return 0
    # Shared affixes never change the distance; stripping them first keeps the
    # kernel small for the near-match pairs that dominate reward workloads.
    la, lb = len(a), len(b)
    lim = min(la, lb)
    p = 0
    while p < lim and a[p] == b[p]:
        p += 1
    s = 0
    while s < lim - p and a[la - 1 - s] == b[lb - 1 - s]:
        s += 1
    a = a[p : la - s]
    b = b[p : lb - s]
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) > len(b):
        a, b = b, a
    return _myers(a, b)


def _myers(pattern: str, text: str) -> int:
    # Bit-parallel Levenshtein (Myers 1999 / Hyyrö 2001). State vectors are
    # len(pattern)-bit integers; score tracks the last DP row.
    m = len(pattern)
    peq: dict[str, int] = {}
    bit = 1
    for ch in pattern:
        peq[ch] = peq.get(ch, 0) | bit
        bit <<= 1
    ones = bit - 1
    last = 1 << (m - 1)
    pv = ones
    mv = 0
    score = m
    get = peq.get
    for eq in [get(ch, 0) for ch in text]:
        xv = eq | mv
        xh = (((eq & pv) + pv) ^ pv) | eq
        ph = mv | (ones ^ (xh | pv))
        mh = pv & xh
        if ph & last:
            score += 1
        elif mh & last:
            score -= 1
        ph = ((ph << 1) | 1) & ones
        mh = (mh << 1) & ones
        pv = mh | (ones ^ (xv | ph))
        mv = ph & xv
    return score


def normed_levenshtein(a: str, b: str) -> float:
    """Edit distance divided by the longer length; 0.0 when both are empty."""
    denom = max(len(a), len(b))
    if denom == 0:
        return 0.0
    return levenshtein(a, b) / denom


# ---------------------------------------------------------------------------
# Tokenization

# Code points that tokenize one-per-character: CJK ideographs (incl. the
# supplementary-plane extensions), kana, and hangul.
_CJK_RANGES = (
    (0x1100, 0x11FF),    # hangul jamo
    (0x3040, 0x30FF),    # hiragana + katakana
    (0x31F0, 0x31FF),    # katakana phonetic extensions
    (0x3130, 0x318F),    # hangul compatibility jamo
    (0x3400, 0x4DBF),    # CJK extension A
    (0x4E00, 0x9FFF),    # CJK unified ideographs
    (0xAC00, 0xD7AF),    # hangul syllables
    (0xF900, 0xFAFF),    # CJK compatibility ideographs
    (0xFF65, 0xFF9F),    # halfwidth katakana
    (0x20000, 0x2EBEF),  # CJK extensions B..F
    (0x30000, 0x3134F),  # CJK extension G
)


def _is_cjk(cp: int) -> bool:
    for lo, hi in _CJK_RANGES:
        if lo <= cp <= hi:
            return True
    return False


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, then split CJK code points one-per-token.

    Non-CJK runs inside a chunk stay whole, punctuation included.
    """
    tokens: list[str] = []
    for chunk in text.lower().split():
        run: list[str] = []
        for ch in chunk:
            if _is_cjk(ord(ch)):
                if run:
                    tokens.append("".join(run))
                    run = []
                tokens.append(ch)
            else:
                run.append(ch)
        if run:
            tokens.append("".join(run))
    return tokens


# ---------------------------------------------------------------------------
# Sequence metrics


def _ngrams(tokens: TokenSequence, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(hyp: TokenSequence, ref: TokenSequence, max_n: int = 4) -> float:
    """BLEU with uniform weights over n-gram orders 1..max_n.

    Orders longer than the hypothesis are skipped and the weights
    renormalized; a zero match count is replaced by a tiny epsilon so the
    geometric mean never collapses to a hard zero.
    """
    if not hyp or not ref:
        raise EmptyInput("bleu is undefined on empty token sequences")
    orders = [n for n in range(1, max_n + 1) if len(hyp) >= n]
    log_sum = 0.0
    for n in orders:
        hyp_counts = _ngrams(hyp, n)
        ref_counts = _ngrams(ref, n)
        matched = sum(min(c, ref_counts[g]) for g, c in hyp_counts.items())
        total = len(hyp) - n + 1
        numerator = matched if matched > 0 else BLEU_EPSILON
        log_sum += math.log(numerator / total)
    geo_mean = math.exp(log_sum / len(orders))
    c, r = len(hyp), len(ref)
    brevity = 1.0 if c > r else math.exp(1.0 - r / c)
    return brevity * geo_mean


def _lcs_length(a: TokenSequence, b: TokenSequence) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        append = cur.append
        for j, y in enumerate(b):
            if x == y:
                append(prev[j] + 1)
            else:
                p, q = cur[j], prev[j + 1]
                append(p if p >= q else q)
        prev = cur
    return prev[-1]


def rouge_l(hyp: TokenSequence, ref: TokenSequence) -> float:
    """F1 over the longest common subsequence; 0.0 when there is none."""
    if not hyp or not ref:
        raise EmptyInput("rouge_l is undefined on empty token sequences")
    lcs = _lcs_length(hyp, ref)
    if lcs == 0:
        return 0.0
    precision = lcs / len(hyp)
    recall = lcs / len(ref)
    return 2.0 * precision * recall / (precision + recall)


def cosine_sim(hyp: TokenSequence, ref: TokenSequence) -> float:
    """Cosine of term-frequency vectors; 0.0 when either vector is all-zero."""
    hc = Counter(hyp)
    rc = Counter(ref)
    if not hc or not rc:
        return 0.0
    dot = sum(c * rc[t] for t, c in hc.items())
    if dot == 0:
        return 0.0
    norm_sq_h = sum(c * c for c in hc.values())
    norm_sq_r = sum(c * c for c in rc.values())
    # single sqrt of the product: exact 1.0 for identical multisets
    return dot / math.sqrt(norm_sq_h * norm_sq_r)
