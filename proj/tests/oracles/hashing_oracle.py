#!/usr/bin/env python3
"""Reference implementation of the hashing embedder and Mat score.

Written independently of the C++ code path; the values it prints are
frozen into tests/test_scoring.cpp and tests/test_evaluation.cpp.
"""
import math
import re

MASK = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & MASK
    return h


def tokens(text: str):
    # ASCII letters are lowercased; bytes >= 0x80 stay inside tokens.
    raw = text.encode("utf-8").lower()
    return [t for t in re.split(rb"[^a-z0-9\x80-\xff]+", raw) if t]


def embed(text: str, dim: int = 256):
    v = [0] * dim
    for tok in tokens(text):
        h = fnv1a64(tok)
        v[h % dim] += 1 if (h >> 63) == 0 else -1
    if not any(v):
        # signed sums cancelled; use unsigned counts
        for tok in tokens(text):
            v[fnv1a64(tok) % dim] += 1
    norm = math.sqrt(sum(x * x for x in v))
    return [x / norm for x in v]


def mat(a: str, b: str, dim: int = 256) -> float:
    ea, eb = embed(a, dim), embed(b, dim)
    cos = sum(x * y for x, y in zip(ea, eb))
    return min(1.0, max(0.0, (1.0 + cos) / 2.0))


if __name__ == "__main__":
    v = embed("apple banana")
    print("embed('apple banana') nonzero:", {i: x for i, x in enumerate(v) if x})
    print("mat(apple banana, apple cherry) =", repr(mat("apple banana", "apple cherry")))

    opinions = [
        "trans fats are unhealthy and should be avoided",
        "read food labels and limit processed foods",
        "olive oil is a healthier fat than margarine",
    ]
    candidate = "trans fats are unhealthy so read labels and choose olive oil"
    vals = [mat(o, candidate) for o in opinions]
    print("per-opinion mat:", [repr(x) for x in vals])
    print("aggregate:", repr(sum(vals)))
    print("sample mean (first two):", repr((vals[0] + vals[1]) / 2))
    # 'river' and 'ocean' share bucket 42... with opposite signs at d=256
    print("embed('river ocean') nonzero:", {i: x for i, x in enumerate(embed("river ocean")) if x})
    print("mat(river ocean, river) =", repr(mat("river ocean", "river")))

    # Table of trans-fat opinions and two agreement candidates.
    import json, os
    here = os.path.dirname(os.path.abspath(__file__))
    with open(os.path.join(here, "..", "data", "trans_fat.json")) as f:
        tf = json.load(f)
    totals = [sum(mat(o, c) for o in tf["opinions"]) for c in tf["candidates"]]
    print("trans_fat.json totals:", [repr(t) for t in totals], "best:", totals.index(max(totals)))
