"""Ask the arithmetic solver a few entailment questions over the naturals."""

from saxt import query_entails

QUERIES = [
    "i, j; j < i |- j < i",                     # the decrease behind eat
    "i; . |- i < i",                            # a same-size call
    "i; . |- exists j. j + j = i",              # not every number is even
    "i; . |- exists k. 2 * k = i \\/ 2 * k + 1 = i",
    "n, k; n = 2 * k + 1 |- ~(n = 0)",
    ". ; . |- forall i. exists j. 3 * j <= i /\\ i < 3 * j + 3",
]

for q in QUERIES:
    print(f"{'valid  ' if query_entails(q) else 'invalid'}  {q}")
