"""Typecheck the stream examples and print one derivation, then a rejected program."""

from saxt import corpus, load

prog = load(corpus.source("evens_odds"))
print("definitions:", ", ".join(prog.derivations))
print()
print("derivation of evens")
print(prog.derivations["evens"].render())
print()

bad = load(corpus.source("eat_wrong_id"))
print(f"a mistyped program stops at stage {bad.stage!r}:")
for e in bad.errors:
    print("  ", e)

loop = load("type V[i] = V[i]\n")
print(f"a non-contractive type stops at stage {loop.stage!r}:")
for e in loop.errors:
    print("  ", e)
