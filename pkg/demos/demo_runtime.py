"""Run programs under several random schedules and show the results agree."""

from saxt import corpus, load, run

sig = load(corpus.source("eat")).core
for n in (0, 3, 8):
    results = {(r.value(), r.steps) for r in (run(sig, "eat", (n,), seed=s) for s in range(5))}
    print(f"eat({n}): value and steps over 5 seeds = {sorted(results)}")

res = run(sig, "eat", (1,), schedule="leftmost")
print()
print("trace of eat(1), leftmost schedule")
for t in res.trace:
    print(f"  {t['step']:>2} {t['rule']:<18} {' '.join(t['addrs'])}")

streams = load(corpus.source("evens_odds")).core
print()
print("head of evens over the constant stream of b1:",
      run(streams, "main", (3,), probe="head").value())

loop = load(corpus.source("loop")).core
res = run(loop, "loop", (3,), fuel=500)
print("the invalid loop mutant after 500 steps:", res.status.value)
