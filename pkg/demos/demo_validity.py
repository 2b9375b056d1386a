"""Show the recursive call edges and the decrease check for each corpus program."""

from saxt import Mode, corpus, load, validate_program

for name in ("eat", "evens_odds", "stream_processor", "eat_same_size"):
    prog = load(corpus.source(name))
    for mode in (Mode.STRICT, Mode.NUMBERED):
        rep = validate_program(prog.core, prog.derivations, mode)
        print(f"== {name} ({mode.value})")
        print(rep.table())
        print()
