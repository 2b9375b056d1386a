"""Parse a definition with nested patterns and show the core form it desugars to."""

from saxt.syntax import desugar_signature, parse_program, pretty_program

SOURCE = """
type nat[i] = +{zero: 1, succ: exists j. ?{j < i}. nat[j]}

proc eat [i] (x : nat[i]) -> (y : 1) =
  case read x {
    zero x1 => y <- x1,
    succ <[j], <{j < i}, x1>> => y <- call eat [j] (x1)
  }
"""

surface = parse_program(SOURCE)
print("surface syntax, as parsed and printed back")
print(pretty_program(surface))
print()
print("core syntax: nested patterns become one case per layer")
print(pretty_program(desugar_signature(surface)))
