"""A robot facing a wall, integer distance h, noisy sonar.

The robot believes h is uniform over {2, ..., 11}.  Moving forward by z sets
h to max(0, h - z); the sonar returns the true distance plus or minus 1, each
with probability 1/3.  Every belief below is computed by regressing the query
back to the initial state and summing exact rationals, so the answers are
exact fractions, not floats.

Run:  python3 demos/01_discrete_wall.py
"""

from regbel import bundled_theory, eval_belief, regress_belief
from regbel.parser import parse_action_sequence, parse_formula

theory = bundled_theory("wall-discrete")


def bel(query, after=""):
    phi = parse_formula(query, fluents=theory.fluent_names)
    expr, trace = regress_belief(theory, phi, parse_action_sequence(after))
    result = eval_belief(theory, expr)
    return result, expr, trace


# Prior beliefs: no actions yet.
r, _, _ = bel("h = 10 or h = 11")
print(f"Bel(h = 10 or h = 11)            = {r.value}")
r, _, _ = bel("h <= 9")
print(f"Bel(h <= 9)                      = {r.value}")

# Moving forward by 1 cannot put the robot 11 units away: regression turns
# the query into max(0, h - 1) = 11, i.e. h = 12, which the prior excludes.
r, expr, _ = bel("h = 11", "fwd(1)")
print(f"\nBel(h = 11 | fwd(1))             = {r.value}")
print(f"  regressed condition: {expr.condition}")

# Sensing sharpens belief.  A reading of 5 is only possible from h in
# {4, 5, 6}; two of those three worlds satisfy h <= 5.
r, expr, trace = bel("h <= 5", "sonar(5)")
print(f"\nBel(h <= 5 | sonar(5))           = {r.value}   (gamma = {r.gamma})")
print("  derivation:")
for line in trace.render().splitlines():
    print("   ", line)

# Acting after sensing: evidence about the past is carried through motion.
r, _, _ = bel("h <= 3", "sonar(5); fwd(2)")
print(f"\nBel(h <= 3 | sonar(5); fwd(2))   = {r.value}")
