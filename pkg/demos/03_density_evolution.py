"""Posterior density curves under repeated sensing, and a conjugate update.

Part 1 writes three CSV profiles of the belief density of h: the uniform
prior, the posterior after one sonar reading of 5, and after two.  Each
reading multiplies another Gaussian likelihood into the density, so the
curves peak ever higher around 5.

Part 2 shows the Gaussian-times-Gaussian special case: a normal prior and a
normal sensor produce a normal posterior whose mean and variance match the
textbook product rule.

Run:  python3 demos/03_density_evolution.py
"""

import math

from regbel import bundled_theory, density_profile, parse_theory, profile_csv
from regbel.parser import parse_action_sequence

theory = bundled_theory("wall-continuous")
grid = [2.0 + 10.0 * i / 200 for i in range(201)]

print("writing density profiles for h (unnormalized):")
for i, prefix in enumerate(["", "sonar(5)", "sonar(5); sonar(5)"]):
    sit = parse_action_sequence(prefix)
    rows = density_profile(theory, sit, "h", grid)
    path = f"density_{i}.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(profile_csv(rows))
    at5 = dict(rows)[7.0], dict(rows)[5.0]
    print(f"  {path}  after [{prefix or ' '}]  "
          f"density(5) = {at5[1]:.5f}, density(7) = {at5[0]:.5f}")

# Conjugate case: prior N(5, 4), sensor noise N(0, 1), reading 6.
mu1, var1, var2, z = 5.0, 4.0, 1.0, 6.0
lo, hi = mu1 - 8 * math.sqrt(var1), mu1 + 8 * math.sqrt(var1)
conjugate = parse_theory(f"""
fluent f : real in [{lo}, {hi}]
sensor sense(z: real) on f {{ gauss(z - f, 0, {var2}) }}
prior {{ gauss(f, {mu1}, {var1}) }}
""")

fine = [lo + (hi - lo) * i / 4000 for i in range(4001)]
rows = density_profile(conjugate, parse_action_sequence(f"sense({z})"), "f", fine)
step = (hi - lo) / 4000
mass = sum(d for _, d in rows) * step
mean = sum(v * d for v, d in rows) * step / mass
var = sum((v - mean) ** 2 * d for v, d in rows) * step / mass

want_mean = (var2 * mu1 + var1 * z) / (var1 + var2)
want_var = var1 * var2 / (var1 + var2)
print("\nconjugate Gaussian update after sense(6):")
print(f"  posterior mean     {mean:.4f}   (product rule: {want_mean})")
print(f"  posterior variance {var:.4f}   (product rule: {want_var})")
