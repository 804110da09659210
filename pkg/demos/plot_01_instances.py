"""
Random instances of the two classes
===================================

Draw one instance of each class and look at what sets them apart:
the share of zero flows and how the cost spreads over the search space.
"""

import numpy as np

from qaplon import GeneratorConfig, generate, serialize_instance
from qaplon.qap import all_costs, all_permutations

uniform = generate(GeneratorConfig("uniform", 7, seed=1))
real = generate(GeneratorConfig("real-like", 7, seed=1))

# off-diagonal flows only
mask = ~np.eye(7, dtype=bool)
for inst in (uniform, real):
    f = inst.flow[mask]
    print(f"{inst.meta['class']:>9}: zero flows {np.mean(f == 0):.2f}, max flow {f.max()}")

# every one of the 7! assignments, costed at once
perms = all_permutations(7)
for inst in (uniform, real):
    c = all_costs(inst, perms)
    print(f"{inst.meta['class']:>9}: cost range [{c.min()}, {c.max()}], "
          f"{np.mean(c <= 1.05 * c.min()):.4f} of the space within 5% of the optimum")

# the on-disk format is plain text
print(serialize_instance(real).splitlines()[:4])
