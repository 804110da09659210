"""
Basins of attraction
====================

Map every configuration to the local optimum its best-improvement climb
ends in, then compare basin sizes with optimum quality.
"""

import numpy as np

from qaplon import GeneratorConfig, generate, global_optima, map_basins, unrank

inst = generate(GeneratorConfig("uniform", 8, seed=11))
bm = map_basins(inst)
print(f"{bm.search_space_size} configurations, {len(bm.optima)} local optima")

ids, best, canon = global_optima(bm, inst)
print("global optimum", unrank(canon, 8), "cost", best,
      f"basin {bm.size_of(canon) / bm.search_space_size:.3f} of the space")

# larger basins tend to belong to better optima
order = np.argsort(bm.optimum_costs)
for i in order[:5]:
    print(f"  cost {bm.optimum_costs[i]:>7}  basin {bm.sizes[i]:>6}")
r = np.corrcoef(-bm.optimum_costs, np.log(bm.sizes))[0, 1]
print(f"fitness vs log basin size: r = {r:.2f}")
