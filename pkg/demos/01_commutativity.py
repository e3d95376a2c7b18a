# Which rules let cells update in any order?
#
# A 1-D rule is locally commutative when updating two neighbors one after
# the other gives the same result as updating them together, for every
# tuple of four cells.  The check below is exhaustive over S^4.

import numpy as np

from asynchist import (
    FreeHalfLine,
    check_local_commutativity_1d,
    check_pairwise_network,
    max_rule,
    network_from_rule,
    random_rule,
    xor_rule,
)

# max spreads 1s and never takes them back: commutative
print("max2:", check_local_commutativity_1d(max_rule(2)))

# xor of the two neighbors is not; the witness is a concrete tuple
w = check_local_commutativity_1d(xor_rule())
print(w.format())

# the same question asked of an explicit 5-cell network agrees
print("network max2:", check_pairwise_network(network_from_rule(max_rule(2), 5), "exhaustive"))
print("network xor:", check_pairwise_network(network_from_rule(xor_rule(), 5), "exhaustive") is not None)

# how common are commutative rules?  depends a lot on how quiet they are
rng = np.random.default_rng(0)
for keep in (0.0, 0.5, 0.8, 0.95):
    rules = [random_rule(rng, 2, keep, FreeHalfLine()) for _ in range(200)]
    share = np.mean([check_local_commutativity_1d(r) is None for r in rules])
    print(f"keep={keep:.2f}  commutative share {share:.2f}")
