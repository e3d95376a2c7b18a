# Marching soldiers: any rule, made commutative.
#
# Each cell stores (cur, prev, age mod 3).  A cell moves only when no
# neighbor is behind it, so every cell reads neighbors from the right
# generation.  Projecting cur recovers the synchronous base run.

import numpy as np

from asynchist import (
    Bernoulli,
    Configuration,
    FreeHalfLine,
    Synchronous,
    check_local_commutativity_1d,
    lift_config,
    marching_transform,
    project_cur,
    random_rule,
    reconstruct_1d,
    simulate,
    verify_reconstruction,
    xor_rule,
)

base = xor_rule(FreeHalfLine())
march = marching_transform(base)
print(march.composite.n_states, "composite states")
print("base commutative:", check_local_commutativity_1d(base) is None)
print("composite commutative:", check_local_commutativity_1d(march.composite) is None)

cfg = Configuration.from_string("0001000000100", 0, base.boundary)
start = lift_config(cfg, march)

# synchronously it is the base rule, one generation per step
tr = simulate(march, start, Synchronous(), 10)
print(np.array_equal(project_cur(tr), simulate(base, cfg, Synchronous(), 10).frames))

# asynchronously it falls behind but never gets the wrong answer
slow = simulate(march, start, Bernoulli(0.3, 42), 80)
res = reconstruct_1d(slow)
print("delta:", res.delta)
u0, table = res.as_table()
print(table[:8])
print("verify:", verify_reconstruction(res))

# damage one entry and the verifier points at it
key = (5, 3)
res.eta_bar[key] ^= 1
print(verify_reconstruction(res))

# the same works for random 3-state bases
rng = np.random.default_rng(7)
for _ in range(5):
    b = random_rule(rng, 3, 0.0, FreeHalfLine())
    m = marching_transform(b)
    t = simulate(m, lift_config(Configuration(rng.integers(0, 3, 10), 0, b.boundary), m), Bernoulli(0.5, 1), 50)
    print(verify_reconstruction(reconstruct_1d(t)) is None)
