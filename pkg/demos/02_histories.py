# Histories under different schedules.
#
# For a commutative rule the sequence of distinct states a cell goes through
# does not depend on the schedule; only the pace changes.

from asynchist import (
    Bernoulli,
    Configuration,
    RoundRobin,
    Synchronous,
    check_domination,
    compare_histories,
    extract_history,
    max_rule,
    simulate,
)
from asynchist.render import render_grid

# max over {0,1}; the 3-state max is not commutative (try check_local_commutativity_1d)
rule = max_rule(2)
cfg = Configuration([0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1], 0, rule.boundary)

sync = simulate(rule, cfg, Synchronous(), 12)
lazy = simulate(rule, cfg, Bernoulli(0.3, 5), 40)
rr = simulate(rule, cfg, RoundRobin(3), 40)

print(render_grid(sync.frames))
print(render_grid(lazy.frames[:15]))

# effective ages: how many times each cell was actually free and attempted
print("ages after 40 lazy steps:", lazy.ages[-1])

for x in (0, 4, 9):
    print(x, extract_history(sync, x).values, extract_history(lazy, x).values, extract_history(rr, x).values)

print("consistent:", compare_histories([sync, lazy, rr]).consistent)

# the synchronous run is ahead of every other schedule
print("domination:", check_domination(lazy, sync, 12))

# a rule that is not commutative: the schedule shows through.  with two
# states every history just alternates, so use the 3-state max
m3 = max_rule(3)
start = Configuration.from_string("0012000120", 0, m3.boundary)
runs = [simulate(m3, start, Bernoulli(0.5, s), 30) for s in range(20)]
verdict = compare_histories(runs)
print("max3 consistent:", verdict.consistent, verdict.witness)
