# The two constructions behind the undecidability results.
#
# g' adds a state n that sweeps right one cell per step; behind it the base
# rule runs as if started from all zeros.  undec adds walls n, n+1, n+2 that
# split the line into commutative pieces, and a cell next to the wall
# becomes n+1 or n+2 depending on who moved first.

from asynchist import (
    Configuration,
    FreeHalfLine,
    Synchronous,
    build_gprime,
    build_undec_rule,
    divergence_demo,
    simulate,
    standard_base,
)
from asynchist.render import render_grid

g = standard_base()
n = g.n_states
print("g0:", g.g0.tolist())

gp = build_gprime(g)
T = 12
sweep = simulate(gp, Configuration([n] + [0] * (T + 2), 0, FreeHalfLine()), Synchronous(), T)
plain = simulate(g, Configuration([0] * (T + 3), 0, FreeHalfLine()), Synchronous(), T)
print(render_grid(sweep.frames, ".#S"))
print(render_grid(plain.frames, ".#S"))

# cells strictly behind the front agree; the front cell itself holds n
behind = all((sweep.frames[t, :t] == plain.frames[t, :t]).all() for t in range(T + 1))
print("wake x < t matches:", behind)
print("front cells:", [int(sweep.frames[t, t]) for t in range(1, 6)])

f = build_undec_rule(g)
demo = divergence_demo(f, n, horizon=50)
print("site", demo.site, demo.history_a, "vs", demo.history_b)
print(demo.verdict.consistent)
