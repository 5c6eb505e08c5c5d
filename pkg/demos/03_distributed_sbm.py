# Two-stage distributed greedy on a clustered graph.
#
# Stage 1 picks k candidates inside each cluster (gains still measured on the
# whole graph), stage 2 picks the final k from the pooled candidates.

from leadsel.graph import SbmParams, gen_sbm, partition_equal
from leadsel.greedy import distributed_greedy, ordinary_greedy

k = 10
for p_out in (0.01, 0.02, 0.05):
    g, truth = gen_sbm(SbmParams(4, 100, 0.05, p_out), seed=3)
    base = ordinary_greedy(g, k)
    for name, part in (("true clusters", truth), ("equal split", partition_equal(g, 4, seed=3))):
        d = distributed_greedy(g, k, part, inner="stochastic", epsilon=0.5, seed=3)
        dev = 100 * (d.final_objective - base.final_objective) / base.final_objective
        print(f"p_out={p_out:.2f} {name:13s}: pool {len(d.stages['pool']):2d}, "
              f"calls {d.call_count:5d} vs {base.call_count}, deviation {dev:.2f}%")
