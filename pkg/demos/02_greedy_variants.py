# Ordinary, lazy and stochastic greedy on one graph.
#
# Lazy greedy returns the same leaders as ordinary greedy with fewer oracle
# calls; stochastic greedy trades a little objective for a much smaller budget.

from leadsel.graph import gen_ba
from leadsel.greedy import lazy_greedy, ordinary_greedy, stochastic_greedy

g = gen_ba(300, 2, seed=1)
k = 15
cache = {}  # shares the Laplacian and its pseudo-inverse between runs

o = ordinary_greedy(g, k, cache=cache)
z = lazy_greedy(g, k, cache=cache)
print("ordinary:", o.leaders)
print("lazy    :", z.leaders, "same" if z.leaders == o.leaders else "DIFFERENT")
print(f"calls: ordinary {o.call_count}, lazy {z.call_count}, "
      f"ratio {o.call_count / z.call_count:.2f}")

for eps in (0.01, 0.1, 0.5):
    s = stochastic_greedy(g, k, eps, seed=0, cache=cache)
    dev = 100 * (s.final_objective - o.final_objective) / o.final_objective
    print(f"stochastic eps={eps}: calls {s.call_count:5d}, deviation {dev:.3f}%")

print()
print("per-iteration trace of the lazy run:")
print(z.to_csv())
