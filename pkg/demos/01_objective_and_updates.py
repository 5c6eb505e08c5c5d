# Leader-selection objective and the two ways of updating it.
#
# The objective is half the trace of the inverse grounded Laplacian. We check
# the pseudo-inverse shortcut for single leaders and then chain a few
# rank-2 removals against direct inverses.

import time

import numpy as np

from leadsel import linalg
from leadsel.graph import gen_er, laplacian
from leadsel.oracle import objective

g = gen_er(200, 0.05, seed=0)
lap = laplacian(g)
print(f"ER graph: n={g.n}, m={g.m}")

# single leader straight from L+
p = linalg.pinv_laplacian(lap)
direct = objective(g, [7])
shortcut = 0.5 * linalg.ground_trace_from_pinv(p, 7)
print(f"f({{7}}) direct {direct:.10f}, from L+ {shortcut:.10f}")

# chain removals: grounded inverse for {7}, then add 3, 50, 120
a = linalg.delete_row_col(lap, 7)
a_inv = linalg.invert(a)
rows = [v for v in range(g.n) if v != 7]
for v in (3, 50, 120):
    m = rows.index(v)
    a_inv = linalg.woodbury_remove(a_inv, a, m)
    a = linalg.delete_row_col(a, m)
    rows.pop(m)
err = np.max(np.abs(a_inv - linalg.invert(a)))
print(f"after 3 removals: max |woodbury - direct| = {err:.2e}")
print(f"objective {0.5 * np.trace(a_inv):.10f} vs {objective(g, [7, 3, 50, 120]):.10f}")

# cost of one evaluation
t0 = time.perf_counter()
for _ in range(50):
    linalg.woodbury_remove_trace(a_inv, a, 10)
t_upd = (time.perf_counter() - t0) / 50
t0 = time.perf_counter()
for _ in range(50):
    linalg.trace(linalg.invert(linalg.delete_row_col(a, 10)))
t_dir = (time.perf_counter() - t0) / 50
print(f"per evaluation: rank-2 trace {t_upd * 1e3:.2f} ms, direct {t_dir * 1e3:.2f} ms")
