"""
Keeping one matching and evicting blockers, versus keeping a stack
==================================================================

The preemptive algorithm holds a single matching. An arriving edge replaces
the edges it touches when its gain beats C times their summed gains. It
needs only |M| edges of memory but pays with a weaker factor (8 at C = 2,
against 3 + 2*sqrt(2) for the stack).
"""

from submatch import GenSpec, brute_force_opt, gen_random, preset, run, run_preemptive

rows = []
for seed in range(200):
    inst, f = gen_random(GenSpec("coverage_random", seed=seed, num_vertices=6, num_edges=12,
                                 element_weights=(1, 9)))
    _, opt = brute_force_opt(inst, f)
    stack = run(inst, f, preset("monotone")).matching.value(f)
    M, st = run_preemptive(inst, f, C=2.0)
    rows.append((opt / stack, opt / M.value(f), len(st.preempted)))

stack_r, pre_r, evictions = zip(*rows)
print(f"stack:      mean ratio {sum(stack_r) / len(rows):.3f}, worst {max(stack_r):.3f}")
print(f"preemptive: mean ratio {sum(pre_r) / len(rows):.3f}, worst {max(pre_r):.3f}")
print(f"evictions per run: mean {sum(evictions) / len(rows):.2f}, max {max(evictions)}")
