"""
Linear weights: stack first, then solve the stack exactly
=========================================================

With a linear objective the stack is small, so after the pass we can afford
an exact maximum-weight b-matching on it instead of the greedy unwind. The
greedy unwind is within 2C of the potentials; the exact pass can only do
better and is within 3 + eps of the true optimum.
"""

from submatch import GenSpec, brute_force_opt, gen_random, run_mwbm

inst, f = gen_random(GenSpec("linear_random", seed=8, num_vertices=7, num_edges=14,
                             capacity=(1, 3)))
opt_M, opt = brute_force_opt(inst, f)
print("capacities:", inst.capacities)
for eps in (0.1, 0.5, 1.0):
    M, rep = run_mwbm(inst, f, eps, opt=opt_M)
    print(f"eps = {eps}: stack {rep.stack_size:>2}, greedy unwind {rep.greedy_weight:7.2f}, "
          f"exact on stack {rep.weight:7.2f}, w(OPT & S) {rep.opt_in_stack_weight:7.2f}, "
          f"OPT {opt:7.2f}, all checks {rep.passed}")
