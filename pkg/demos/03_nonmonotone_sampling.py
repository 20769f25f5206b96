"""
Non-monotone objectives: keep each candidate only with probability q
=====================================================================

Coverage plus a rebate for every edge left out is submodular but not
monotone, so taking more edges can hurt. The stack algorithm handles it by
pushing an edge that passes the threshold only with probability
q = 1/(2C+1). The dual is then feasible in expectation, which we estimate by
Monte Carlo, and a sub-sampling inequality turns that into a guarantee.
"""

import numpy as np

from submatch import GenSpec, brute_force_opt, gen_random, mc_expected_feasibility, preset
from submatch import subsample_lemma_check, verify_submodular
from submatch.msbm import nonmonotone_factor
from submatch.oracles import verify_monotone

inst, f = gen_random(GenSpec("covlin_random", seed=1003, num_vertices=6, num_edges=10,
                             universe=10))
print("submodular:", verify_submodular(f)[0], " monotone:", verify_monotone(f)[0])

p = preset("nonmonotone")
print(f"C = {p.C:.5f}, q = {p.q:.7f}, factor {nonmonotone_factor(p.C):.4f}")

mc = mc_expected_feasibility(inst, f, p.C, p.q, trials=5000, seed=0)
opt_M, opt = brute_force_opt(inst, f)
print(f"E[f(M)] = {mc.f_mean:.3f} +- {mc.f_se:.3f}, f(OPT) = {opt:.3f}")
slack = np.array([mc.phi_mean[t] - mc.lam_mean[t] for t in sorted(mc.phi_mean)])
print(f"expected edge slack E[C(phi_u+phi_v)] - E[lambda_e]: min {slack.min():.3f}")
print(f"flagged edges ({mc.label}):", mc.flagged)

# E[h(B)] >= (1 - q) h(empty) for h(B) = f(B | OPT)
rest = sorted(f.keys - {e.key for e in opt_M})
for q in (0.21, 0.25, 0.5):
    r = subsample_lemma_check(f, rest, q, trials=2000, fixed=[e.key for e in opt_M])
    print(f"q = {q}: E[h(B)] = {r.mean:.3f} >= {r.bound:.3f}  {r.passed}")
