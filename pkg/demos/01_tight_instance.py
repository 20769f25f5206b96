"""
The capped-pair family: where the stack algorithm is as bad as its guarantee
============================================================================

The stream first offers a fan of edges d_1..d_n out of x_0, each worth a
little more than C times the last, then the disjoint edges e_0..e_n. The
value of a pair {d_i, e_i} is capped at w(e_i), so once d_i is on the stack
the matching e_i looks nearly worthless on arrival and gets skipped.
"""

from submatch import AlgoParams, brute_force_opt, gen_tight
from submatch.generators import tight_ratio
from submatch.msbm import StackRun, monotone_factor

C, n, eps, delta = 2.0, 4, 0.1, 0.01
inst, f = gen_tight(C, n, eps, delta)

# walk the stream and watch the potentials
driver = StackRun(inst, f, AlgoParams(C=C), certify=True)
for e in inst.edges:
    before = (driver.phi.get(e.u, 0.0), driver.phi.get(e.v, 0.0))
    decision = driver.arrival_step(e)
    print(f"{f.label(e.key):>4}  phi_u+phi_v = {sum(before):8.4f}  -> {decision.value}")

rec = driver.finish()
fM = rec.matching.value(f)
opt_M, opt = brute_force_opt(inst, f)
print()
print("output:", [f.label(e.key) for e in rec.matching], f"f(M) = {fM:.4f}")
print("optimum:", sorted(f.label(e.key) for e in opt_M), f"f(OPT) = {opt:.4f}")
print(f"ratio {opt / fM:.4f}, guarantee {monotone_factor(C):.1f}")

# the ratio climbs toward 2C + C/(C-1) as n grows and eps, delta shrink
print()
for n in (4, 8, 16, 32):
    print(f"n = {n:>2}: OPT/ALG = {tight_ratio(C, n, 1e-6, 1e-7):.5f}")
