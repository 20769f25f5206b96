"""
Reading a run as a dual certificate
===================================

After one pass the stack S and the vertex potentials phi define a solution
of the dual LP: mu = f(S), C * phi on the vertices and lambda_e = f(e:S) on
the skipped edges. Its cost bounds the optimum from above, so comparing it
with f(M) bounds the approximation ratio of this very run, no optimum needed.
"""

from submatch import GenSpec, brute_force_opt, build_dual, certify, gen_random, preset, run

inst, f = gen_random(GenSpec("coverage_random", seed=11, num_vertices=6, num_edges=11,
                             element_weights=(1, 9)))
rec = run(inst, f, preset("monotone"), certify=True)
cert = build_dual(rec, f)
report = certify(rec, inst, f)

print(f"|E| = {inst.num_edges}, stack {len(rec.stack)}, matching {len(rec.matching)}")
print(f"mu = {cert.mu:.3f}, sum b_v phi_v = {cert.vertex_cost:.3f}, dual cost = {cert.cost:.3f}")
print(f"edge constraints violated: {len(report.edge_violations)}")
print(f"subset constraints: {report.subsets['mode']}, {report.subsets['checked']} sets checked,"
      f" pass = {report.subsets['pass']}")
for v in report.ratios:
    print(f"  {v.name:<13} {v.lhs:9.3f} >= {v.rhs:9.3f}  {v.passed}")

fM = rec.matching.value(f)
_, opt = brute_force_opt(inst, f)
print()
print(f"f(M) = {fM:.3f} <= f(OPT) = {opt:.3f} <= dual cost = {cert.cost:.3f}")
print(f"certified ratio {cert.cost / fM:.3f}, realized ratio {opt / fM:.3f}")
