"""Charged queries of one k-sample multi-Gibbs call against k independent
single-sample calls, on Zipf-shaped inputs in [0, 16]."""
from zerosum.harness import QUANTUM_NOTE, ledger_scaling_sweep

res = ledger_scaling_sweep(ns=(256, 1024, 4096), ks=(1, 4, 16, 64))
naive = {(n, k): q for n, k, q in res["naive"]["rows"]}
print(f"{'n':>6} {'k':>4} {'multi':>12} {'naive':>12}")
for n, k, q in res["multi"]["rows"]:
    print(f"{n:6d} {k:4d} {q:12d} {naive[n, k]:12d}")
print("fitted exponents, multi:", res["multi"]["exponents"])
print("fitted exponents, naive:", res["naive"]["exponents"])
print(QUANTUM_NOTE)
