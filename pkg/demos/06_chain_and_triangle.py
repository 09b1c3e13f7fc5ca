"""Two larger networks: the GHZ chain and the EPR triangle.

The chain joins n - 1 copies of an n-party GHZ source with Bell
measurements so that the first party of copy 1 and the last party of copy
n-1 become entangled. The triangle network distributes three EPR pairs
among three ququart parties.
"""

from netbell.audit import CHAIN_THRESHOLD, chain_audit, triangle_audit

for n in (3, 4):
    q = chain_audit(n)
    b = chain_audit(n, mode="box", samples=100, seed=0)
    print(f"chain n={n}: quantum max {q.max_chsh:.6f} over {q.total} tuples; "
          f"box max {b.max_chsh:.6f} over 100 samples; bound {CHAIN_THRESHOLD:.4f}")

t = triangle_audit()
print(f"triangle: {t.above} of {t.total} tuples above 2.5 ({t.skipped} have zero probability); "
      f"biseparable box ceiling 512; per test {t.above_by_test()}")
