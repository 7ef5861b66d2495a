"""
cycap - Benchmark Package
Seeded experiment harness and the exact Held-Karp oracle.
"""
