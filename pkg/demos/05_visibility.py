"""Noise robustness: smallest visibility that still beats a CHSH criterion.

Prints the thresholds and writes plot-ready CSV curves (v, max CHSH).
"""

import csv

import numpy as np

from netbell.audit import CFACT_THRESHOLD, CHAIN_THRESHOLD
from netbell.optimize import chain_family, ghz_inflation_family, pair_family, visibility_threshold

TSIRELSON = 2 * np.sqrt(2)

res = visibility_threshold(pair_family(), 2.0)
print(f"EPR Werner, criterion 2:        v = {res.threshold:.5f} (1/sqrt2 = {1 / np.sqrt(2):.5f})")

for theta in (np.pi / 8, np.pi / 4, 3 * np.pi / 8):
    a = visibility_threshold(ghz_inflation_family(theta, "activated"), CFACT_THRESHOLD).threshold
    w = visibility_threshold(ghz_inflation_family(theta, "werner"), CFACT_THRESHOLD).threshold
    print(f"GHZ inflation theta={theta:.4f}:  local noise v = {a:.5f}, whole-source Werner v = {w:.5f}")
print(f"prediction sqrt(2.5/(2 sqrt2)) = {np.sqrt(2.5 / TSIRELSON):.5f}")

res = visibility_threshold(chain_family(3), CHAIN_THRESHOLD)
print(f"chain n=3, criterion {CHAIN_THRESHOLD:.4f}: overall V = {res.threshold:.5f}, "
      f"per copy {np.sqrt(res.threshold):.5f}")

grid = np.linspace(0.5, 1.0, 51)
families = {"pair": pair_family(), "inflation": ghz_inflation_family(np.pi / 8), "chain3": chain_family(3)}
with open("visibility_curves.csv", "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(["v"] + list(families))
    for v in grid:
        w.writerow([f"{v:.3f}"] + [f"{f(v):.6f}" for f in families.values()])
print("wrote visibility_curves.csv")
