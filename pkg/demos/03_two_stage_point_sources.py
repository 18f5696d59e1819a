"""
Two-stage reconstruction of three monopoles
===========================================

Direct sampling gives anchors; a pCN Metropolis-Hastings chain anchored there
recovers intensities and refines locations. About 15 s.
"""

import numpy as np

from helmsource import load_bundled, summarize
from helmsource.experiment import anchors_from_peaks, invert, locate, simulate

cfg = load_bundled("example1")
clean, noisy = simulate(cfg)
print("max |u| =", np.max(np.abs(clean.values)).round(4), " noise level", noisy.noise_level)

field, peaks = locate(cfg, noisy)
anchors = anchors_from_peaks(cfg, peaks)
print("DSM anchors:", anchors.tolist())

chain = invert(cfg, noisy, anchors)
s = summarize(chain)
print(f"acceptance rate {chain.acceptance_rate:.4f} over {cfg.pcn.max_iter} steps\n")
print(f"{'parameter':10s} {'CM':>9s} {'std':>8s} {'2.5%':>9s} {'97.5%':>9s}")
for name, m, sd, lo, hi in zip(s.names, s.mean, s.std, s.q025, s.q975):
    if "xi" in name:
        continue  # monopoles: dipole slots are pinned at zero
    print(f"{name:10s} {m:9.4f} {sd:8.4f} {lo:9.4f} {hi:9.4f}")

# The location proposal is an independence draw with std sqrt(sigma) = 0.02,
# far wider than the posterior (about 0.0015), so once the chain has found the
# high-likelihood region most proposals are rejected. The CM still lands
# within a few thousandths of the truth.
