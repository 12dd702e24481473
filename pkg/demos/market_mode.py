"""
Market mode in a synthetic market
=================================

Generate per-second volumes for 30 stocks in five sectors that all feel a
common factor, binarize them, infer equilibrium couplings and look at the
spectrum and the coupling histogram.
"""

import numpy as np

import volising as vi

grid = vi.synth_market_volumes(30, 10, 10_000, sector_blocks=[6] * 5,
                               common_factor_strength=1.0, seed=0,
                               sector_strength=0.1)
print(f"{grid.n_stocks} stocks, {grid.days} days of {grid.day_length} s")

# %%
# A window of 50 s, threshold at half the average volume per window.
sm = vi.build_spin_matrix(grid, vi.MappingParams(dt=50, chi=0.5))
sm, dropped = vi.filter_degenerate(sm)
print(f"{sm.n_samples} samples, dropped {dropped or 'none'}")
m = vi.magnetizations(sm)
print(f"magnetizations in [{m.min():.2f}, {m.max():.2f}]")

# %%
mom = vi.compute_moments(sm)
model = vi.infer_equilibrium(mom)
print(f"significance floor {mom.floor:.4f}")

# %%
# One eigenvalue stands apart and its eigenvector has the same sign on
# every stock: the whole market moves together.
spec = vi.spectral_summary(model.j)
print("top eigenvalues", np.round(spec.eigenvalues[:5], 3))
print(f"ratio {spec.eigenvalues[0] / spec.eigenvalues[1]:.1f}, "
      f"sign uniformity {spec.sign_uniformity:.2f}")

# %%
# The histogram leans positive with a longer right tail.
hist = vi.coupling_histogram(model.j, bins=15)
print(f"mean {hist.mean:.4f}  std {hist.std:.4f}  skewness {hist.skewness:.3f}")
peak = hist.counts.max()
for lo, count in zip(hist.edges[:-1], hist.counts):
    print(f"{lo:+.3f} {'#' * int(40 * count / peak)}")

# %%
# Strongest pairs, as a DOT graph.
edges = vi.top_edges(model, 5)
print(vi.to_dot(edges))
