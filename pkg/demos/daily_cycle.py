"""
Daily activity cycle
====================

Trading activity follows the same profile every day. The periodogram of a
volume series shows it as a peak at one cycle per day.
"""

import numpy as np

import volising as vi
from volising.analyze import is_local_max

day = 10_000
grid = vi.synth_market_volumes(5, 10, day, seed=3)
freq, power = vi.periodogram(grid)

k = int(np.argmin(np.abs(freq - 1 / day)))
print(f"bin {k}: f = {freq[k]:.2e} Hz (1/day = {1 / day:.2e})")
print(f"power there {power[k]:.3g}, neighbours {power[k - 1]:.3g} and {power[k + 1]:.3g}")
print("local maximum:", is_local_max(power, k))

# %%
# Ten strongest non-zero frequencies. The daily line and its first harmonics
# dominate.
order = np.argsort(power[1:])[::-1][:10] + 1
for i in order:
    print(f"period {1 / freq[i]:9.1f} s  power {power[i]:.3g}")

# %%
# One stock on its own has the same line, buried in more noise.
freq1, power1 = vi.periodogram(grid, stock=0)
print(f"single stock local maximum at 1/day: {is_local_max(power1, k)}")
