"""A single learning curve crossing from the noiseless to the noisy regime.

With zero ridge and a small label noise, the excess error first drops at the
fast noiseless rate, then flattens onto a plateau of height ~ sigma^2 once
the sample count passes sigma^(-1/(alpha min(r,1))).  The noise is present
from the start; its effect simply is not felt until enough low-variance
directions must be fit.
"""

import numpy as np

from krr_regimes import (
    PowerLawParams,
    excess_error_closed,
    noise_crossover_n,
    power_law_spectrum,
)

ALPHA, R, SIGMA = 2.0, 0.5, 0.03
spectrum = power_law_spectrum(PowerLawParams(ALPHA, R, 200_000))
predicted = noise_crossover_n(ALPHA, R, SIGMA, float("inf"))
print(f"predicted crossover scale: n ~ sigma^(-1/(alpha r)) = {predicted:.0f}\n")

print(f"{'n':>8} {'excess':>12} {'local slope':>12}")
ns = np.geomspace(10, 1e4, 13)
excess = np.array([excess_error_closed(int(n), 0.0, SIGMA, spectrum).total for n in ns])
slopes = np.diff(np.log(excess)) / np.diff(np.log(ns))
for i, n in enumerate(ns):
    marker = "  <- crossover scale" if predicted / 2 <= n <= predicted * 2 else ""
    local = f"{slopes[min(i, len(slopes) - 1)]:+.2f}"
    print(f"{int(n):>8} {excess[i]:>12.3e} {local:>12}{marker}")

plateau = excess[-1]
print(f"\nplateau height {plateau:.3e} vs sigma^2 = {SIGMA**2:.3e} "
      f"(ratio {plateau / SIGMA**2:.2f})")
