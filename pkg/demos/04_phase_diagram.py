"""Regime phase diagram in the (samples, ridge-decay) plane.

Every cell of an (n, ell) grid is classified into one of the four regimes;
the noise-induced and regularization-induced crossover polylines are
computed alongside.  With a small ridge prefactor the regularization
boundary bends, and a single horizontal scan can cross several regimes in
succession (double and triple crossovers).
"""

import numpy as np

from krr_regimes import Region, phase_diagram
from krr_regimes.regimes import write_crossover_lines_csv, write_phase_diagram_csv

SYMBOL = {Region.GREEN_NOISELESS_UNREG: "g", Region.RED_NOISY_UNREG: "r",
          Region.BLUE_NOISELESS_REG: "b", Region.ORANGE_NOISY_REG: "o"}


def show(title, alpha, r, sigma, lambda0, n_max=1e12):
    n_grid = np.geomspace(1, n_max, 49)
    ell_grid = np.linspace(0.0, 2.0 * alpha, 21)
    diagram = phase_diagram(alpha, r, sigma, lambda0, n_grid, ell_grid)
    print(f"{title}  (alpha={alpha}, r={r}, sigma={sigma}, lambda0={lambda0})")
    print("ell")
    for i in reversed(range(len(ell_grid))):
        row = "".join(SYMBOL[lab.region] for lab in diagram.labels[i])
        print(f"{ell_grid[i]:5.2f} {row}")
    print(f"      {'log10 n = 0':<24}-> {np.log10(n_max):.0f}")
    ell_star, exponent = diagram.lines.optimal_point
    print(f"asymptotic optimum: ell* = {ell_star:.3f}, excess decay exponent {exponent:.3f}\n")
    return diagram


show("main setting (unit prefactor)", 2.0, 0.5, 0.1, 1.0, n_max=1e6)
diagram = show("small prefactor, weak noise: green-blue-orange scans",
               2.0, 0.5, 1e-5, 1e-4)
show("small prefactor, strong noise: green-red-orange-blue scans",
     2.0, 0.5, 0.1, 1e-4, n_max=1e30)

write_phase_diagram_csv(diagram, "phase_diagram_grid.csv")
write_crossover_lines_csv(diagram.lines, "phase_diagram_lines.csv")
print("wrote phase_diagram_grid.csv, phase_diagram_lines.csv")
