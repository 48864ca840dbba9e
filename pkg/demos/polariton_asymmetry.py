"""Why the upper polariton is broader than the lower one.

With vibrations the absorption of the molecules leans towards higher
energies, so the upper branch overlaps more of it.  The script compares the
two linewidths at zero detuning, finds the detuning where they become equal
and prints the transmission spectrum around both peaks.
"""

import numpy as np

from polaritonix import (
    CavityParams,
    MoleculeParams,
    PolaritonModel,
    ThermalEnv,
    VibrationalMode,
    equal_linewidth_detuning,
)

cav = CavityParams(omega_c=0.0, kappa_c=2.0, g_N=10.0)
mol = MoleculeParams(omega_m=0.0, kappa_tilde=0.06, modes=(VibrationalMode(1.0, 2.0, 4.0),))
env = ThermalEnv(1.0)


def main():
    model = PolaritonModel(cav, mol, env)
    lower, upper = model.polariton_pair(0.0)
    gamma_minus, gamma_plus = model.linewidths(0.0)
    print(f"zero detuning: lower at {lower.position:.3f} (width {gamma_minus:.3f}), "
          f"upper at {upper.position:.3f} (width {gamma_plus:.3f})")

    crossing = equal_linewidth_detuning(cav, mol, env, model=model)
    print(f"equal linewidths once the cavity sits {crossing:.3f} w_v above the exciton")

    spectrum = model.evaluator(0.0)
    for w in np.linspace(lower.position - 4, upper.position + 4, 25):
        bar = "#" * int(60 * spectrum(w) / upper.height)
        print(f"{w:8.2f} {bar}")


if __name__ == "__main__":
    main()
