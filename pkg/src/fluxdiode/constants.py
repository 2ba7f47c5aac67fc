"""Physical constants (CODATA 2018). Single source for the whole package."""

HBAR = 1.054571817e-34       # reduced Planck constant, J s
H_PLANCK = 6.62607015e-34    # Planck constant, J s
E_CHARGE = 1.602176634e-19   # elementary charge, C
PHI_0 = H_PLANCK / (2.0 * E_CHARGE)  # superconducting flux quantum, Wb
