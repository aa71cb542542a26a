"""Channels out of a non-factor algebra can dissipate less than kT log 2.

A state on C ⊕ M_2, viewed as a channel into C, has a unique input state, so
nothing can be optimized: its free energy is fixed by how much weight falls on
the M_2 block, where the GNS bimodule has multiplicity 2.

Run: python3 demos/below_the_bound.py
"""

import numpy as np

from chanthermo.algebra import MultiMatrixAlgebra
from chanthermo.channel import channel_from_function
from chanthermo.thermo import ThermoConfig, landauer_verdict

src, tgt = MultiMatrixAlgebra((1, 2)), MultiMatrixAlgebra((1,))
cfg = ThermoConfig()

for t in (0.05, 0.25, 0.5, 0.75, 0.95):
    def measure(x, t=t):
        return tgt.element([np.array([[t * x.blocks[0][0, 0] + (1 - t) * np.trace(x.blocks[1]) / 2]])])

    alpha = channel_from_function(src, tgt, measure)
    report = landauer_verdict(alpha, tgt.tracial_state(), cfg)
    print(f"t = {t:4.2f}  multiplicity {report.multiplicity.tolist()}  "
          f"-F_α / kT log 2 = {-report.free_energy_infimum / cfg.landauer_unit:.3f}  "
          f"bound satisfied: {report.bound_satisfied}")

# As t -> 0 the channel approaches one through M_2 alone, at kT log 2; any weight
# on the classical block pulls the free energy below it. The output state must
# be faithful, so t = 0 itself is excluded.
