"""Free energy of a few standard channels, compared against kT log 2.

Run: python3 demos/free_energy_tour.py
"""

import numpy as np

from chanthermo.algebra import MultiMatrixAlgebra, State
from chanthermo.channel import depolarizing_channel, embedding_channel, hybrid_channel, identity_channel, trace_channel
from chanthermo.thermo import ThermoConfig, analyze_channel, channel_entropy, free_energy, free_energy_infimum

rng = np.random.default_rng(0)
cfg = ThermoConfig(beta=1.0)
unit = cfg.landauer_unit

channels = {
    "identity on M2": identity_channel(MultiMatrixAlgebra((2,))),
    "M2 -> M2 ⊗ M3": embedding_channel(2, 3),
    "depolarizing 0.5": depolarizing_channel(0.5),
    "full erasure of a qubit": trace_channel(2),
    "x -> x ⊕ (x ⊗ 1_2)": hybrid_channel(),
}

print(f"{'channel':28s} {'mult':>10s} {'S':>8s} {'-F':>8s} {'-F_inf':>8s}  (-F_inf in units of kT log 2)")
for name, alpha in channels.items():
    phi = alpha.target.random_state(rng)
    data = analyze_channel(alpha, phi)
    f = free_energy(data, cfg)
    inf = free_energy_infimum(alpha, cfg, data.bimodule.multiplicity)
    flag = "" if inf.attained else "  not attained"
    print(f"{name:28s} {str(data.bimodule.multiplicity.tolist()):>10s} {round(channel_entropy(data), 12) + 0.0:8.4f} "
          f"{-f.value:8.4f} {-inf.value:8.4f}  {-inf.value / unit:.3f}{flag}")

# Factorial channels land on log of an integer: the multiplicity of the GNS bimodule.
# The hybrid channel interpolates: its free energy follows the weight of the M2 block.
print()
alpha = hybrid_channel()
for w in (0.1, 0.5, 0.9):
    dens = alpha.target.random_state(rng).densities
    data = analyze_channel(alpha, State(alpha.target, np.array([w, 1 - w]), dens))
    print(f"hybrid, weight {w} on M2:  -F = {-free_energy(data, cfg).value:.6f} = (1 - w) log 2 = {(1 - w) * np.log(2):.6f}")
