"""The Gaussian toolbox behind the gate, piece by piece.

Walks through the primitive operations: squeezed-state preparation, beam
splitters, homodyne conditioning, and a single measurement-induced squeezing
stage assembled by hand from those primitives -- the building block that the
gate uses once per interferometer arm.
"""

import numpy as np

from qndsim import (
    beam_splitter,
    displace,
    homodyne,
    loss_channel,
    squeeze,
    vacuum_state,
    variance_to_db,
)

rng = np.random.default_rng(7)

print("== squeezed vacuum ==")
state = squeeze(vacuum_state(1), 0, 0.5756462732485114)  # -5 dB in x
print(f"Var(x) = {state.cov[0, 0]:.5f} ({variance_to_db(state.cov[0, 0]):+.2f} dB)")
print(f"Var(p) = {state.cov[1, 1]:.5f} (pure state: product of variances = "
      f"{state.cov[0, 0] * state.cov[1, 1]:.5f})")

print("\n== loss degrades squeezing ==")
lossy = loss_channel(state, 0, 0.93)
print(f"after 7% loss: Var(x) = {lossy.cov[0, 0]:.5f} "
      f"({variance_to_db(lossy.cov[0, 0]):+.2f} dB)")

print("\n== homodyne conditioning on an entangled pair ==")
pair = squeeze(vacuum_state(2), 0, 0.5756, angle=0.0)
pair = squeeze(pair, 1, 0.5756, angle=np.pi / 2)
pair = beam_splitter(pair, 0, 1, 0.5)
print(f"joint Var(x of kept mode) before measuring: {pair.cov[2, 2]:.5f}")
outcome = homodyne(pair, 0, 0.0, rng)
print(f"measured x = {outcome.value:+.4f}; conditional Var(x) = "
      f"{outcome.reduced_state.cov[0, 0]:.5f} (< 1: quadratures were correlated)")

print("\n== one measurement-induced squeezing stage ==")
# Squeeze an arbitrary input in x by sqrt(R) without any in-line nonlinearity:
# mix with an x-squeezed ancilla, homodyne the p quadrature of one port and
# displace the other port's p by a scaled copy of the outcome.
R = 0.25
gain = -np.sqrt((1.0 - R) / R)
signal = displace(vacuum_state(1), 0, 2.0, 1.0)

# attach the ancilla as mode 1
stage = vacuum_state(2)
stage.mean[:2] = signal.mean
stage.cov[:2, :2] = signal.cov
stage = squeeze(stage, 1, 0.5756462732485114, angle=0.0)

# ancilla-reflecting beam splitter of reflectivity R, then measure + feed forward
stage = beam_splitter(stage, 1, 0, R, signs=(1, -1, 1, 1))
outcome = homodyne(stage, 0, np.pi / 2, rng)
kept = displace(outcome.reduced_state, 0, 0.0, gain * outcome.value)

print(f"input:  mean = (2.000, 1.000), Var(x) = 1.000")
print(f"output: mean = ({kept.mean[0]:+.4f}, {kept.mean[1]:+.4f}),"
      f" Var(x) = {kept.cov[0, 0]:.5f}")
print(f"expected x gain -sqrt(R) = {-np.sqrt(R):.3f}, p gain 1/sqrt(R) = {1/np.sqrt(R):.3f}")
print(f"Var(x) target R + (1-R)*10^-0.5 = {R + (1 - R) * 10**-0.5:.5f}")
# The x quadrature shrank by sqrt(R) (plus the finite-squeezing penalty) and
# p grew by 1/sqrt(R): a tunable squeezer controlled entirely by a passive
# beam-splitter ratio.
