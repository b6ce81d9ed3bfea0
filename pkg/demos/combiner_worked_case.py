"""The three combiners on a two-chip example where the partner relayed an error.

The user symbol is +1 with channel 0.5; the partner detected -1 and sent it
on an orthogonal code with channel 1. The conventional LLR trusts the
partner and is pulled to the wrong sign; the modified LLR hedges.
"""

import numpy as np

from coopcdma.cdma import SpreadingSequence
from coopcdma.combine import (
    CombinerInput,
    ModifiedLlrConfig,
    llr_combine,
    modified_llr_combine,
    mrc_combine,
)

s1 = SpreadingSequence(np.array([1.0, 1.0]) / np.sqrt(2))
s2 = SpreadingSequence(np.array([1.0, -1.0]) / np.sqrt(2))
block = (0.5 * s1.chips - 1.0 * s2.chips)[None, :]
inp = CombinerInput(block, np.array([0.5]), np.array([1.0]), s1, s2, sigma_e_sq=1.0)

print(f"MRC (real part)   {mrc_combine(inp).real.item():+.4f}")
print(f"conventional LLR  {llr_combine(inp).item():+.4f}")
for pe in (0.0, 0.01, 0.025, 0.1, 0.25, 0.5):
    value = modified_llr_combine(inp, ModifiedLlrConfig(pe)).item()
    print(f"modified LLR pe={pe:<5}  {value:+.4f}")
