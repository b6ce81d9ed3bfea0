"""Fading models: how far a first-order recursion follows the Jakes spectrum.

Run with ``python demos/fading_models.py``. Prints the ideal Jakes
autocorrelation next to what AR processes of increasing order produce.
"""

import numpy as np

from coopcdma.fading import FadingProcess, jakes_autocorrelation, make_ricean

fdt = 0.04
lags = np.array([0, 1, 2, 5, 10, 20])

print(f"normalized Doppler fdT = {fdt}")
print("lag  Jakes   " + "  ".join(f"AR({L})" for L in (1, 2, 4)))
rows = {L: FadingProcess.from_doppler(fdt, 32, rng=L, order=L).run(20_000) for L in (1, 2, 4)}
for k in lags:
    cols = []
    for h in rows.values():
        acf = np.mean(h[k:] * np.conj(h[: h.shape[0] - k])).real
        cols.append(f"{acf:6.3f}")
    print(f"{k:3d}  {jakes_autocorrelation(fdt, k):6.3f}  " + "  ".join(cols))

# A Ricean inter-user link: fixed LoS phasor plus a scattered AR process.
link = make_ricean(8.0, fdt, rng=0)
h = link.run(50_000)
print(f"\nRicean link K = {link.k_factor_db:.1f} dB, mean power {np.mean(abs(h) ** 2):.3f}, "
      f"LoS share {link.los_power:.3f}")
