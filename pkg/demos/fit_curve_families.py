"""
Fitting the five curve families
===============================

Each complexity basket is represented by one curve family. This script
builds noiseless step counts from known coefficients, fits every family,
and shows that the generating family wins with an essentially zero error.
"""

import numpy as np

from tracefit import TraceSeries, fit
from tracefit.classify import format_sci
from tracefit.models import MODELS

# Sizes 5..100, the schedule used throughout.
x = np.arange(5, 101, 5)

###############################################################################
# A merge-sort-like cost, (a x + b) log(c x + d)
truth = MODELS["NLOGN"]
params = (7.75e3, -1.26e4, 0.212, 4.39)
series = TraceSeries.from_arrays(x, truth.values(params, x), label="synthetic nlogn")

for model in MODELS.values():
    res = fit(model, series)
    if res.ok:
        coeffs = " ".join(f"{n}={format_sci(p)}" for n, p in zip(model.param_names, res.params))
        print(f"{model.token:<12} mse={format_sci(res.mse):<9} {coeffs}")
    else:
        print(f"{model.token:<12} NA ({res.reason.value})")

###############################################################################
# The fitter is scale-aware: multiplying every cost by k multiplies each
# family's MSE by k**2, so the ranking is unchanged. The exact fit is left
# out: its MSE is float rounding, and a ratio of two rounding errors means
# nothing.
k = 1e6
noise = 1e-12 * np.mean(series.y ** 2)
for model in MODELS.values():
    a, b = fit(model, series), fit(model, series.scaled(k))
    if a.ok and b.ok and a.mse > noise:
        print(f"{model.token:<12} mse ratio after scaling by 1e6: {b.mse / a.mse:.6e}")
