# %% [markdown]
# # Price scenarios from resampled summers
#
# Hourly prices from several summers form one pool. Each replicate draws a
# summer's worth of hours and averages them; the 5th, 50th and 95th
# percentiles of those averages are the low, median and high scenarios.

# %%
import numpy as np

from lowinertia.pricing import REGULATING, PricePool, bootstrap_mean_distribution

rng = np.random.default_rng(7)
pool = PricePool(REGULATING, rng.lognormal(3.4, 0.5, 5 * 2232), years=5)
res = bootstrap_mean_distribution(pool, k=2232, reps=5000, seed=0)
print(f"low {res.p5:.2f}  median {res.p50:.2f}  high {res.p95:.2f} EUR/MWh")

# %%
print(res.histogram_csv(10))
