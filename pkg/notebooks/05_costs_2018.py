# %% [markdown]
# # Summer 2018 cost comparison
#
# The bundled scenario replays the three low-inertia periods of summer
# 2018 (166 hours at 100 MW reduction, 19 GWh of EPC energy) with the
# fixed 2018 prices.

# %%
from importlib import resources

from lowinertia.config import load_config
from lowinertia.pipeline import run_pipeline

path = resources.files("lowinertia") / "data" / "nordic2018" / "scenario.ini"
result = run_pipeline(load_config(path), levels=("median",))
print(result.report.summary())

# %%
e = result.report.entries["median"]
print(f"savings {float(e.savings_eur):,.1f} EUR ({float(e.savings_pct):.2f} %)")
