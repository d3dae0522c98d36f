# %% [markdown]
# # Screening and the two remedial plans
#
# A synthetic week of kinetic energy with a low-inertia dip is screened
# hour by hour. Violations become events, and each event is covered either
# by reducing the largest unit or by an EPC injection shared over the links.

# %%
import numpy as np

from lowinertia.core import HourlySeries
from lowinertia.planner import NORDIC_LINKS, detect_events, plan_di, plan_epc, screen

t = np.arange(24 * 7)
e_k = HourlySeries(0, tuple(170.0 - 45.0 * np.exp(-(((t - 80) / 14.0) ** 2))))
flags = screen(e_k, 1450.0, mode="curve")
events = detect_events(flags)
print(events)

# %%
di = plan_di(events, e_k)
epc = plan_epc(flags, e_k, NORDIC_LINKS)
print("DI reduction:", di.active_hours, "h,", di.energy_mwh / 1000, "GWh")
print("EPC:", epc.active_hours, "h,", epc.energy_mwh / 1000, "GWh")
