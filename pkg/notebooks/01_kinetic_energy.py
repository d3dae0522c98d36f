# %% [markdown]
# # Kinetic energy of a synchronous fleet
#
# A small fleet with a single dimensioning unit, run over one day with a
# commitment pattern. Losing that unit also removes its stored energy,
# which is what the N-1 assessment works with.

# %%
import numpy as np

from lowinertia.core import HourlySeries
from lowinertia.inertia import CommitmentSeries, UnitRecord, kinetic_energy_series, n1_kinetic_energy

fleet = [
    UnitRecord("nuclear-1", 1450.0 / 0.9, 6.3, is_dimensioning_incident=True, category="nuclear"),
    UnitRecord("hydro-a", 900.0, 3.0, category="hydro"),
    UnitRecord("hydro-b", 600.0, 2.8, category="hydro"),
    UnitRecord("chp-1", 300.0, 4.0, category="thermal"),
]

# %%
hours = 24
on = {u.unit_id: HourlySeries(0, tuple([True] * hours)) for u in fleet}
on["chp-1"] = HourlySeries(0, tuple(bool(t < 8 or t > 18) for t in range(hours)))
commitment = CommitmentSeries(on, fleet)
e_k = kinetic_energy_series(fleet, commitment)
print(np.round(e_k.values, 3))

# %%
di = fleet[0]
print("pre-fault at hour 12:", e_k.at(12), "GWs")
print(f"after losing {di.unit_id}: {n1_kinetic_energy(e_k.at(12), di):.3f} GWs")
