# %% [markdown]
# # Frequency after losing the largest unit
#
# The regression gives the instantaneous frequency deviation directly from
# the lost power and the remaining kinetic energy. The simulator gives a
# full trajectory and is tuned to agree with the regression near the
# security threshold.

# %%
from lowinertia.frequency import (
    UNDER_FREQUENCY,
    FrequencyModelConfig,
    ifd_regression,
    load_disturbance_points,
    r_squared,
    regression_threshold,
    rocof,
    simulate_response,
    total_ifd_from_nominal,
)

pts = load_disturbance_points()
print(f"{len(pts)} recorded disturbances, R2 of the published line {r_squared(pts, UNDER_FREQUENCY):.3f}")
print(f"threshold for 1450 MW: {regression_threshold(1450.0):.2f} GWs")

# %%
cfg = FrequencyModelConfig()
for ek in (120.0, 135.0, 150.0, 170.0):
    dp = 1450.0
    reg = total_ifd_from_nominal(ifd_regression(dp, ek, UNDER_FREQUENCY))
    traj = simulate_response(cfg, dp, ek)
    print(f"{ek:6.1f} GWs  RoCoF {rocof(dp, ek):.3f} Hz/s  regression {reg:.3f} Hz  "
          f"simulated {traj.ifd_from_nominal():.3f} Hz  nadir at {traj.nadir_time:.1f} s")

# %% [markdown]
# An emergency power step from the HVDC links raises the nadir.

# %%
for p in (0.0, 150.0, 400.0):
    print(p, "MW ->", round(simulate_response(cfg.with_epc_power(p), 1450.0, 130.0).nadir, 4), "Hz")
