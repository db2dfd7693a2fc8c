"""CSV column contracts for each figure id.

These mirror the documented dataset schemas of the simulation CLI; the
renderers consume only these files, never the simulation code.
"""

CAPACITY_BY_DELAY = [
    "n_modes", "reflectivity", "m_pulses", "delay",
    "capacity_mean", "capacity_stderr", "realizations",
]
IPC_BY_DEGREE = [
    "n_modes", "reflectivity", "m_pulses", "degree",
    "capacity_sum", "total_ipc", "normalized_ipc", "realizations", "scenario",
]
SNR_BY_DELAY = [
    "n_modes", "reflectivity", "m_pulses", "delay",
    "snr_db_mean", "snr_db_stderr", "fitted_slope_db", "fitted_height_db",
    "realizations",
]

FIGURE_SCHEMAS = {
    "fig2a": CAPACITY_BY_DELAY,
    "fig3a": CAPACITY_BY_DELAY,
    "fig2b": IPC_BY_DEGREE,
    "fig4a": IPC_BY_DEGREE,
    "fig4b": IPC_BY_DEGREE,
    "ipc": IPC_BY_DEGREE,
    "fig3b": SNR_BY_DELAY,
    "fig3c": SNR_BY_DELAY,
    "fig5": SNR_BY_DELAY,
    "snr": SNR_BY_DELAY,
}


class SchemaError(ValueError):
    """A CSV does not carry the columns its figure id requires."""
