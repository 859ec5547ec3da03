"""Random-field Ising ground states, Glauber dynamics and polluted bootstrap percolation."""

from ._core import (
    ConfigError,
    Lattice,
    SnapshotError,
    bp_final,
    config_hash,
    critical_time,
    engines,
    fnv1a64,
    glauber_at,
    glauber_evolve,
    ground_state,
    hamiltonian,
    open_closed_probs,
    read_snapshot,
    run,
    sample_field,
    sample_sites,
    spin_snapshot_bytes,
    sweep,
)

__all__ = [
    "ConfigError",
    "Lattice",
    "SnapshotError",
    "bp_final",
    "config_hash",
    "critical_time",
    "engines",
    "fnv1a64",
    "glauber_at",
    "glauber_evolve",
    "ground_state",
    "hamiltonian",
    "open_closed_probs",
    "read_snapshot",
    "run",
    "sample_field",
    "sample_sites",
    "spin_snapshot_bytes",
    "sweep",
]
__version__ = "0.1.0"
