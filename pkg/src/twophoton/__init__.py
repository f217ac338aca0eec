"""Two-photon scattering amplitudes via commutator series."""
