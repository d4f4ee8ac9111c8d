"""How many antennas does a target BER cost, with and without pilots?

Compares the noncoherent energy design against a pilot-based PAM system at
the same effective rate accounting for training overhead.  On Rayleigh
fading the PAM system without pilots has no phase reference at all (the
channel mean is zero) and never reaches the target.
"""

from simo_energy import (
    DesignConfig,
    EnergyRegions,
    PilotPAM,
    Rician,
    SimScenario,
    design_exact,
    min_antennas,
    pam_constellation,
    rayleigh,
    sigma_from_snr,
)

TARGET = 1e-3
N_MAX = 2048
sigma2 = sigma_from_snr(10.0)


def report(name, scenario):
    n_star = min_antennas(scenario, TARGET, N_MAX)
    rate = scenario.effective_rate
    shown = "NOT_REACHED" if n_star is None else str(n_star)
    print(f"  {name:42s} rate {rate:4.2f} b/sym  n* = {shown}")


print(f"minimum antennas for uncoded BER {TARGET} at 10 dB SNR")

print("Rayleigh fading:")
energy = design_exact(rayleigh(), sigma2, DesignConfig(L=2)).constellation
report(
    "energy design, L=2",
    SimScenario(rayleigh(), sigma2, EnergyRegions(energy), 1, 100_000, seed=7),
)
pam = pam_constellation(2)
report(
    "PAM, no pilots (phase from channel mean)",
    SimScenario(
        rayleigh(), sigma2,
        PilotPAM(pam.amplitudes, 0.0, 1.0, sigma2, coherence_slots=2, pilot_slots=0),
        1, 50_000, seed=7,
    ),
)

print("Rician K = 0 dB, coherence 4 symbols:")
ch = Rician(0.0)
energy_k0 = design_exact(ch, sigma2, DesignConfig(L=2)).constellation
report(
    "energy design, L=2",
    SimScenario(ch, sigma2, EnergyRegions(energy_k0), 1, 100_000, seed=7),
)
report(
    "pilot PAM, T=4, T_l=1 (rate loss 25%)",
    SimScenario(
        ch, sigma2,
        PilotPAM(pam.amplitudes, ch.mu, ch.sigma_h2, sigma2,
                 coherence_slots=4, pilot_slots=1),
        1, 100_000, seed=7,
    ),
)

print()
print("Short coherence makes training expensive; the single-shot energy")
print("scheme needs no pilots and decodes from the average power alone.")
