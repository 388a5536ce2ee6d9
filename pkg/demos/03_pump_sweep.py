"""Noise reduction against pump intensity.

The detector area is fixed while the coherence area grows with the pump.
Below the matching intensity the pixel holds several whole areas plus a
fraction of another; above it the pixel clips a single area and R rises
above the shot-noise level.
"""
from twinbeam import DetectorArm, SourceModel
from twinbeam.collection import PumpMapping, sweep_pump
from twinbeam.simulation import run_sweep

arms = (DetectorArm(0.55), DetectorArm(0.55))
intensities = (0.3, 0.45, 0.6, 0.8, 1.0, 1.25, 1.5, 2.0)
points = sweep_pump(intensities, PumpMapping(), SourceModel(20, 50.9))

print(f"{'pump':>6} {'rho':>6} {'<m>':>8} {'R MC (dB)':>10} {'exact (dB)':>11}")
for row in run_sweep(points, arms, 100_000, seed=11):
    print(f"{row['pump_intensity']:6.2f} {row['rho']:6.2f} {row['abscissa']:8.1f} "
          f"{row['R_dB']:+10.2f} {row['R_exact_dB']:+11.2f}")
