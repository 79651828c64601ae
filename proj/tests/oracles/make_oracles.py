"""Independent NumPy reference values for the C++ tests.

Run from the repo root:  python3 tests/oracles/make_oracles.py > tests/oracles/oracles.hpp
"""
import numpy as np


def grid(n, length, origin):
    dx = length / n
    return origin + dx * np.arange(n), dx


def packet(x, dx, c, sigma, p, weight=1.0):
    psi = np.exp(-(x - c) ** 2 / (4 * sigma**2)) * np.exp(1j * p * x)
    return psi * np.sqrt(weight / (np.sum(np.abs(psi) ** 2) * dx))


def wavenumbers(n, dx):
    return 2 * np.pi * np.fft.fftfreq(n, d=dx)


def energy(psi, dx):
    k = wavenumbers(len(psi), dx)
    rho = np.abs(np.fft.fft(psi)) ** 2
    rho /= rho.sum()
    e = k**2 / 2
    mean = np.sum(rho * e)
    return mean, np.sqrt(np.sum(rho * (e - mean) ** 2))


def window(x, c, hw):
    d = x - c
    return np.where(np.abs(d) < hw, np.cos(np.pi * d / (2 * hw)) ** 2, 0.0)


def split_step(psi, x, dx, c, hw, gamma, dt, steps, every):
    k = wavenumbers(len(psi), dx)
    kin = np.exp(-0.5j * k**2 * dt)
    w = window(x, c, hw)
    half = np.exp(-gamma * w * dt / 2)
    n0 = np.sum(np.abs(psi) ** 2) * dx
    out = []
    for s in range(steps + 1):
        if s % every == 0 or s == steps:
            nrm = np.sum(np.abs(psi) ** 2) * dx
            out.append((s * dt, n0 - nrm, 2 * gamma * np.sum(w * np.abs(psi) ** 2) * dx))
        if s < steps:
            psi = half * np.fft.ifft(kin * np.fft.fft(half * psi))
    return out


def emit(name, value):
    print(f"inline constexpr double {name} = {value!r};")


print("#pragma once")
print("// Generated by make_oracles.py; do not edit by hand.")
print()
print("namespace oracle {")
print()

# Packet moments on a small grid.
x, dx = grid(1024, 256.0, -128.0)
psi = packet(x, dx, 3.3, 8.0, 1.5)
rho = np.abs(psi) ** 2 * dx
mean_x = np.sum(rho * x)
emit("kPacketSpread", float(np.sqrt(np.sum(rho * (x - mean_x) ** 2))))
mean_e, spread_e = energy(psi, dx)
emit("kPacketMeanEnergy", float(mean_e))
emit("kPacketEnergySpread", float(spread_e))

# Overlapping weight-0.5 packets, direct summation.
a = packet(x, dx, 0.0, 8.0, 1.5, 0.5)
b = packet(x, dx, 5.0, 8.0, 1.5, 0.5)
emit("kOverlapNorm", float(np.sum(np.abs(a + b) ** 2) * dx))

# Uniform density on a cos^2 window.
c = 0.01
w = window(x, 10.0, 20.0)
emit("kUniformCurrent", float(2 * 0.3 * np.sum(w * c) * dx))

# Independent split-step run with an absorber.
x, dx = grid(512, 256.0, -128.0)
psi = packet(x, dx, -40.0, 4.0, 2.0)
rec = split_step(psi, x, dx, 20.0, 16.0, 0.05, 0.01, 3000, 10)
emit("kSplitStepSamples", len(rec))
emit("kSplitStepMidTime", rec[150][0])
emit("kSplitStepMidCapture", float(rec[150][1]))
emit("kSplitStepFinalCapture", float(rec[-1][1]))
emit("kSplitStepFinalCurrent", float(rec[-1][2]))

# Preset two-pulse geometry: energy spread versus pulse gap.
x, dx = grid(4096, 2048.0, -900.0)
single = packet(x, dx, -104.0, 8.0, 4.0)
emit("kPresetEnergySpread", float(energy(single, dx)[1]))
for gap in (320, 640):
    two = packet(x, dx, -104.0, 8.0, 4.0, 0.5) + packet(x, dx, -104.0 - gap, 8.0, 4.0, 0.5)
    emit(f"kTwoPulseEnergySpreadGap{gap}", float(energy(two, dx)[1]))

# Detector-off transit of the preset packet across [-40, 40], tracked through <x>(t).
k = wavenumbers(len(x), dx)
spectrum = np.fft.fft(single)
times = np.arange(0.0, 60.0, 0.01)
means = []
for t in times:
    p = np.fft.ifft(spectrum * np.exp(-0.5j * k**2 * t))
    means.append(np.sum(np.abs(p) ** 2 * x) * dx)
means = np.array(means)


def crossing(level):
    i = np.argmax(means >= level)
    return times[i - 1] + (level - means[i - 1]) / (means[i] - means[i - 1]) * (times[i] - times[i - 1])


emit("kPresetTransitTime", float(crossing(40.0) - crossing(-40.0)))
print()
print("}  // namespace oracle")
