#!/usr/bin/env python3
"""Standalone spectral arc length reference.

Direct DFT sum (no FFT), DC normalization, adaptive cutoff and arc length,
written from the definitions. Prints the regression constant for the
200-sample minimum-jerk speed profile and the perturbed comparison values.

Usage: python3 sparc_oracle.py
"""
import math

import numpy as np

PAD = 4
OMEGA_MAX = 15.0
THRESH = 0.05


def next_pow2(n):
    p = 1
    while p < n:
        p *= 2
    return p


def sparc(speed, dt):
    speed = np.asarray(speed, dtype=np.float64)
    n = PAD * next_pow2(len(speed))
    t = np.arange(len(speed))
    mags = []
    for m in range(n // 2 + 1):
        ang = -2.0 * math.pi * m * t / n
        re = float(np.sum(speed * np.cos(ang)))
        im = float(np.sum(speed * np.sin(ang)))
        mags.append(math.hypot(re, im))
    mags = np.array(mags) / mags[0]
    df = 1.0 / (n * dt)
    freqs = np.arange(len(mags)) * df
    in_band = np.nonzero(freqs <= OMEGA_MAX)[0]
    # highest in-band bin whose normalized magnitude still reaches the threshold
    above = [m for m in in_band if m > 0 and mags[m] >= THRESH]
    cut = max(above) if above else 1
    wc = cut * df
    x = freqs[: cut + 1] / wc
    y = mags[: cut + 1]
    arc = float(np.sum(np.sqrt(np.diff(x) ** 2 + np.diff(y) ** 2)))
    return -arc, wc


def min_jerk_speed(samples=200):
    u = np.linspace(0.0, 1.0, samples)
    return 30.0 * u**2 * (1.0 - u) ** 2, 1.0 / (samples - 1)


if __name__ == "__main__":
    s, dt = min_jerk_speed()
    value, wc = sparc(s, dt)
    print(f"minjerk_200 sparc={value!r} omega_c={wc!r}")
    t = np.arange(len(s)) * dt
    for i in range(1, 21):
        a = 0.2 * i
        pv, pwc = sparc(s + a * np.sin(2.0 * math.pi * 8.0 * t), dt)
        print(f"perturbed amp={a:.1f} sparc={pv!r} omega_c={pwc!r} lower={pv < value}")
