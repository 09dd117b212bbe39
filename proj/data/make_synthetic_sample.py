#!/usr/bin/env python3
"""Writes a synthetic trace file in the Intel Lab record format.

Each line: date time epoch moteid temperature humidity light voltage.
Temperatures follow a shared daily cycle plus per-mote offsets and slow
local drift, with the kinds of defects the real file has: dropped epochs,
out-of-range readings, repeated epochs and a truncated line.
"""

import argparse
import datetime as dt

import numpy as np

MOTES = [1, 2, 3, 4, 7, 8, 9, 10]
EPOCH_SECONDS = 31
START = dt.datetime(2004, 2, 28, 0, 58, 46)


def temperatures(rng, epochs):
    t = np.arange(epochs, dtype=float)
    day = 86400 / EPOCH_SECONDS
    shared = 19.5 + 3.2 * np.sin(2 * np.pi * t / day - 1.1) + 0.6 * np.sin(2 * np.pi * t / (3.1 * day))
    out = {}
    for mote in MOTES:
        offset = rng.normal(0.0, 0.8)
        drift = sum(
            rng.normal(0.0, 0.25) * np.cos(2 * np.pi * t * f / epochs + rng.uniform(0, 2 * np.pi))
            for f in (1, 2, 3, 5))
        noise = np.zeros(epochs)
        for i in range(1, epochs):
            noise[i] = 0.9 * noise[i - 1] + rng.normal(0.0, 0.01)
        out[mote] = np.round((shared + offset + drift + noise) / 0.0098) * 0.0098
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--epochs", type=int, default=2400)
    parser.add_argument("--seed", type=int, default=20040228)
    parser.add_argument("--out", default="intel_format_synthetic_sample.txt")
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    temps = temperatures(rng, args.epochs)
    lines = []
    for e in range(1, args.epochs + 1):
        stamp = START + dt.timedelta(seconds=EPOCH_SECONDS * (e - 1))
        for mote in MOTES:
            if rng.random() < 0.01:
                continue
            temp = temps[mote][e - 1]
            if rng.random() < 0.0008:
                temp = 122.153
            jitter = dt.timedelta(microseconds=int(rng.integers(0, 900000)))
            humidity = 38.0 - 0.8 * (temp - 19.5) + rng.normal(0.0, 0.3)
            light = max(0.0, 120.0 + rng.normal(0.0, 15.0))
            voltage = 2.7 - 0.00003 * e + rng.normal(0.0, 0.002)
            line = (f"{(stamp + jitter).strftime('%Y-%m-%d %H:%M:%S.%f')} {e} {mote} "
                    f"{temp:.4f} {humidity:.4f} {light:.2f} {voltage:.5f}")
            lines.append(line)
            if rng.random() < 0.0005:
                lines.append(line)
    lines.insert(len(lines) // 2, "2004-02-28 13:02:11.4051 317 3")
    with open(args.out, "w") as f:
        f.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
