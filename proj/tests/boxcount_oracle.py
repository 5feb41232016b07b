"""Recount boxes from `fifdim build` output and compare with `fifdim boxdim`.

usage: boxcount_oracle.py FIFDIM CONFIG WORKDIR
"""

import json
import math
import pathlib
import subprocess
import sys

import numpy as np


def counts(values, width, m):
    cols = 1 << m
    step = (len(values) - 1) // cols
    delta = width / cols
    total = 0
    for k in range(cols):
        block = values[k * step:(k + 1) * step + 1]
        total += 1 + math.floor((block.max() - block.min()) / delta + 1e-9)
    return total


def main():
    fifdim, config, work = sys.argv[1], sys.argv[2], pathlib.Path(sys.argv[3])
    work.mkdir(parents=True, exist_ok=True)
    subprocess.run([fifdim, "build", "--config", config, "--out", str(work)], check=True, stdout=subprocess.DEVNULL)
    subprocess.run([fifdim, "boxdim", "--config", config, "--out", str(work)], check=True, stdout=subprocess.DEVNULL)

    data = np.loadtxt(work / "fif.csv", delimiter=",", skiprows=1)
    width = data[-1, 0] - data[0, 0]
    values = data[:, 1]
    table = np.loadtxt(work / "boxdim.csv", delimiter=",", skiprows=1, ndmin=2)

    bad = 0
    for m, _, count, _ in table:
        mine = counts(values, width, int(m))
        if mine != int(count):
            print(f"m={int(m)}: tool {int(count)} oracle {mine}")
            bad += 1
    ms = table[:, 0]
    logs = np.log([counts(values, width, int(m)) for m in ms])
    slope = np.polyfit(ms * math.log(2), logs, 1)[0]
    meta = json.loads((work / "fif.meta.json").read_text())
    print(f"{len(ms)} levels, oracle slope {slope:.6f}, {meta['iterations']} iterations")
    sys.exit(1 if bad else 0)


if __name__ == "__main__":
    main()
