"""Reference whitepoints for the shipped data files.

Independent of the C++ code path: reads the CSVs with numpy, interpolates with
numpy.interp and evaluates

  * the rectangle-rule response of the all-ones reflectance on the
    380-730 nm @ 1 nm grid (the value the library must reproduce), and
  * an adaptive high-precision quadrature (mpmath) of the continuous
    product of the piecewise-linear interpolants over [380, 730], plus the
    half-cell endpoint correction that separates the rectangle rule from
    the integral.

Run from the repository root:  python3 tests/oracles/whitepoint.py
"""

import pathlib

import mpmath
import numpy as np

DATA = pathlib.Path(__file__).resolve().parents[2] / "data"


def load(name):
    rows = [
        line.strip().split(",")
        for line in (DATA / name).read_text().splitlines()
        if line.strip() and not line.startswith("#")
    ]
    table = np.array([[float(x) for x in r] for r in rows[1:]])
    return table[:, 0], table[:, 1:]


def main():
    lam_cmf, cmf = load("cmf_judd_vos_1978_2deg.csv")
    grid = np.arange(380.0, 730.0 + 0.5, 1.0)
    for illum in ("illuminant_d65.csv", "illuminant_a.csv", "illuminant_f11.csv"):
        lam_e, e = load(illum)
        e = e[:, 0]
        rect = []
        quad = []
        for i in range(3):
            s = np.interp(grid, lam_cmf, cmf[:, i]) * np.interp(grid, lam_e, e)
            rect.append(float(np.sum(s) * 1.0))

            def f(x, i=i):
                x = float(x)
                return np.interp(x, lam_cmf, cmf[:, i]) * np.interp(x, lam_e, e)

            knots = sorted(set(np.concatenate([lam_cmf, lam_e, [380.0, 730.0]])))
            knots = [k for k in knots if 380.0 <= k <= 730.0]
            mpmath.mp.dps = 30
            integral = mpmath.quad(f, knots)
            quad.append(float(integral) + 0.5 * (s[0] + s[-1]))
        print(illum, "rect", [repr(v) for v in rect], "quad+ends", [repr(v) for v in quad])


if __name__ == "__main__":
    main()
