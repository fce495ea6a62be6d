"""Spectrum of the internally damped rod across damping levels.

Sweeps the uniform damping coefficient through the regimes the package
distinguishes: lightly damped (conjugate pairs), the overdamped window
(purely real spectrum), and heavy damping where one eigenvalue branch
collapses onto the accumulation point -E/a while the other runs off to
-infinity with the mode number.

Run:  python3 demos/beam_spectrum.py
"""

import numpy as np

import specdamp as sd


def describe(E, a, N=16):
    spec = sd.BeamSpec(E=E, patches=(sd.Patch(a, 0.0, 1.0),), N=N)
    model = sd.beam_assemble(spec)
    rep = sd.solve_qep(model)
    lams = rep.eigenvalues
    nonreal = int(np.count_nonzero(np.abs(lams.imag) > 0))
    margin = sd.check_overdamping(model).margin
    print(f"E={E:g}  a={a:g}  N={N}")
    print(f"  overdamping margin {margin:+.6f} "
          f"({'all real' if nonreal == 0 else f'{nonreal} nonreal'})")
    print(f"  |lambda| floor: bound {rep.bound.value:.6f}, attained {rep.min_abs:.6f}")
    closest = lams[np.argsort(np.abs(lams + E / a))][:4]
    print(f"  four eigenvalues closest to -E/a = {-E / a:g}:")
    for lam in closest:
        print(f"    {lam.real:+.8f} {lam.imag:+.8f}i")
    print()


def accumulation(E=1.0, a=2.0):
    spec = sd.BeamSpec(E=E, patches=(sd.Patch(a, 0.0, 1.0),), N=8)
    acc = sd.accumulation_experiment(spec, (8, 16, 32, 64))
    print(f"eigenvalues within {acc.epsilon:g} of -E/a = {acc.points[0]:g} "
          f"as the truncation order grows:")
    for order, count, near in zip(acc.orders, acc.counts[:, 0], acc.nearest[:, 0]):
        print(f"  N={order:3d}: {count:3d} eigenvalues, nearest at distance {near:.2e}")
    print(f"  counts nondecreasing: {acc.counts_nondecreasing}")


def main():
    for a in (0.2, 0.5, 0.85, 2.0, 10.0):
        describe(1.0, a)
    accumulation()


if __name__ == "__main__":
    main()
