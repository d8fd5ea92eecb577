#!/usr/bin/env python3
"""Refinement study for the three absolute residuals.

Evolves a chirped Gaussian in a locally linear potential on a ladder of
(dx, dt) -> (dx/2, dt/4) refinements and prints the measured orders.
"""

import argparse

import numpy as np

from absqm.absolute import mass_shell_norm, residual_continuity, residual_force
from absqm.numerics import Grid, antiderivative_periodic, derivative
from absqm.schrodinger import EvolutionSpec, evolve
from absqm.states import gaussian_packet


def flat_force_potential(g: Grid, e0: float) -> np.ndarray:
    t = np.clip((np.abs(g.x) - 10.0) / 4.0, 0.0, 1.0)
    bump = 1.0 - t * t * (3.0 - 2.0 * t)
    return antiderivative_periodic(e0 * (bump - bump.mean()), g)


def residual_triplet(n: int, dt: float, e0: float, t_final: float):
    g = Grid(-20.0, 20.0, n)
    a0 = flat_force_potential(g, e0)
    w0 = gaussian_packet(g, sigma=1.5, momentum=0.6, chirp=0.1)
    traj = evolve(w0, EvolutionSpec(dt=dt, t_final=t_final, a0=a0),
                  snapshot_every=5)
    procs = traj.processes()
    return (
        float(np.median([mass_shell_norm(p) for p in procs[1:-1]])),
        float(np.median(residual_continuity(traj, use_stored_rhs=False).values)),
        float(np.median(residual_force(traj, derivative(a0, g, 1),
                                       use_stored_rhs=False).values)),
    )


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--levels", type=int, default=3)
    ap.add_argument("--n0", type=int, default=256)
    ap.add_argument("--dt0", type=float, default=0.02)
    ap.add_argument("--e0", type=float, default=0.05)
    ap.add_argument("--t-final", type=float, default=0.5)
    args = ap.parse_args()

    names = ("mass_shell", "continuity", "force")
    prev = None
    print(f"{'n':>6} {'dt':>10} " + " ".join(f"{s:>12}" for s in names))
    for level in range(args.levels):
        n = args.n0 * 2**level
        dt = args.dt0 / 4**level
        res = residual_triplet(n, dt, args.e0, args.t_final)
        line = f"{n:>6} {dt:>10.2e} " + " ".join(f"{r:>12.3e}" for r in res)
        if prev is not None:
            orders = [np.log(p / r) / np.log(4.0) for p, r in zip(prev, res)]
            line += "   orders: " + ", ".join(f"{o:.2f}" for o in orders)
        print(line)
        prev = res


if __name__ == "__main__":
    main()
