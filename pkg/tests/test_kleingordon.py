"""Klein-Gordon propagation, covariant residuals, nonrelativistic limit."""

import numpy as np
import pytest

from absqm.errors import ContractViolationError, StabilityError
from absqm.kleingordon import (
    KGField,
    from_envelope,
    kg_evolve,
    kg_extract,
    kg_residuals,
    kg_step,
    nr_limit_compare,
)
from absqm.numerics import DIRICHLET, Grid
from absqm.states import gaussian_packet, plane_wave


def test_plane_wave_dispersion_exact():
    """Each mode rotates at omega = sqrt(c^2 k^2 + c^4) to machine precision
    regardless of step size (up to the interface bound)."""
    g = Grid(-20.0, 20.0, 256)
    c = 3.0
    k = 2.0 * np.pi * 5 / g.length
    psi0 = np.exp(1j * k * g.x)
    omega = np.sqrt(c**2 * k**2 + c**4)
    f = KGField(psi=psi0, dpsi_dt=-1j * omega * psi0, grid=g, c=c)
    dt = 0.5 * g.dx / c
    n = 64
    for _ in range(n):
        f = kg_step(f, dt)
    exact = psi0 * np.exp(-1j * omega * n * dt)
    assert np.max(np.abs(f.psi - exact)) < 1e-6 * omega * n * dt / 100
    assert np.max(np.abs(f.psi - exact)) < 1e-10


def test_charge_conserved():
    g = Grid(-20.0, 20.0, 256)
    f = from_envelope(gaussian_packet(g, sigma=2.0, momentum=0.3), c=5.0)
    q0 = f.charge()
    for state in kg_evolve(f, dt=0.5 * g.dx / 5.0, t_final=0.5, snapshot_every=16):
        assert state.charge() == pytest.approx(q0, rel=1e-12)


def test_charge_with_constant_gauge_potential():
    g = Grid(-20.0, 20.0, 256)
    w = gaussian_packet(g, sigma=2.0)
    base = from_envelope(w, c=5.0)
    f = KGField(psi=base.psi, dpsi_dt=base.dpsi_dt, grid=g, c=5.0, a0=0.7, a1=0.2)
    q0 = f.charge()
    for _ in range(50):
        f = kg_step(f, 0.5 * g.dx / 5.0)
    assert f.charge() == pytest.approx(q0, rel=1e-10)


def test_cfl_contract():
    g = Grid(-20.0, 20.0, 256)
    f = from_envelope(gaussian_packet(g, sigma=2.0), c=5.0)
    with pytest.raises(StabilityError):
        kg_step(f, 2.0 * g.dx / 5.0)
    with pytest.raises(ValueError):
        kg_step(f, -0.1)


def test_field_validation():
    g = Grid(-20.0, 20.0, 256)
    with pytest.raises(ValueError):
        KGField(psi=np.zeros(g.n), dpsi_dt=np.zeros(g.n), grid=g, c=-1.0)
    gd = Grid(-20.0, 20.0, 256, DIRICHLET)
    with pytest.raises(ContractViolationError):
        KGField(psi=np.zeros(gd.n), dpsi_dt=np.zeros(gd.n), grid=gd, c=1.0)


def test_extraction_positive_frequency_envelope():
    """For positive-frequency data, eps = u0 + c^2 reduces to the local
    Schrodinger energy (here ~ kinetic, O(1)) instead of O(c^2)."""
    g = Grid(-20.0, 20.0, 512)
    c = 10.0
    f = from_envelope(gaussian_packet(g, sigma=2.0, momentum=0.3), c=c)
    kg = kg_extract(f)
    # the division by rho makes u0/u1 noisy just above the flag threshold;
    # judge the physics where the density is resolved
    ok = kg.r_amp**2 > 1e-6 * np.max(kg.r_amp**2)
    assert np.max(np.abs(kg.eps[ok])) < 1.0  # not O(c^2) = 100
    assert np.max(np.abs(kg.u1[ok] - 0.3)) < 1e-6


def test_covariant_residuals_second_order():
    """rel2/rel3 residuals are dominated by the centered time differences of
    the snapshot spacing and drop by ~16 when the spacing is quartered."""
    g = Grid(-20.0, 20.0, 512)
    c = 5.0
    f = from_envelope(gaussian_packet(g, sigma=2.0, momentum=0.3), c=c)
    dt = 0.25 * g.dx / c
    t_final = 128 * dt  # multiple of both snapshot spacings: uniform snapshots

    def median_residuals(snapshot_every):
        traj = kg_evolve(f, dt=dt, t_final=t_final, snapshot_every=snapshot_every)
        rep = kg_residuals(traj)
        return np.median(rep.mass_shell), np.median(rep.continuity)

    # spacings small against the rest period 2 pi / c^2, so the centered
    # differences are in their asymptotic regime
    coarse = median_residuals(8)
    fine = median_residuals(2)
    for rc, rf in zip(coarse, fine):
        order = np.log(rc / rf) / np.log(4.0)
        assert order > 1.8


def test_residuals_validation():
    g = Grid(-20.0, 20.0, 256)
    f = from_envelope(gaussian_packet(g, sigma=2.0), c=5.0)
    with pytest.raises(ContractViolationError):
        kg_residuals([f, kg_step(f, 1e-3)])
    f1 = kg_step(f, 1e-3)
    f2 = kg_step(f1, 2e-3)
    with pytest.raises(ContractViolationError):
        kg_residuals([f, f1, f2])


@pytest.fixture(scope="module")
def nr_report():
    g = Grid(-20.0, 20.0, 512)
    w0 = gaussian_packet(g, sigma=2.0, momentum=0.3)
    return nr_limit_compare(w0, [5.0, 10.0, 20.0, 40.0], t_final=0.5)


def test_nr_limit_quadratic_convergence(nr_report):
    assert np.all(np.diff(nr_report.distances) < 0.0)
    assert 1.7 <= nr_report.exponent <= 2.3


def test_nr_limit_eps_agreement_at_c20(nr_report):
    # the combined density-weighted distance already bounds the eps part
    i = int(np.argmin(np.abs(nr_report.c_values - 20.0)))
    assert nr_report.distances[i] < 1e-2


def test_nr_limit_bandwidth_contract():
    g = Grid(-20.0, 20.0, 512)
    w0 = gaussian_packet(g, sigma=0.3, momentum=3.0)  # broadband envelope
    with pytest.raises(ContractViolationError):
        nr_limit_compare(w0, [2.0, 4.0])


def test_from_envelope_matches_schrodinger_rate():
    """d psi/dt at t=0 equals -i c^2 psi + (i/2) psi'': removing the rest
    rotation leaves the free Schrodinger right-hand side."""
    g = Grid(-20.0, 20.0, 256)
    w = gaussian_packet(g, sigma=1.5, momentum=0.4)
    c = 7.0
    f = from_envelope(w, c)
    from absqm.numerics import derivative

    expected = -1j * c**2 * w.psi + 0.5j * derivative(derivative(w.psi, g, 1), g, 1)
    assert np.max(np.abs(f.dpsi_dt - expected)) < 1e-12
