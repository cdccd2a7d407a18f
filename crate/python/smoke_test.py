#!/usr/bin/env python3
"""Smoke test for the qpj_py extension module.

Builds nothing itself: expects `cargo build -p qpj-python` (or --release)
to have produced the cdylib, copies it next to a temp dir as qpj_py.so,
imports it, and exercises the main types and operations end to end.
"""

import math
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def locate_extension():
    candidates = [
        ROOT / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libqpj_py.so", "qpj_py.so", "libqpj_py.dylib")
    ]
    for c in candidates:
        if c.exists():
            return c
    sys.exit("extension not found; run `cargo build -p qpj-python` first")


def main():
    ext = locate_extension()
    tmp = tempfile.mkdtemp(prefix="qpj_py_")
    shutil.copy(ext, pathlib.Path(tmp) / "qpj_py.so")
    sys.path.insert(0, tmp)
    import qpj_py

    print(f"qpj_py {qpj_py.__version__} from {ext}")

    # Bessel sum rule
    total = qpj_py.bessel_j(0, 1.7) ** 2 + 2 * sum(
        qpj_py.bessel_j(n, 1.7) ** 2 for n in range(1, 40)
    )
    assert abs(total - 1.0) < 1e-10, total
    assert abs(qpj_py.coth_safe(1.0) - 1 / math.tanh(1.0)) < 1e-12

    # small undriven system: modest table, fast everything
    config = """
[junction]
gap_left_mev = 0.2
gap_right_mev = 0.2
resistance_kohm = 30
temperature_k = 0.2
[drive]
phase_bias_pi = 0
amplitude_mv = 0
frequency_ghz = 32
[circuit]
inductance_nh = 1.59
capacitance_ff = 637
[numerics]
omega_max = 4.5
base_points = 301
"""
    sys_ = qpj_py.System(config)
    assert abs(sys_.gap_frequency_hz() / 1e9 - 96.72) < 0.01
    assert abs(sys_.resonator_frequency_hz() / 1e9 - 5.0) < 0.01

    # lead Green's function: advanced = conj(retarded) is library-side;
    # check the subgap reality and the f(0) = -1 limit here
    g, f = sys_.green_retarded(0.0)
    assert abs(g) < 1e-4 and abs(f + 1.0) < 1e-4, (g, f)

    # Ambegaokar-Baratoff within half a percent
    t_red = 1.380649e-23 * 0.2 / (0.4e-3 * 1.602176634e-19)
    e_j = sys_.josephson_energy()
    ab = qpj_py.ambegaokar_baratoff_energy(30e3, t_red)
    assert abs(e_j / ab - 1) < 5e-3, (e_j, ab)
    assert sys_.dc_josephson_current() == 0.0  # sin(0)

    # passivity and the inductive sign of the undriven junction
    y = sys_.static_admittance(0.03)
    assert y.real > -1e-6 and y.imag > 0, y
    # drive-off collapse of the harmonic admittance
    y0 = sys_.driven_admittance(0, 0.8)
    ys = sys_.static_admittance(0.8)
    assert abs(y0 - ys) < 1e-10, (y0, ys)
    c0 = sys_.fourier_coeff(0)
    assert abs(c0 - 1.0) < 1e-12, c0
    assert sys_.n_max() == 0

    # polarization table: reality relation and the pair-breaking gap
    pn_p, ps_p = sys_.pi_retarded(1.3)
    pn_m, ps_m = sys_.pi_retarded(-1.3)
    assert abs(pn_m - pn_p.conjugate()) < 1e-8
    assert abs(ps_m - ps_p.conjugate()) < 1e-8
    pn_sub, _ = sys_.pi_retarded(0.5)
    assert abs(pn_sub.imag) < 1e-3 * abs(pn_p.imag)
    kn, _ = sys_.pi_keldysh(0.8)
    assert abs(kn.real) < 1e-9  # purely imaginary

    # resonator: resonance near 5 GHz, Lorentzian line, equilibrium
    # quasitemperature at the lead temperature
    f0, gamma, non_lorentzian, ks = sys_.resonance()
    assert abs(f0 / 1e9 - 5.0) < 0.3, f0
    assert gamma > 0 and not non_lorentzian, (gamma, ks)
    g_r = sys_.g_retarded(0.02)
    assert g_r.imag <= 1e-12
    g_k = sys_.g_keldysh(0, 0.05)
    assert g_k.imag < 0 and abs(g_k.real) < 1e-9 * abs(g_k.imag)
    s21 = sys_.s21(0.05)
    assert abs(s21) < 1.0 + 1e-9
    t_r = sys_.quasitemperature()
    assert abs(t_r - 0.2) < 1e-3, t_r
    p_hot = sys_.heat_power(0.4)
    p_cold = sys_.heat_power(0.1)
    assert p_hot > 0 > p_cold, (p_hot, p_cold)
    residual = sys_.kramers_kronig_residual()
    assert residual < 0.05, residual

    # config validation surfaces as ValueError
    try:
        qpj_py.System("[junction]\nnot_a_key = 1\n")
    except ValueError as e:
        assert "unknown key" in str(e)
    else:
        sys.exit("expected ValueError for unknown key")

    print("smoke test passed: Green's functions, polarization, admittance,")
    print("resonator spectrum, heat flow, quasitemperature all consistent")


if __name__ == "__main__":
    main()
