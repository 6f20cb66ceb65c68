#pragma once

// Values from tests/oracles/compute_oracles.py (40-digit arithmetic), frozen.
namespace oracle {

inline constexpr double x_zp = 5.260690704788381e-16;             // m
inline constexpr double hbar_omega_m_over_kB = 3.384426213264156e-5;  // K
inline constexpr double n_bath_0p4K = 11818.842391431974;
inline constexpr double n_bath_33p83uK = 0.99957859525536;
inline constexpr double hbar_omega_laser = 1.866960390913341e-19;  // J
inline constexpr double phi_ratio = 0.9642813686521126;            // red / blue at the probe detuning
inline constexpr double n_cav_probe = 262895699.126;
inline constexpr double n_cav_cl = 46317905.5519;
inline constexpr double gamma_cl_hz = 5416.1027676;
inline constexpr double spring_cl_hz = -158.4048775;
inline constexpr double gamma_probe_hz = 15.150012066;
inline constexpr double spring_probe_hz = 31.929273445;
inline constexpr double n_min_cl = 0.0034215532118749;
inline constexpr double n_min_probe = 26.996593437759;
inline constexpr double gamma_tilde_hz = 5431.39278;
inline constexpr double omega_tilde_hz = 705073.5243960;
inline constexpr double t_bath_nbar_0p84 = 0.99939644223988;  // K, P_CL = 415 uW
inline constexpr double t_mode_0p84 = 2.842918e-5;            // K

}  // namespace oracle
