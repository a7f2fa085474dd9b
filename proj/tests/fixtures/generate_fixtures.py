#!/usr/bin/env python3
"""Regenerates the closed-form expectation tables used by the acceptance suite.

SC amplifier, output noise at the end of phase 2 (exact beta factors, no
large-gain approximations):

    beta_ota|1 = Av^2 / (Av + ain + aL)
    beta_sw|1  = Av (ain + aL) / (Av + ain + aL)
    D          = Av + aL (Av + ain + 1) + ain
    beta_ota|2 = (Av + ain + 1)^2 / D
    beta_sw|2  = Av / ((ain + aL + ain aL) D)
    total      = kB T / C2 * (gamma (bo1 + bo2) + bs1 + bs2)

Track & hold, noise sampled on CL at the end of phase 2:

    beta_sw|1  = Av + ain + 1
    beta_ota   = (Av + ain + 1)^2 / D
    beta_sw|2  = (Av + ain) / (aL D)

with Av = C1/C2, ain = Cin/C2, aL = CL/C2.
"""

import json

KB = 1.380649e-23
T = 300.0
C2 = 0.5e-12
CIN = 20e-15


def sc_amplifier(av, gamma, al):
    ain = CIN / C2
    d = av + al * (av + ain + 1.0) + ain
    bo1 = av * av / (av + ain + al)
    bs1 = av * (ain + al) / (av + ain + al)
    bo2 = (av + ain + 1.0) ** 2 / d
    bs2 = av / ((ain + al + ain * al) * d)
    beta_ota = bo1 + bo2
    beta_sw = bs1 + bs2
    total = KB * T / C2 * (gamma * beta_ota + beta_sw)
    return {
        "av": av,
        "gamma": gamma,
        "alpha_l": al,
        "c1_f": av * C2,
        "cl_f": al * C2,
        "beta_ota": beta_ota,
        "beta_sw": beta_sw,
        "total_variance_v2": total,
    }


def track_hold(av, gamma, al):
    ain = CIN / C2
    d = av + al * (av + ain + 1.0) + ain
    bs1 = av + ain + 1.0
    beta_ota = (av + ain + 1.0) ** 2 / d
    bs2 = (av + ain) / (al * d)
    beta_sw = bs1 + bs2
    total = KB * T / C2 * (gamma * beta_ota + beta_sw)
    return {
        "av": av,
        "gamma": gamma,
        "alpha_l": al,
        "c1_f": av * C2,
        "cl_f": al * C2,
        "beta_ota": beta_ota,
        "beta_sw": beta_sw,
        "total_variance_v2": total,
    }


def main():
    amp = [sc_amplifier(av, g, 1.0) for av in (1.0, 2.0, 4.0, 8.0) for g in (0.0, 1.0, 2.0)]
    th = [track_hold(1.0, g, al) for al in (0.25, 0.5, 1.0, 2.0) for g in (0.0, 1.0, 2.0)]
    header = {"temperature_k": T, "c2_f": C2, "cin_f": CIN}
    with open("sc_amplifier_cases.json", "w") as f:
        json.dump({**header, "cases": amp}, f, indent=1)
        f.write("\n")
    with open("track_hold_cases.json", "w") as f:
        json.dump({**header, "cases": th}, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
