#!/usr/bin/env python3
"""Prints high-precision reference values for the task-loss tests.

Computed with mpmath at 50 digits, independently of the C++ code; the printed
constants are frozen into tests/test_mtl.cpp. Re-run only to double-check:

    python3 tests/oracle/gen_mtl_oracle.py
"""

import mpmath as mp

mp.mp.dps = 50


def show(name, value):
    print(f"{name} = {mp.nstr(value, 25)}")


# Dynamic weight average, ratios w=(1,2), temperature 2, two tasks:
# lambda_i = 2 * exp(w_i/T) / sum_k exp(w_k/T)
e1 = mp.e ** (mp.mpf(1) / 2)
e2 = mp.e ** (mp.mpf(2) / 2)
show("dwa_lambda1", 2 * e1 / (e1 + e2))
show("dwa_lambda2", 2 * e2 / (e1 + e2))

# Uncertainty weighting at its stationary point log_sigma = log L for
# L=(1,2): value = sum_i (1 + log L_i).
show("uw_stationary_value", 2 + mp.log(2))

# Focal loss, p_t=0.9, gamma=2, alpha=1: -(1-p)^2 log p.
show("focal_p09_g2", -(mp.mpf(1) - mp.mpf("0.9")) ** 2 * mp.log(mp.mpf("0.9")))

# Cross-entropy of the uniform 5-class distribution: log 5.
show("ce_uniform5", mp.log(5))

# Geometric-dwell self-loops for mean dwells 13 and 826 frames.
show("selfloop_d13", 1 - mp.mpf(1) / 13)
show("selfloop_d826", 1 - mp.mpf(1) / 826)
