"""Column layout of the per-sample quadratic-form record.

Both backends write the same columns; callers index with these constants.
All quantities are evaluated at a diagonal W = diag(lam), lam descending,
with kappa = 1 / lam and S = sigma_k(kappa).
"""

TOTAL = 0           # F^{ab,cd} xi_ab xi_cd, direct contraction
TOTAL_SPLIT = 1     # -(I1' + I2 + I3) / S^2
TOTAL_MAG = 2       # sum of |terms| of the direct contraction, divided by S^2
SPLIT_MAG = 3       # (|I1'| + |I2| + |I3|) / S^2 with inner term magnitudes
I1P = 4
I1 = 5
I2 = 6
I3 = 7
I3_REWRITE = 8
I3_MAG = 9
J1 = 10
J2 = 11
J3 = 12
K1 = 13
GRAD = 14           # sum_a F^{aa} xi_aa
TRACE = 15          # sum_a F^{aa}
FVAL = 16
GM_LEFT = 17        # bracketed diagonal expression
GM_RIGHT = 18       # -I1'
GM_MAG = 19
A11 = 20            # F^{11} xi_11^2 / lam_1
BDIAG = 21          # sum_{a>=2} F^{aa} xi_aa^2 / lam_a
SIGRATIO_MIN = 22   # min_{a>=2} (s_{k-1}(kappa|a1) - r s_{k-1}(kappa|a)) / s_{k-1}(kappa|a)
F1MONO_MIN = 23     # min_{a>=2} (F^{aa} lam_a / lam_1 - F^{11}) / F^{11}
SCALE = 24          # F * ||xi||_F^2 / lam_n^2
XI_NORM2 = 25       # ||xi||_F^2
NFIELDS = 26

NAMES = (
    "total", "total_split", "total_mag", "split_mag", "I1prime", "I1", "I2",
    "I3", "I3_rewrite", "I3_mag", "J1", "J2", "J3", "K1", "grad_contraction",
    "trace_F", "F", "gm_left", "gm_right", "gm_mag", "a11", "bdiag",
    "sigratio_min", "f1mono_min", "scale", "xi_norm2",
)

# GLZ record
GLZ_LHS = 0
GLZ_RHS = 1
GLZ_SCALE = 2
GLZ_NFIELDS = 3
