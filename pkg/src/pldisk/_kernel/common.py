"""Calling convention shared by the compiled and pure-Python integrator cores.

Both backends expose ``integrate_raw`` with the same positional signature and
identical numerics (same arithmetic in the same order), so results agree to
the last bit and the backends are interchangeable.
"""

# Vector-field codes.
FIELD_TAU = 0   # interior, rescaled time: (v, -mu*u*(1-u)*(D+2*alpha*u))
FIELD_X = 1     # interior, physical space: (v/(D+2*alpha*u), -mu*u*(1-u))
FIELD_U1 = 2    # chart covering u -> +inf
FIELD_V1 = 3    # chart covering u -> -inf
FIELD_U2 = 4    # chart covering v -> +inf
FIELD_V2 = 5    # chart covering v -> -inf

CHART_FIELDS = (FIELD_U1, FIELD_V1, FIELD_U2, FIELD_V2)

# cfg vector layout (length NCFG, float64).
CFG_STOP_U_AXIS = 0    # 1.0: stop at a v=0 crossing (interior fields)
CFG_U_AXIS_SIGN = 1    # -1/0/+1: required sign of u at the stopping crossing
CFG_U_AXIS_MIN_DT = 2  # crossings with |t-t0| below this never stop
CFG_STOP_SING = 3      # 1.0: stop when u crosses -D/(2*alpha) (interior)
CFG_RHO_ENTER = 4      # interior: stop when (u^4+v^2)^(1/4) exceeds this (0: off)
CFG_RHO_EXIT = 5       # chart: stop when the interior radius drops below this (0: off)
CFG_LAM2_CAP = 6       # chart: stop when |lambda2| exceeds this (0: off)
CFG_SING_GUARD = 7     # x-field: error out when |D+2*alpha*u| < guard (0: default)
CFG_RECORD_CROSS = 8   # 1.0: record every v=0 crossing (interior fields)
CFG_H0 = 9             # initial step size (0: automatic)
NCFG = 10

# targets array: (k, 6) rows [c1, c2, pos_tol, field_tol, H_ref, H_tol].
# H_tol <= 0 disables the first-integral test (mandatory for chart fields).
NTGT = 6

# Status codes returned by integrate_raw.
ST_STEP_LIMIT = 0
ST_T_CAP = 1
ST_U_AXIS = 2
ST_SING_LINE = 3
ST_RHO_ENTER = 4
ST_RHO_EXIT = 5
ST_LAM2_CAP = 6
ST_TARGET = 7
ST_UNDERFLOW = -1
ST_X_SINGULAR = -2
