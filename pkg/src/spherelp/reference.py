"""Embedded reference data: record packing densities and published LP bounds.

`RECORD_DENSITY[n]` is the density of the best packing known in dimension n
and `LP_BOUND[n]` the published value of the linear-programming upper bound,
for n = 1..36.  In dimensions 8 and 24 the two coincide (to the listed
digits): the bound is sharp there.
"""

from __future__ import annotations

import hashlib
import json

__all__ = [
    "RECORD_DENSITY",
    "LP_BOUND",
    "record_density",
    "lp_bound_reference",
    "compare_to_reference",
    "reference_checksum",
]

RECORD_DENSITY = {
    1: 1.000000000,
    2: 0.906899682,
    3: 0.740480489,
    4: 0.616850275,
    5: 0.465257613,
    6: 0.372947545,
    7: 0.295297873,
    8: 0.253669507,
    9: 0.145774875,
    10: 0.099615782,
    11: 0.066238027,
    12: 0.049454176,
    13: 0.0320142921,
    14: 0.0216240960,
    15: 0.0168575706,
    16: 0.0147081643,
    17: 0.0088113191,
    18: 0.0061678981,
    19: 0.0041208062,
    20: 0.0033945814,
    21: 0.0024658847,
    22: 0.0024510340,
    23: 0.0019053281,
    24: 0.0019295743,
    25: 0.00067721200977,
    26: 0.00026922005043,
    27: 0.00015759439072,
    28: 0.00010463810492,
    29: 0.00003414464690,
    30: 0.00002191535344,
    31: 0.00001183776518,
    32: 0.00001104074930,
    33: 0.00000414068828,
    34: 0.00000176697388,
    35: 0.00000094619041,
    36: 0.00000061614660,
}

LP_BOUND = {
    1: 1.000000000,
    2: 0.906899683,
    3: 0.779746762,
    4: 0.647704966,
    5: 0.524980022,
    6: 0.417673416,
    7: 0.327455611,
    8: 0.253669508,
    9: 0.194555339,
    10: 0.147953479,
    11: 0.111690766,
    12: 0.083775831,
    13: 0.0624817002,
    14: 0.0463644893,
    15: 0.0342482621,
    16: 0.0251941308,
    17: 0.0184640904,
    18: 0.0134853405,
    19: 0.0098179552,
    20: 0.0071270537,
    21: 0.0051596604,
    22: 0.0037259420,
    23: 0.0026842799,
    24: 0.0019295744,
    25: 0.001384190723,
    26: 0.000991023890,
    27: 0.000708229796,
    28: 0.000505254217,
    29: 0.000359858186,
    30: 0.000255902875,
    31: 0.000181708382,
    32: 0.000128843289,
    33: 0.000091235604,
    34: 0.000064522197,
    35: 0.000045574385,
    36: 0.000032153056,
}


def record_density(n):
    if n not in RECORD_DENSITY:
        raise KeyError(f"no record density stored for n={n}")
    return RECORD_DENSITY[n]


def lp_bound_reference(n):
    if n not in LP_BOUND:
        raise KeyError(f"no reference bound stored for n={n}")
    return LP_BOUND[n]


def reference_checksum():
    payload = json.dumps({"record": RECORD_DENSITY, "lp": LP_BOUND},
                         sort_keys=True).encode()
    return hashlib.sha256(payload).hexdigest()


def compare_to_reference(n, bound):
    """Relative deviation of a computed bound from the published value."""
    ref = lp_bound_reference(n)
    rel = (bound - ref) / ref
    return {
        "n": n,
        "computed": bound,
        "reference": ref,
        "relative_deviation": rel,
        "record": record_density(n),
        "sandwiched": bool(record_density(n) <= bound),
    }
