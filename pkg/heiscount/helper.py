import csv
import json
import sys

import numpy as np


def deepmerge_dicts(source, destination):
    """
    merges source into destination
    """

    for key, value in source.items():
        if isinstance(value, dict):
            # get node or create one
            node = destination.setdefault(key, {})
            deepmerge_dicts(value, node)
        else:
            destination[key] = value

    return destination


def log(*args, **kwargs):
    # stdout is reserved for reports
    print(*args, file=sys.stderr, flush=True, **kwargs)


def ext_gcd(a, b):
    """
    Returns (g, s, t) with s*a + t*b = g = gcd(a, b) >= 0
    """
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        return -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def smallest_prime_factors(n_max):
    spf = np.zeros(n_max + 1, dtype=np.int64)
    for p in range(2, n_max + 1):
        if spf[p] == 0:
            spf[p::p][spf[p::p] == 0] = p
    return spf


def factorize(n, spf):
    factors = {}
    while n > 1:
        p = int(spf[n])
        factors[p] = factors.get(p, 0) + 1
        n //= p
    return factors


def fit_loglog_slope(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    mask = (x > 0) & (y > 0)
    if mask.sum() < 2:
        return np.nan
    return float(np.polyfit(np.log(x[mask]), np.log(y[mask]), 1)[0])


def format_float(value):
    if value is None:
        return ''
    return repr(float(value))


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(result, path=None):
    text = json.dumps(to_jsonable(result), sort_keys=True, indent=1)
    if path is None:
        sys.stdout.write(text + "\n")
    else:
        with open(path, 'w') as f:
            f.write(text + "\n")


def write_csv(header, rows, path=None):
    if path is None:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return

    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
