#!/usr/bin/env python3
"""Independent reference implementation used to freeze the expected fixture outputs.

Evaluates every constraint directly with packaging.version, computes Markov
quantities by counting, and fits the autologistic models with a plain numpy
Newton iteration. Regenerate with:

    python3 tests/reference/reference_pipeline.py tests/fixtures
"""

import json
import math
import sys
from pathlib import Path

import numpy as np
from packaging.version import Version

HORIZONS = (5, 10)
MIN_RELEASES = 25
MIN_STD = 0.25
MAX_ORDER_FRAC = 0.1
SEPARATION = 30.0


def norm(name):
    out, sep = "", False
    for c in name.strip():
        if c in "-_.":
            sep = True
            continue
        if sep and out:
            out += "-"
        sep = False
        out += c.lower()
    return out


OPS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


def split_constraint(text):
    text = text.strip()
    for op in ("<=", ">=", "==", "!=", "<", ">"):
        if text.startswith(op):
            return op, Version(text[len(op):].strip())
    return "==", Version(text)


def build_corpus(db, snapshot):
    hist = {norm(k): [Version(r["version"]) for r in v] for k, v in snapshot["packages"].items()}
    rows = []
    for package in sorted(k for k in db if not k.startswith("$")):
        releases = hist.get(norm(package))
        if releases is None:
            continue
        counts = [0] * len(releases)
        used = 0
        for adv in db[package]:
            if not isinstance(adv, dict) or not adv.get("specs"):
                continue
            affected = [False] * len(releases)
            valid = 0
            for spec in adv["specs"]:
                cons = [split_constraint(c) for c in spec.split(",")]
                if any(not any(r == b for r in releases) for _, b in cons):
                    continue
                valid += 1
                for i, r in enumerate(releases):
                    if all(OPS[op](r, b) for op, b in cons):
                        affected[i] = True
            if valid:
                used += 1
                counts = [c + a for c, a in zip(counts, affected)]
        if used:
            rows.append((package, [1 if c else 0 for c in counts], counts, used))
    return rows


def newton(x, y):
    beta = np.zeros(x.shape[1])

    def ll(b):
        eta = x @ b
        return float(np.sum(y * eta - np.logaddexp(0.0, eta)))

    obj = ll(beta)
    for _ in range(200):
        mu = 1.0 / (1.0 + np.exp(-(x @ beta)))
        grad = x.T @ (y - mu)
        hess = (x * (mu * (1 - mu))[:, None]).T @ x
        step = np.linalg.solve(hess, grad)
        scale = 1.0
        while ll(beta + scale * step) < obj and scale > 1e-15:
            scale /= 2
        new = beta + scale * step
        new_obj = ll(new)
        done = abs(new_obj - obj) < 1e-10 and np.max(np.abs(new - beta)) < 1e-8
        beta, obj = new, new_obj
        if np.max(np.abs(beta)) > SEPARATION:
            return None
        if done:
            return beta, obj
    return None


def design(w, order, start):
    x = np.array([[1.0] + [w[i - j] for j in range(1, order + 1)] for i in range(start, len(w))])
    y = np.array([float(w[i]) for i in range(start, len(w))])
    return x, y


def fit(w, order, start):
    x, y = design(w, order, start)
    if np.linalg.matrix_rank(x) < x.shape[1] or len(set(y)) < 2:
        return None
    return newton(x, y)


def select_order(w):
    alpha = math.floor(MAX_ORDER_FRAC * len(w) + 1e-9)
    best = None
    for order in range(1, alpha + 1):
        res = fit(w, order, alpha)
        if res is None:
            continue
        aic = 2 * (order + 1) - 2 * res[1]
        if best is None or aic < best[1] - 1e-10:
            best = (order, aic)
    return None if best is None else best[0]


def pstd(v):
    m = sum(v) / len(v)
    return math.sqrt(sum((a - m) ** 2 for a in v) / len(v))


def forecast(w, t, order):
    r = len(w)
    res = fit(w[: r - t], order, order)
    if res is None:
        return None
    beta = res[0]
    probs, errs = [], []
    for i in range(r - t, r):
        eta = beta[0] + sum(beta[j] * w[i - j] for j in range(1, order + 1))
        p = 1.0 / (1.0 + math.exp(-eta))
        probs.append(p)
        errs.append(abs(w[i] - p))
    acc = sum((p >= 0.5) == (a == 1) for p, a in zip(probs, w[r - t:])) / t
    train = w[: r - t]
    ones = sum(train)
    guess = 1 if 2 * ones >= len(train) else 0
    naive = sum(a == guess for a in w[r - t:]) / t
    return dict(mean=sum(errs) / t, median=float(np.median(errs)), max=max(errs), acc=acc, naive=naive)


def f6(x):
    return "%.6f" % x


def main(out_dir):
    out = Path(out_dir)
    db = json.loads((out / "fixture_db.json").read_text())
    snapshot = json.loads((out / "fixture_snapshot.json").read_text())
    rows = build_corpus(db, snapshot)

    lines = ["package,r,m,w,counts"]
    for package, w, counts, used in rows:
        lines.append(f"{package},{len(w)},{used},{''.join(map(str, w))},{';'.join(map(str, counts))}")
    (out / "expected_corpus.csv").write_text("\n".join(lines) + "\n")

    lines = ["package,r,p_uncond,p_11,p_00,flags"]
    for package, w, _, _ in sorted(rows):
        n = [[0, 0], [0, 0]]
        for a, b in zip(w, w[1:]):
            n[a][b] += 1
        p11 = f6(n[1][1] / (n[1][0] + n[1][1])) if n[1][0] + n[1][1] else ""
        p00 = f6(n[0][0] / (n[0][0] + n[0][1])) if n[0][0] + n[0][1] else ""
        flags = "|".join(f for f, v in (("p11_undefined", p11), ("p00_undefined", p00)) if not v)
        lines.append(f"{package},{len(w)},{f6(sum(w) / len(w))},{p11},{p00},{flags}")
    (out / "expected_markov.csv").write_text("\n".join(lines) + "\n")

    reports = []
    for package, w, _, _ in sorted(rows):
        if len(w) < MIN_RELEASES:
            continue
        order = select_order(w)
        if order is None:
            continue
        for t in HORIZONS:
            if len(w) <= t + order or pstd(w[: len(w) - t - order]) < MIN_STD:
                continue
            rep = forecast(w, t, order)
            if rep is not None:
                reports.append((package, t, order, len(w), rep))

    lines = ["package,t,order,r,mean_abs_error,median_abs_error,max_abs_error,accuracy,naive_accuracy,flags"]
    for package, t, order, r, rep in reports:
        lines.append(",".join([package, str(t), str(order), str(r), f6(rep["mean"]), f6(rep["median"]),
                               f6(rep["max"]), f6(rep["acc"]), f6(rep["naive"]), ""]))
    (out / "expected_forecast.csv").write_text("\n".join(lines) + "\n")

    lines = ["t,packages,mean_abs_error,median_abs_error,max_abs_error,accuracy,naive_accuracy"]
    for t in sorted({rep[1] for rep in reports}):
        sel = [rep[4] for rep in reports if rep[1] == t]
        avg = lambda k: sum(s[k] for s in sel) / len(sel)
        lines.append(",".join([str(t), str(len(sel))] + [f6(avg(k)) for k in ("mean", "median", "max", "acc", "naive")]))
    (out / "expected_forecast.summary.csv").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "fixtures")
