#!/usr/bin/env python3
"""Regenerates the CSV fixtures under crates/cli/tests/fixtures.

Meta-grid fixtures are synthetic cross-sections whose per-model mean and
sample standard deviation of percentage returns equal the Return and Vol
columns of the reference summaries. Cell values are written so that
100 * (benchmark - model) / benchmark reproduces those returns.
"""

import pathlib

import numpy as np

OUT = pathlib.Path(__file__).resolve().parent.parent / "crates/cli/tests/fixtures"

MACRO_RMSE = {
    "HNN": (11.8, 13.9),
    "BART": (10.6, 11.0),
    "DeepAR": (3.8, 10.1),
    "BLR": (5.2, 13.8),
    "NN_G": (-1.7, 21.6),
    "NN_SV": (-1.7, 21.6),
}

M4_OWA = {
    # model: (MASE return, MASE vol, OWA return, OWA vol)
    "118": (11.6, 71.3, 15.7, 42.3),
    "245": (10.7, 71.2, 16.4, 46.8),
    "72": (10.5, 72.6, 15.8, 44.1),
    "237": (9.5, 73.4, 18.7, 44.6),
    "69": (9.3, 73.2, 14.9, 47.3),
    "36": (8.7, 73.5, 15.4, 49.2),
    "132": (7.9, 75.5, 12.2, 54.5),
    "235": (7.6, 75.0, 15.4, 49.9),
    "78": (7.1, 74.1, 13.2, 43.0),
    "ARIMA": (7.0, 75.6, 8.2, 59.0),
    "238": (6.9, 74.4, 15.5, 45.9),
    "239": (6.5, 74.9, 14.4, 45.6),
    "39": (5.7, 74.5, 9.8, 48.3),
    "ETS": (5.2, 77.4, 10.8, 57.2),
    "104": (4.8, 77.7, 9.2, 57.9),
}


def standardize(x):
    return (x - x.mean()) / x.std(ddof=1)


def model_value(bench, ret):
    value = bench * (1.0 - ret / 100.0)
    assert value > 0, (bench, ret)
    return value


def macro_grid(rng):
    targets = ["GDP", "UNRATE", "INFL", "SP500", "HOUST"]
    cells = [(t, h, w) for t in targets for h in ("1", "4") for w in ("2019Q4", "2022Q4")]
    base = standardize(rng.standard_normal(len(cells)))
    bench = rng.uniform(0.5, 3.0, len(cells))
    lines = ["target,horizon,design,metric,model,value"]
    for i, (t, h, w) in enumerate(cells):
        lines.append(f"{t},{h},{w},RMSE,AR,{bench[i]:.10f}")
    for model, (ret, vol) in MACRO_RMSE.items():
        z = base[rng.permutation(len(cells))]
        for i, (t, h, w) in enumerate(cells):
            v = model_value(bench[i], ret + vol * z[i])
            lines.append(f"{t},{h},{w},RMSE,{model},{v:.10f}")
    (OUT / "macro_rmse.csv").write_text("\n".join(lines) + "\n")


def m4_grid(rng, n_series=200):
    # reflected lognormal: long left tail, bounded right tail keeps returns < 100
    base = standardize(-rng.lognormal(0.0, 0.8, n_series))
    naive2 = rng.uniform(0.4, 2.5, n_series)
    lines = ["target,horizon,design,metric,model,value"]
    for s in range(n_series):
        sid = f"M{s + 1:05d}"
        lines.append(f"{sid},18,monthly,MASE,Naive2,{naive2[s]:.10f}")
        lines.append(f"{sid},18,monthly,OWA,Naive2,{1.0:.10f}")
    for model, (mr, mv, orr, ov) in M4_OWA.items():
        zm = base[rng.permutation(n_series)]
        zo = base[rng.permutation(n_series)]
        for s in range(n_series):
            sid = f"M{s + 1:05d}"
            lines.append(f"{sid},18,monthly,MASE,{model},{model_value(naive2[s], mr + mv * zm[s]):.10f}")
            lines.append(f"{sid},18,monthly,OWA,{model},{model_value(1.0, orr + ov * zo[s]):.10f}")
    (OUT / "m4_owa.csv").write_text("\n".join(lines) + "\n")


def hand_losses():
    # squared-error returns of M over AR: [2, -1, 2, 1]
    rows = [("2019Q1", 3, 1), ("2019Q2", 1, 2), ("2019Q3", 4, 2), ("2019Q4", 2, 1)]
    text = "period,AR,M\n" + "".join(f"{p},{a},{m}\n" for p, a, m in rows)
    (OUT / "hand_losses.csv").write_text(text)


def quarterly(rng):
    periods = [f"{y}Q{q}" for y in range(2015, 2025) for q in range(1, 5)]
    n = len(periods)
    actual = np.cumsum(rng.standard_normal(n)) * 0.5 + 2.0
    prev = np.concatenate([[actual[0]], actual[:-1]])
    models = {
        "AR": prev,
        "AR_TWIN": prev,
        "RF": actual + rng.standard_normal(n) * 0.4,
        "NN": actual + rng.standard_normal(n) * 0.7 + 0.1,
        "SPF": 0.5 * prev + 0.5 * actual + rng.standard_normal(n) * 0.2,
    }
    lines = ["period,actual," + ",".join(models)]
    for t, p in enumerate(periods):
        vals = ",".join(f"{models[m][t]:.6f}" for m in models)
        lines.append(f"{p},{actual[t]:.6f},{vals}")
    (OUT / "quarterly_forecasts.csv").write_text("\n".join(lines) + "\n")


MANIFESTS = {
    "macro_rmse.toml": ("meta_grid", "external", "AR", None),
    "m4_owa.toml": ("meta_grid", "external", "Naive2", None),
    "hand_losses.toml": ("losses", "squared_error", "AR", 1),
    "quarterly_forecasts.toml": ("forecasts", "squared_error", "AR", 1),
}


def manifests():
    for name, (kind, rule, bench, horizon) in MANIFESTS.items():
        text = (
            "format_version = 1\n"
            f'input_kind = "{kind}"\n'
            f'scoring_rule = "{rule}"\n'
            f'benchmark_id = "{bench}"\n'
        )
        if horizon is not None:
            text += f"horizon = {horizon}\n"
        (OUT / name).write_text(text)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20240601)
    macro_grid(rng)
    m4_grid(rng)
    hand_losses()
    quarterly(rng)
    manifests()


if __name__ == "__main__":
    main()
