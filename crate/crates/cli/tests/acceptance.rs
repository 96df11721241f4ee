//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fail.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use forecast_risk::{
    dm_statistic, drawdown, edge_ratio, meta_returns, omega_ratio, sharpe_ratio,
    simulate_dm_penalty, simulate_null_edge, sortino_ratio, CellKey, ExtReal, HacConfig, LossLaw,
    LossPanel, MetaCell, MetaGrid, Normalization, Report, ReturnSeries, ScoringRule, SimConfig,
    VarianceConvention,
};
use forecast_risk_cli::{cmd_evaluate, cmd_meta, EvaluationRequest, MetaRequest};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn secs(d: Duration) -> String {
    format!("{:.3}s", d.as_secs_f64())
}

// ---- independent oracles -------------------------------------------------

fn o_mean(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for v in x {
        s += v;
    }
    s / x.len() as f64
}

fn o_ratio(num: f64, den: f64) -> ExtReal {
    if den == 0.0 {
        if num == 0.0 {
            ExtReal::Undefined
        } else if num > 0.0 {
            ExtReal::PosInf
        } else {
            ExtReal::NegInf
        }
    } else {
        ExtReal::Finite(num / den)
    }
}

fn o_sharpe(x: &[f64], divisor_offset: usize) -> ExtReal {
    let m = o_mean(x);
    let mut ss = 0.0;
    for v in x {
        ss += (v - m) * (v - m);
    }
    o_ratio(m, (ss / (x.len() - divisor_offset) as f64).sqrt())
}

fn o_sortino(x: &[f64]) -> ExtReal {
    let m = o_mean(x);
    let mut ss = 0.0;
    for v in x {
        let d = v.min(0.0);
        ss += d * d;
    }
    o_ratio(m, (ss / x.len() as f64).sqrt())
}

fn o_omega(x: &[f64]) -> ExtReal {
    let mut up = 0.0;
    let mut down = 0.0;
    for v in x {
        if *v > 0.0 {
            up += v;
        } else {
            down -= v;
        }
    }
    if up == 0.0 && down == 0.0 {
        ExtReal::Finite(1.0)
    } else {
        o_ratio(up, down)
    }
}

fn o_maxdd(x: &[f64]) -> f64 {
    let mut cum = vec![0.0];
    for v in x {
        cum.push(cum.last().unwrap() + v);
    }
    let mut best = 0.0f64;
    for u in 0..cum.len() {
        for t in u..cum.len() {
            best = best.max(cum[u] - cum[t]);
        }
    }
    best
}

fn close(a: ExtReal, b: ExtReal, tol: f64) -> bool {
    match (a, b) {
        (ExtReal::Finite(x), ExtReal::Finite(y)) => (x - y).abs() <= tol * y.abs().max(1.0),
        (x, y) => x == y,
    }
}

fn random_series(rng: &mut ChaCha8Rng, min_len: usize, max_len: usize) -> Vec<f64> {
    let n = rng.random_range(min_len..=max_len);
    let shift = rng.random_range(-1.0..1.0);
    let scale = 10f64.powf(rng.random_range(-2.0..2.0));
    (0..n)
        .map(|_| scale * (rng.random::<f64>() - 0.5 + shift * 0.5))
        .collect()
}

// ---- criteria ---------------------------------------------------------------

fn c1_meta_grid_sharpe() -> Outcome {
    let start = Instant::now();
    let req = MetaRequest::new(fixture("macro_rmse.csv"), fixture("macro_rmse.toml"));
    let report = cmd_meta(&req).expect("meta on macro grid fixture");
    let elapsed = start.elapsed();
    let panel = &report.panels()[0];
    let printed = [
        ("HNN", 0.85),
        ("BART", 0.97),
        ("DeepAR", 0.38),
        ("BLR", 0.38),
        ("NN_G", -0.08),
        ("NN_SV", -0.08),
    ];
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (model, want) in printed {
        let got = panel.value("Sharpe", model).and_then(ExtReal::finite);
        let diff = got.map_or(f64::INFINITY, |g| (g - want).abs());
        worst = worst.max(diff);
        parts.push(format!("{model} {:.4}", got.unwrap_or(f64::NAN)));
    }
    let pass = panel.models.len() == 6 && worst <= 0.01 && elapsed < Duration::from_secs(1);
    outcome(
        pass,
        format!(
            "{} models; {}; max |diff| {worst:.4}; {}",
            panel.models.len(),
            parts.join(", "),
            secs(elapsed)
        ),
    )
}

fn c2_worked_example() -> Outcome {
    let key = CellKey {
        target: "GDP".into(),
        horizon: "1".into(),
        design: "window".into(),
        metric: "RMSE".into(),
    };
    let grid = MetaGrid::new(
        vec![
            MetaCell {
                key: key.clone(),
                model: "AR".into(),
                value: 1.0,
            },
            MetaCell {
                key,
                model: "M".into(),
                value: 0.90,
            },
        ],
        "AR",
    )
    .unwrap();
    let r = meta_returns(&grid, "M", Normalization::RatioPercent).unwrap();
    outcome(r.returns == vec![10.0], format!("return {:?}", r.returns))
}

fn c3_dm_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut failures = 0;
    for _ in 0..1000 {
        let x = random_series(&mut rng, 5, 200);
        let t = x.len() as f64;
        let r = ReturnSeries::from_values(x.clone()).unwrap();
        let dm = dm_statistic(&r, &HacConfig::no_correction())
            .unwrap()
            .statistic
            .to_f64();
        let lib = t.sqrt()
            * sharpe_ratio(&r, VarianceConvention::PopulationT)
                .unwrap()
                .to_f64();
        let oracle = t.sqrt() * o_sharpe(&x, 0).to_f64();
        for reference in [lib, oracle] {
            let rel = ((dm - reference) / reference).abs();
            worst = worst.max(rel);
            if rel.is_nan() || rel > 1e-12 {
                failures += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures == 0 && elapsed < Duration::from_secs(5),
        format!(
            "1000 series, max rel err {worst:.2e}, {failures} failures, {}",
            secs(elapsed)
        ),
    )
}

fn c4_dm_penalty() -> Outcome {
    let start = Instant::now();
    let base = SimConfig {
        periods: 1000,
        replications: 500,
        drift: 0.05,
        ..SimConfig::default()
    };
    let persistent = simulate_dm_penalty(&SimConfig {
        ar1_coefficient: 0.5,
        ..base.clone()
    })
    .unwrap();
    let white = simulate_dm_penalty(&SimConfig {
        ar1_coefficient: 0.0,
        ..base
    })
    .unwrap();
    let elapsed = start.elapsed();
    let a = persistent.mean_abs_dm_bartlett.to_f64();
    let b = persistent.mean_abs_dm_k0.to_f64();
    let gap = white.mean_dm_bartlett.to_f64() - white.mean_dm_k0.to_f64();
    outcome(
        a < b && gap.abs() <= 0.05 && elapsed < Duration::from_secs(30),
        format!(
            "ar1=0.5: mean|DM| bartlett {a:.4} vs K=0 {b:.4}; ar1=0: mean gap {gap:+.4}; lag {}; {}",
            persistent.bartlett_lag,
            secs(elapsed)
        ),
    )
}

fn c5_null_edge() -> Outcome {
    let start = Instant::now();
    let cfg = SimConfig {
        pool_size: 10,
        periods: 10_000,
        replications: 200,
        loss_law: LossLaw::Exponential,
        ..SimConfig::default()
    };
    let res = simulate_null_edge(&cfg).unwrap();
    let elapsed = start.elapsed();
    let k = cfg.pool_size as f64;
    let p = 1.0 / k;
    let se = (p * (1.0 - p) / (cfg.periods * cfg.replications) as f64).sqrt();
    let max_dev = res
        .win_frequency
        .iter()
        .map(|f| (f - p).abs())
        .fold(0.0, f64::max);
    let mean = res.mean_edge.to_f64();
    let in_band = (0.8..=1.2).contains(&mean);
    let freq_ok = max_dev <= 3.0 * se;
    outcome(
        in_band && freq_ok && elapsed < Duration::from_secs(60),
        format!(
            "mean edge {mean:.4} (band [0.8, 1.2]: {}); win-frequency max dev {max_dev:.5} vs 3se {:.5} ({}); {}",
            if in_band { "in" } else { "out" },
            3.0 * se,
            if freq_ok { "ok" } else { "out" },
            secs(elapsed)
        ),
    )
}

fn c6_edge_zero() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let t = 500;
    let k = 4;
    let mut columns: Vec<Vec<f64>> = (0..k).map(|_| Vec::with_capacity(t)).collect();
    for _ in 0..t {
        let base: f64 = rng.random_range(0.0..5.0);
        let leader = rng.random_range(1..k);
        for (j, col) in columns.iter_mut().enumerate() {
            let v = if j == 0 {
                base + 1.0 + rng.random_range(0.0..0.5)
            } else if j == leader {
                base + rng.random_range(0.0..0.5)
            } else {
                base + 2.0 + rng.random_range(0.0..3.0)
            };
            col.push(v);
        }
    }
    let ids = (0..k).map(|j| format!("m{j}")).collect();
    let panel = LossPanel::new(ids, ScoringRule::External, columns, None).unwrap();
    let e = edge_ratio(&panel, 0).unwrap();
    outcome(e == ExtReal::Finite(0.0), format!("edge ratio {e:?}"))
}

fn c7_drawdown() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = 0;
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let x = random_series(&mut rng, 1, 50);
        let got = drawdown(&ReturnSeries::from_values(x.clone()).unwrap()).max_drawdown;
        let want = o_maxdd(&x);
        let diff = (got - want).abs();
        worst = worst.max(diff);
        if diff > 1e-12 {
            failures += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures == 0 && elapsed < Duration::from_secs(10),
        format!(
            "10000 series, max |diff| {worst:.2e}, {failures} failures, {}",
            secs(elapsed)
        ),
    )
}

fn c8_metric_battery() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut oracle_fail, mut scale_fail, mut flip_fail) = (0, 0, 0);
    for _ in 0..10_000 {
        let x = random_series(&mut rng, 2, 100);
        let r = ReturnSeries::from_values(x.clone()).unwrap();
        let sh = sharpe_ratio(&r, VarianceConvention::SampleTminus1).unwrap();
        let so = sortino_ratio(&r);
        let om = omega_ratio(&r);
        if !(close(sh, o_sharpe(&x, 1), 1e-12)
            && close(so, o_sortino(&x), 1e-12)
            && close(om, o_omega(&x), 1e-12))
        {
            oracle_fail += 1;
        }

        let c = 10f64.powf(rng.random_range(-3.0..3.0));
        let scaled = r.scaled(c).unwrap();
        if !(close(
            sharpe_ratio(&scaled, VarianceConvention::SampleTminus1).unwrap(),
            sh,
            1e-12,
        ) && close(sortino_ratio(&scaled), so, 1e-12)
            && close(omega_ratio(&scaled), om, 1e-12))
        {
            scale_fail += 1;
        }

        let flipped = r.scaled(-1.0).unwrap();
        if let (ExtReal::Finite(a), ExtReal::Finite(b)) = (omega_ratio(&flipped), om) {
            if a != 0.0 && b != 0.0 && (a * b - 1.0).abs() > 1e-12 {
                flip_fail += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        oracle_fail + scale_fail + flip_fail == 0 && elapsed < Duration::from_secs(10),
        format!(
            "10000 series; oracle {oracle_fail}, scale {scale_fail}, sign-flip {flip_fail} failures; {}",
            secs(elapsed)
        ),
    )
}

fn c9_hand_report() -> Outcome {
    let req = EvaluationRequest::new(fixture("hand_losses.csv"), fixture("hand_losses.toml"));
    let report = cmd_evaluate(&req).unwrap();
    let Report::Evaluation(ev) = &report else {
        unreachable!()
    };
    let panel = &ev.panels[0];
    let want = [
        ("Return", "1.00"),
        ("Sharpe", "0.71"),
        ("Sortino", "2.00"),
        ("Omega", "5.00"),
        ("MaxDD", "-1.00"),
    ];
    let got: Vec<String> = want
        .iter()
        .map(|(m, _)| panel.value(m, "M").unwrap().fixed(2))
        .collect();
    let pass = want.iter().zip(&got).all(|((_, w), g)| w == g);
    let shown: Vec<String> = want
        .iter()
        .zip(&got)
        .map(|((m, _), g)| format!("{m} {g}"))
        .collect();
    outcome(pass, format!("{}: {}", panel.title, shown.join(", ")))
}

fn run_cli(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_fcrisk"))
        .args(args)
        .status()
        .map(|s| s.success())
        .unwrap_or(false)
}

fn c10_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let s = |p: PathBuf| p.to_string_lossy().into_owned();
    let sim_cfg = d.join("sim.toml");
    std::fs::write(
        &sim_cfg,
        "pool_size = 5\nperiods = 500\nreplications = 20\nar1_coefficient = 0.5\n",
    )
    .unwrap();

    let q = (
        s(fixture("quarterly_forecasts.csv")),
        s(fixture("quarterly_forecasts.toml")),
    );
    let t2 = (
        s(fixture("macro_rmse.csv")),
        s(fixture("macro_rmse.toml")),
    );
    let mut checks = Vec::new();
    for (name, ext) in [
        ("evaluate", "json"),
        ("evaluate", "csv"),
        ("evaluate", "md"),
        ("meta", "json"),
        ("simulate", "json"),
    ] {
        let mut same = true;
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = s(d.join(format!("{name}-{run}.{ext}")));
            let ok = match name {
                "evaluate" => run_cli(&[
                    "evaluate",
                    "--input",
                    &q.0,
                    "--manifest",
                    &q.1,
                    "--output",
                    &out,
                ]),
                "meta" => run_cli(&[
                    "meta",
                    "--input",
                    &t2.0,
                    "--manifest",
                    &t2.1,
                    "--output",
                    &out,
                ]),
                _ => run_cli(&[
                    "simulate",
                    "--sim-config",
                    &s(sim_cfg.clone()),
                    "--seed",
                    "11",
                    "--output",
                    &out,
                ]),
            };
            same &= ok;
            outputs.push(std::fs::read(&out).unwrap_or_default());
        }
        same &= !outputs[0].is_empty() && outputs[0] == outputs[1];
        checks.push((format!("{name}.{ext}"), same));
    }
    let mut plots = Vec::new();
    for run in 0..2 {
        let out = d.join(format!("plots-{run}"));
        let ok = run_cli(&[
            "plotdata",
            "--input",
            &q.0,
            "--manifest",
            &q.1,
            "--output",
            &s(out.clone()),
        ]);
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out)
            .map(|rd| {
                rd.filter_map(Result::ok)
                    .map(|e| {
                        (
                            e.file_name().to_string_lossy().into_owned(),
                            std::fs::read(e.path()).unwrap(),
                        )
                    })
                    .collect()
            })
            .unwrap_or_default();
        files.sort();
        plots.push((ok, files));
    }
    let plot_same = plots[0].0 && plots[1].0 && !plots[0].1.is_empty() && plots[0].1 == plots[1].1;
    checks.push(("plotdata".into(), plot_same));
    let pass = checks.iter().all(|(_, ok)| *ok);
    let shown: Vec<String> = checks
        .iter()
        .map(|(n, ok)| format!("{n} {}", if *ok { "identical" } else { "DIFFERS" }))
        .collect();
    outcome(pass, shown.join(", "))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("meta grid Sharpe consistency", c1_meta_grid_sharpe),
        ("meta return worked example", c2_worked_example),
        ("DM-Sharpe identity", c3_dm_identity),
        ("autocorrelation penalty", c4_dm_penalty),
        ("edge null calibration", c5_null_edge),
        ("edge zero rule", c6_edge_zero),
        ("drawdown oracle", c7_drawdown),
        ("metric oracle battery", c8_metric_battery),
        ("hand-worked report", c9_hand_report),
        ("CLI determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} [{}] {name}: {}",
            i + 1,
            if result.pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
