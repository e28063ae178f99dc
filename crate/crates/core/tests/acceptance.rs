//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fail.

use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use zic_dmt::analytic::*;
use zic_dmt::cli::{random_tuple, run, run_verify};
use zic_dmt::regions::{oracle_d1_hk_stop, rate_region_subset_check, OracleConfig};
use zic_dmt::simulator::{estimate_diversity, estimate_throughput, trial_rng, SimConfig};
use zic_dmt::{Exponent, SystemParams};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn gap(a: Exponent, b: Exponent) -> f64 {
    match (a.is_finite(), b.is_finite()) {
        (true, true) => (a.value() - b.value()).abs(),
        (false, false) => 0.0,
        _ => f64::INFINITY,
    }
}

fn oracle_agreement() -> Outcome {
    let report = run_verify(&SchemeId::ALL, 500, 7, 2e-3, &OracleConfig::default()).unwrap();
    let worst = report.components.iter().max_by(|a, b| a.max_abs_err.total_cmp(&b.max_abs_err)).unwrap();
    let failed: Vec<&str> = report.components.iter().filter(|c| !c.passed).map(|c| c.label.as_str()).collect();
    outcome(
        report.passed(),
        format!(
            "{} components, worst {} err {:.2e}{}",
            report.components.len(),
            worst.label,
            worst.max_abs_err,
            if failed.is_empty() { String::new() } else { format!(", failing: {}", failed.join(" ")) }
        ),
    )
}

/// HK with neither common rate nor power split against both TIAN forms.
fn special_case_identity() -> Outcome {
    let r1s: Vec<f64> = (0..50).map(|k| (k as f64 + 0.5) / 50.0).collect();
    let betas = linspace(0.2, 2.0, 50);
    let mut hk_vs_general = 0.0f64;
    let mut per_r2 = Vec::new();
    for r2 in [0.0, 0.3, 0.6, 0.9] {
        let (mut worst, mut at) = (0.0f64, None);
        for &r1 in &r1s {
            for &beta in &betas {
                for l in 1..=5 {
                    let p = SystemParams::new(r1, r2, 0.0, 0.0, beta, l);
                    let general = d1_tian_general(&p);
                    hk_vs_general = hk_vs_general.max(gap(d1_hk(&p), general));
                    let e = gap(general, d1_tian(&p, l));
                    if e > worst {
                        (worst, at) = (e, Some((r1, beta, l, general, d1_tian(&p, l))));
                    }
                }
            }
        }
        per_r2.push((r2, worst, at));
    }
    let closed_ok = per_r2.iter().all(|(_, w, _)| *w <= 1e-12);
    let mut detail = format!("hk vs general max err {hk_vs_general:.1e}; general vs closed form:");
    for (r2, w, at) in &per_r2 {
        detail.push_str(&format!(" r2={r2} err {w:.3}"));
        if let Some((r1, beta, l, g, c)) = at {
            detail.push_str(&format!(" (r1={r1} beta={beta:.3} L={l}: {g} vs {c})"));
        }
        detail.push(';');
    }
    if !closed_ok {
        detail.push_str(
            " the closed form keeps only the i=1 term; for r2 > 0 a later ACK round \
             (RX2 acknowledged early, RX1 still failing) has a smaller exponent",
        );
    }
    outcome(hk_vs_general <= 1e-12 && closed_ok, detail)
}

fn policy_dominance() -> Outcome {
    let cfg = OracleConfig::default();
    let mut rng = trial_rng(3, 0);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..200 {
        let p = random_tuple(&mut rng, SchemeId::Hk);
        let other = d1_hk_keep(&p).value().max(oracle_d1_hk_stop(&p, &cfg).value());
        worst = worst.max(other - d1_hk(&p).value());
    }
    let mut counterexamples = 0;
    for k in 0..20 {
        let p = random_tuple(&mut rng, SchemeId::Hk);
        let rep = rate_region_subset_check(&p, 10_000, 100 + k).unwrap();
        counterexamples += rep.keep_counterexamples.len() + rep.stop_counterexamples.len();
    }
    outcome(
        worst <= 2e-3 && counterexamples == 0,
        format!("max(keep, stop) - hk <= {worst:.2e}; subset counterexamples {counterexamples}"),
    )
}

fn cooperative_curves() -> Outcome {
    let (beta, r2) = (1.3, 0.9);
    let r1s: Vec<f64> = (1..=1000).map(|k| k as f64 / 1000.0).collect();
    let mut dd_below_cmo = 0;
    let mut best_gain = f64::NEG_INFINITY;
    for &r1 in &r1s {
        let dd = d1c_dd2(r1, r2, beta).value();
        if dd < d1c_cmo2(r1, r2, beta).value() - 1e-12 {
            dd_below_cmo += 1;
        }
        best_gain = best_gain.max(dd - d_static_overall(r1, r2, beta).0.value());
    }
    let p = SystemParams::new(0.001, r2, 0.0, 0.0, beta, 2);
    let noncoop = [SchemeId::Cmo, SchemeId::Tian, SchemeId::Hk]
        .map(|s| evaluate(s, &p).unwrap().d1.value())
        .into_iter()
        .fold(0.0f64, f64::max);
    let dd0 = d1c_dd2(0.001, r2, beta).value();
    let small_ok = (dd0 - 2.0).abs() <= 1e-2 && noncoop <= 1.0 + beta / 2.0 + 1e-9;
    outcome(
        dd_below_cmo == 0 && best_gain > 1e-3 && small_ok,
        format!(
            "dd<cmo at {dd_below_cmo} points; max dd - static {best_gain:.3}; \
             at r1=0.001 dd {dd0:.3}, best non-coop {noncoop:.3} (bound {:.2})",
            1.0 + beta / 2.0
        ),
    )
}

fn cooperation_cost() -> Outcome {
    let rates: Vec<f64> = (0..50).map(|k| 1e-3 + (1.0 - 1e-3) * k as f64 / 49.0).collect();
    let betas = linspace(0.2, 2.0, 10);
    let (mut cost_violations, mut dd_mismatch, mut n) = (0, 0, 0);
    for &r1 in &rates {
        for &r2 in &rates {
            for &beta in &betas {
                n += 1;
                let p = SystemParams::new(r1, r2, 0.0, 0.0, beta, 2);
                let cmo = d2_cmo(&p, 2).value();
                let tian = d2_tian(&p, 2).value();
                let pairs = [
                    (d2c_cmo2(r1, r2, beta).value(), cmo),
                    (d2c_tian2(r1, r2, beta).value(), tian),
                    (d_static_overall(r1, r2, beta).1.value(), cmo.max(tian)),
                    (d2c_dd2(r1, r2, beta).value(), cmo.max(tian)),
                ];
                cost_violations += pairs.iter().filter(|(c, nc)| c > &(nc + 1e-12)).count();
                let max = d2c_cmo2(r1, r2, beta).value().max(d2c_tian2(r1, r2, beta).value());
                if d2c_dd2(r1, r2, beta).value() != max {
                    dd_mismatch += 1;
                }
            }
        }
    }
    outcome(
        cost_violations == 0 && dd_mismatch == 0,
        format!("{n} grid points; coop d2 above non-coop at {cost_violations}; dd != max at {dd_mismatch}"),
    )
}

fn monte_carlo_slopes() -> Outcome {
    let grid = vec![15.0, 20.0, 25.0, 30.0, 35.0];
    let p = SystemParams::new(0.2, 0.2, 0.0, 0.0, 0.5, 1);
    let (d1, d2) = estimate_diversity(&p, &SimConfig::new(SchemeId::Cmo, grid.clone(), 1_000_000, 1)).unwrap();
    let p2 = SystemParams::new(0.2, 0.5, 0.0, 0.0, 0.5, 2);
    let (_, d2b) = estimate_diversity(&p2, &SimConfig::new(SchemeId::Cmo, grid, 1_000_000, 1)).unwrap();
    let ok = (d1.slope - 0.70).abs() <= 0.15 && (d2.slope - 0.80).abs() <= 0.15 && (d2b.slope - 0.75).abs() <= 0.15;
    outcome(
        ok,
        format!(
            "L=1 slope1 {:.3} (0.70), slope2 {:.3} (0.80); L=2 r2=0.5 slope2 {:.3} (0.75)",
            d1.slope, d2.slope, d2b.slope
        ),
    )
}

fn throughput() -> Outcome {
    let p = SystemParams::new(0.3, 0.3, 0.1, 0.1, 0.8, 2);
    let t = estimate_throughput(SchemeId::Hk, &p, 30.0, 100_000, 1).unwrap();
    let c = estimate_throughput(SchemeId::Hk, &p.with_rounds(1), 30.0, 100_000, 1).unwrap();
    let control = c.ratio1 == 1.0 && c.ratio2 == 1.0;
    let mut detail = format!(
        "L=2 ratio1 {:.4} ratio2 {:.4} (E[zeta] {:.4}); L=1 control {:.4}/{:.4}",
        t.ratio1, t.ratio2, t.mean_zeta, c.ratio1, c.ratio2
    );
    let pass = t.ratio1 >= 0.9 && t.ratio2 >= 0.9 && control;
    if !pass {
        let margin = (1.0 - (p.beta - p.b)).max(0.0) - p.r1;
        let margin = if margin.abs() < 1e-12 { 0.0 } else { margin };
        detail.push_str(&format!(
            "; RX1's first-round SINR exponent minus r1 is {margin:.3}, so round 1 fails with \
             probability bounded away from 0 at every SNR; E[zeta] stays near 1.5 and the ratio \
             stays well below 1 (it is 1 only in the exponential sense)"
        ));
    }
    outcome(pass, detail)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for rep in 0..2 {
        for (name, args) in [
            ("sim", "simulate --scheme cmo --L 1 --r1 0.2 --r2 0.2 --beta 0.5 --rho-db 15:35:5 --trials 1000000 --seed 1"),
            ("thr", "throughput --scheme hk --L 2 --r1 0.3 --r2 0.3 --t2 0.1 --b 0.1 --beta 0.8 --rho-db 30:30:1 --trials 100000 --seed 1"),
        ] {
            let path = dir.path().join(format!("{name}{rep}.csv"));
            let mut argv: Vec<String> = vec!["zic-dmt".into()];
            argv.extend(args.split(' ').map(String::from));
            argv.extend(["--out".into(), path.display().to_string()]);
            if run(argv) != 0 {
                return outcome(false, format!("{name} run {rep} failed"));
            }
            files.push(fs::read(&path).unwrap());
        }
    }
    let same = files[0] == files[2] && files[1] == files[3];
    outcome(same, format!("simulate {} bytes, throughput {} bytes, identical: {same}", files[0].len(), files[1].len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("oracle agreement", oracle_agreement),
        ("special-case identity", special_case_identity),
        ("policy dominance", policy_dominance),
        ("cooperative curves", cooperative_curves),
        ("cooperation cost at RX2", cooperation_cost),
        ("Monte Carlo slopes", monte_carlo_slopes),
        ("throughput", throughput),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        failures += usize::from(!o.pass);
        println!(
            "{} {}. {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{}/{} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
