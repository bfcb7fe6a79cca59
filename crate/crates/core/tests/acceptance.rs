//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use htpc_core::branching::{progeny_trials, survival_probability, Engine, OffspringLaw, StartType};
use htpc_core::sweep::{run_sweep, write_rows_csv, Regime, SweepPlan, SweepRow};
use htpc_core::theory::{char_poly_value, critical_lambda, extinction, perron, tail_constants};
use htpc_core::{
    cluster_discovery, connected_components, modified_cluster_discovery, sample, TorusSpec,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn plan(n: u64, regime: Regime, values: &[f64], replicates: u32) -> SweepPlan {
    SweepPlan {
        d: 2,
        a: vec![1.0, 1.0],
        n_values: vec![n],
        regime,
        values: values.to_vec(),
        replicates,
        seed: 7,
        out: None,
        histograms: false,
    }
}

fn rows_at(plan: &SweepPlan) -> Result<Vec<SweepRow>, String> {
    run_sweep(plan, 0)
        .map(|o| o.rows)
        .map_err(|e| e.to_string())
}

fn critical_values() -> Outcome {
    let cases: [(&[f64], f64); 3] = [
        (&[1.0, 1.0], 1.0),
        (&[4.0, 1.0], 0.5),
        (&[1.0, 1.0, 1.0], 0.5),
    ];
    let mut worst = 0.0f64;
    for (a, expected) in cases {
        let got = critical_lambda(a).map_err(|e| e.to_string())?;
        worst = worst.max((got - expected).abs());
    }
    check(
        worst < 1e-10,
        format!("max |error| = {worst:.3e} (tol 1e-10)"),
    )
}

fn direct_det(lambda: f64, a: &[f64]) -> f64 {
    let d = a.len();
    DMatrix::from_fn(d, d, |i, j| if i == j { -1.0 } else { lambda * a[j] }).determinant()
}

fn solver_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_rho = 0.0f64;
    let mut worst_det = 0.0f64;
    for _ in 0..500 {
        let d = rng.random_range(2..=6);
        let a: Vec<f64> = (0..d).map(|_| rng.random_range(0.5..2.0)).collect();
        let lc = critical_lambda(&a).map_err(|e| e.to_string())?;
        let rho = perron(lc, &a).map_err(|e| e.to_string())?.rho;
        worst_rho = worst_rho.max((rho - 1.0).abs());
        for lambda in [lc, rng.random_range(0.0..2.0)] {
            let poly = char_poly_value(lambda, &a).map_err(|e| e.to_string())?;
            let det = direct_det(lambda, &a);
            worst_det = worst_det.max((poly - det).abs() / det.abs().max(1.0));
        }
    }
    check(
        worst_rho < 1e-8 && worst_det < 1e-9,
        format!("max |rho - 1| = {worst_rho:.3e} (tol 1e-8), max rel det error = {worst_det:.3e} (tol 1e-9)"),
    )
}

fn extinction_oracle() -> Outcome {
    let mut x = 0.0f64;
    for _ in 0..100_000 {
        x = 0.5 * x + 0.5 * (-2.0 * (1.0 - x)).exp();
    }
    let ext = extinction(2.0, &[1.0, 1.0]).map_err(|e| e.to_string())?;
    let fixed_ok = ext
        .q_vec
        .iter()
        .all(|&q| (q - 0.203188).abs() < 1e-5 && (q - x).abs() < 1e-10);
    let law = OffspringLaw::poisson(2.0, &[1.0, 1.0]).map_err(|e| e.to_string())?;
    let est = survival_probability(&law, StartType::Type(0), 100_000, 100_000, 3)
        .map_err(|e| e.to_string())?;
    let gap = (est.estimate - (1.0 - ext.q_vec[0])).abs();
    check(
        fixed_ok && gap < 0.01,
        format!(
            "q_i = {:.7} (damped oracle {x:.7}), MC survival {:.5} vs {:.5}, gap {gap:.5} (tol 0.01)",
            ext.q_vec[0],
            est.estimate,
            1.0 - ext.q_vec[0]
        ),
    )
}

fn giant_component() -> Outcome {
    let n = 2000;
    let rows = rows_at(&plan(n, Regime::Lambda, &[2.0], 20))?;
    let mean = rows.iter().map(|r| r.normalized_largest).sum::<f64>() / rows.len() as f64;
    let rel = (mean - 0.958715).abs() / 0.958715;
    let limit = 12.0 * (n as f64).ln();
    let max_second = rows.iter().map(|r| r.second_largest).max().unwrap_or(0);
    check(
        rel < 0.02 && (max_second as f64) <= limit,
        format!("mean largest/(λn) = {mean:.5}, rel error {rel:.4} (tol 0.02); max second_largest = {max_second} (limit {limit:.1})"),
    )
}

fn subcritical_components() -> Outcome {
    let n = 2000;
    let rows = rows_at(&plan(n, Regime::Lambda, &[0.5], 20))?;
    let limit = 12.0 * (n as f64).ln();
    let within = rows.iter().filter(|r| r.largest as f64 <= limit).count();
    let max = rows.iter().map(|r| r.largest).max().unwrap_or(0);
    check(
        within >= 19,
        format!("{within}/20 replicates with largest <= {limit:.1} (need 19); max largest = {max}"),
    )
}

fn connectivity() -> Outcome {
    let rows = rows_at(&plan(3000, Regime::Log, &[0.25, 1.0], 20))?;
    let low = rows
        .iter()
        .filter(|r| r.value == 0.25 && r.isolated_count >= 1)
        .count();
    let high = rows
        .iter()
        .filter(|r| r.value == 1.0 && r.is_connected)
        .count();
    check(
        low >= 19 && high >= 19,
        format!(
            "c=0.25: {low}/20 with isolated vertices; c=1.0: {high}/20 connected (need 19 each)"
        ),
    )
}

fn isolated_or_giant() -> Outcome {
    let rows = rows_at(&plan(3000, Regime::Log, &[0.45], 20))?;
    let good = rows.iter().filter(|r| r.isolated_or_giant).count();
    let mixed = rows.iter().filter(|r| !r.isolated_or_giant).count();
    check(
        good >= 18,
        format!("{good}/20 runs with every vertex isolated or in the largest component (need 18); {mixed} runs had a middle-sized component"),
    )
}

fn oracle_equivalence() -> Outcome {
    let shapes: &[&[usize]] = &[
        &[2, 2],
        &[4, 4],
        &[8, 8],
        &[3, 8],
        &[1, 8],
        &[2, 2, 2],
        &[4, 4, 4],
        &[8, 8, 8],
        &[2, 5, 8],
        &[1, 3, 8],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut configs = 0;
    let mut starts = 0u64;
    for &sides in shapes {
        let spec = TorusSpec::from_sides(sides).map_err(|e| e.to_string())?;
        for _ in 0..200 {
            let p = rng.random_range(0.0..1.0);
            let config = sample(&spec, p, rng.random()).map_err(|e| e.to_string())?;
            let (labels, sizes) = common::bfs_census(&config);
            if connected_components(&config).component_sizes != sizes {
                return Err(format!("census mismatch on {sides:?} at p = {p}"));
            }
            for v in config.occupied() {
                let truth = common::component_members(&labels, v.0);
                let mut found: Vec<usize> = cluster_discovery(&config, v)
                    .map_err(|e| e.to_string())?
                    .iter()
                    .map(|u| u.0)
                    .collect();
                found.sort_unstable();
                if found != truth {
                    return Err(format!("discovery mismatch on {sides:?} from {}", v.0));
                }
                let modified = modified_cluster_discovery(&config, v).map_err(|e| e.to_string())?;
                if !modified.iter().all(|u| truth.binary_search(&u.0).is_ok()) {
                    return Err(format!(
                        "modified discovery escapes component on {sides:?} from {}",
                        v.0
                    ));
                }
                starts += 1;
            }
            configs += 1;
        }
    }
    Ok(format!(
        "{configs} configurations, {starts} discovery starts, all equal to BFS"
    ))
}

fn tail_bound() -> Outcome {
    let a = [1.0, 1.0];
    let tc = tail_constants(0.5, &a).map_err(|e| e.to_string())?;
    let consts_ok = (tc.alpha - 0.19315).abs() < 1e-4 && (tc.theta_star - 1.38629).abs() < 1e-4;
    let law = OffspringLaw::poisson(0.5, &a).map_err(|e| e.to_string())?;
    let trials = 1_000_000u64;
    let xmax = 60usize;
    let outcomes = progeny_trials(&law, &[1, 0], trials, xmax as u64 + 1, 9, Engine::Walk)
        .map_err(|e| e.to_string())?;
    let mut exceed = vec![0u64; xmax + 1];
    for o in &outcomes {
        for e in exceed.iter_mut().take((o.size() as usize).min(xmax + 1)) {
            *e += 1;
        }
    }
    let worst = (0..=xmax)
        .map(|x| exceed[x] as f64 / trials as f64 / (1.2 * tc.bound(x as f64)))
        .fold(0.0, f64::max);
    check(
        consts_ok && worst <= 1.0,
        format!(
            "alpha = {:.6}, theta' = {:.6}, C = {:.4}; max P(T>x) / (1.2 C e^(-αx)) over x <= 60 = {worst:.4}",
            tc.alpha, tc.theta_star, tc.c
        ),
    )
}

fn determinism() -> Outcome {
    let mut p = plan(300, Regime::Lambda, &[0.5, 1.0, 2.0], 4);
    p.n_values = vec![150, 300];
    let mut q = plan(300, Regime::Log, &[0.3, 0.8], 3);
    q.a = vec![1.0, 0.5, 2.0];
    q.d = 3;
    q.n_values = vec![40];
    let csv = |plan: &SweepPlan, threads: usize| -> Result<Vec<u8>, String> {
        let out = run_sweep(plan, threads).map_err(|e| e.to_string())?;
        let mut buf = Vec::new();
        write_rows_csv(&out.rows, &mut buf).map_err(|e| e.to_string())?;
        Ok(buf)
    };
    let mut bytes = 0;
    for plan in [&p, &q] {
        let reference = csv(plan, 1)?;
        for threads in [1, 8, 8] {
            if csv(plan, threads)? != reference {
                return Err(format!("CSV differs at {threads} threads"));
            }
        }
        bytes += reference.len();
    }
    Ok(format!(
        "{bytes} CSV bytes identical across reruns at 1 and 8 threads"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("critical value exact cases", critical_values),
        ("solver cross-consistency", solver_consistency),
        ("extinction oracle", extinction_oracle),
        ("giant component at n=2000, lambda=2", giant_component),
        (
            "subcritical components at n=2000, lambda=0.5",
            subcritical_components,
        ),
        ("connectivity at n=3000, c=0.25 and c=1.0", connectivity),
        ("isolated-or-giant at n=3000, c=0.45", isolated_or_giant),
        ("small-instance oracle equivalence", oracle_equivalence),
        ("tail constants and empirical bound", tail_bound),
        ("sweep determinism across thread counts", determinism),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.2}s]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.2}s]", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
