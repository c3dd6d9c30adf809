//! Acceptance gate. Prints one PASS/FAIL line per criterion:
//!
//! ```text
//! cargo test --release --test acceptance -- --nocapture
//! ```

mod common;

use std::time::Instant;

use mvce::bench::{full_reference, run_pipeline_on, run_sweep, BenchRecord, DataSource, PipelineConfig, SampleSize, SweepConfig};
use mvce::datagen::{generate, DatasetSpec, Family};
use mvce::io::write_binary;
use mvce::leverage::{
    approx_leverage, exact_leverage, exact_scores, scaled_row_leverage, weighted_tail_leverage,
};
use mvce::linalg::{extreme_gen_eigs, gram, log_det};
use mvce::sampling::{
    predict_sample_size, sample_deterministic, sample_deterministic_approx, sample_proportional,
    sample_uniform, SamplingMethod,
};
use mvce::solver::{
    init_kumar_yildirim, minimum_volume_ellipsoid, solve_wolfe_atwood, volume, DesignVector,
    SolveOptions,
};
use mvce::DataMatrix;
use rand::Rng;
use rayon::prelude::*;

use common::{brute_force_min_area, qr_leverage, random_matrix, rng};

struct Outcome {
    id: u32,
    name: &'static str,
    passed: bool,
    detail: String,
    seconds: f64,
}

fn criterion(id: u32, name: &'static str, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (passed, detail) = f();
    let o = Outcome {
        id,
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    };
    println!(
        "[{}] criterion {}: {} | {} | {:.1}s",
        if o.passed { "PASS" } else { "FAIL" },
        o.id,
        o.name,
        o.detail,
        o.seconds
    );
    o
}

fn solve(x: &DataMatrix, delta: f64) -> mvce::solver::Solution {
    let u0 = init_kumar_yildirim(x, 0).unwrap();
    solve_wolfe_atwood(x, u0, &SolveOptions::new(delta)).unwrap()
}

/// `log det` of the explicit weighted Gram of a solution.
fn explicit_objective(x: &DataMatrix, u: &DesignVector) -> f64 {
    log_det(&gram(x, Some(u.weights())).unwrap()).unwrap()
}

const EPSILONS: [f64; 3] = [0.1, 0.3, 0.5];

/// Per-instance results for criteria 1 to 3.
#[derive(Default)]
struct GridStats {
    checks: usize,
    embed_fail: usize,
    init_fail: usize,
    final_fail: usize,
    min_embed_margin: f64,
    min_init_margin: f64,
    min_final_margin: f64,
}

fn grid_instance(family: Family, seed: u64) -> GridStats {
    let delta = 1e-9;
    let x = generate(&DatasetSpec::new(family, 2000, 10, seed)).unwrap();
    let d = x.ncols() as f64;
    let full_gram = gram(&x, None).unwrap();
    let full = solve(&x, delta);
    let g_full = explicit_objective(&x, full.state.design());
    let profile = exact_leverage(&x).unwrap();
    let mut st = GridStats {
        min_embed_margin: f64::INFINITY,
        min_init_margin: f64::INFINITY,
        min_final_margin: f64::INFINITY,
        ..Default::default()
    };
    for eps in EPSILONS {
        st.checks += 1;
        let sel = sample_deterministic(&profile, eps).unwrap();
        let s = sel.len();
        let xs = x.select_rows(&sel.indices).unwrap();
        let gs = gram(&xs, None).unwrap();

        let (lo, hi) = extreme_gen_eigs(&gs, &full_gram).unwrap();
        let margin = (lo - (1.0 - eps - 1e-10)).min(1.0 + 1e-10 - hi);
        st.min_embed_margin = st.min_embed_margin.min(margin);
        if !(hi <= 1.0 + 1e-10 && lo > 1.0 - eps - 1e-10) {
            st.embed_fail += 1;
        }

        // g* is at most g_full + d log(1 + delta); use that upper value.
        let g_star = g_full + d * delta.ln_1p();
        let g_init = log_det(&gs).unwrap() - d * (s as f64).ln();
        let bound2 = d * (s as f64 / (1.0 - eps)).ln();
        st.min_init_margin = st.min_init_margin.min(bound2 - (g_star - g_init));
        if !(g_star - g_init < bound2) {
            st.init_fail += 1;
        }

        let sampled = solve(&xs, delta);
        let g_s = explicit_objective(&xs, sampled.state.design());
        let bound3 = d * ((1.0 + delta) / (1.0 - eps)).ln();
        st.min_final_margin = st.min_final_margin.min(bound3 - (g_full - g_s));
        if !(g_full - g_s < bound3) {
            st.final_fail += 1;
        }
    }
    st
}

fn criteria_1_to_3() -> Vec<Outcome> {
    let start = Instant::now();
    let jobs: Vec<(Family, u64)> = Family::ALL
        .iter()
        .flat_map(|&f| (0..100).map(move |s| (f, s)))
        .collect();
    let stats: Vec<GridStats> = jobs.par_iter().map(|&(f, s)| grid_instance(f, s)).collect();
    let total: usize = stats.iter().map(|s| s.checks).sum();
    let sum = |f: fn(&GridStats) -> usize| stats.iter().map(f).sum::<usize>();
    let min = |f: fn(&GridStats) -> f64| stats.iter().map(f).fold(f64::INFINITY, f64::min);
    let elapsed = start.elapsed().as_secs_f64();

    let embed = sum(|s| s.embed_fail);
    let init = sum(|s| s.init_fail);
    let fin = sum(|s| s.final_fail);
    vec![
        criterion(1, "subspace embedding", || {
            (
                embed == 0 && elapsed < 120.0,
                format!(
                    "{embed} failures in {total} checks, smallest margin {:.3e}, grid time {elapsed:.1}s",
                    min(|s| s.min_embed_margin)
                ),
            )
        }),
        criterion(2, "initial gap bound", || {
            (
                init == 0,
                format!("{init} failures in {total} checks, smallest margin {:.4}", min(|s| s.min_init_margin)),
            )
        }),
        criterion(3, "final gap bound", || {
            (
                fin == 0,
                format!("{fin} failures in {total} checks, smallest margin {:.4}", min(|s| s.min_final_margin)),
            )
        }),
    ]
}

fn criterion_4() -> Outcome {
    criterion(4, "certificate soundness", || {
        let mut r = rng(404);
        let mut failures = 0;
        let mut worst: f64 = 0.0;
        for k in 0..50 {
            let d = r.random_range(2..=6);
            let n = r.random_range(d + 5..=500);
            let family = [Family::Gaussian, Family::RotatedCauchy, Family::Lognormal][k % 3];
            let x = generate(&DatasetSpec::new(family, n, d, k as u64)).unwrap();
            let loose = solve(&x, 1e-6);
            let tight = solve(&x, 1e-8);
            let diff = (tight.objective() - loose.objective()).abs();
            let allowed = d as f64 * 1e-6f64.ln_1p() + 1e-8;
            worst = worst.max(diff / allowed);
            if diff > allowed {
                failures += 1;
            }
        }
        (
            failures == 0,
            format!("{failures} failures in 50 instances, worst |diff| / allowance {worst:.3}"),
        )
    })
}

fn cube(d: usize, shift: &[f64]) -> DataMatrix {
    let rows: Vec<Vec<f64>> = (0..1usize << d)
        .map(|mask| {
            (0..d)
                .map(|k| if mask >> k & 1 == 1 { 1.0 } else { -1.0 } + shift[k])
                .collect()
        })
        .collect();
    DataMatrix::from_rows(&rows).unwrap()
}

fn criterion_5() -> Outcome {
    criterion(5, "exact solutions", || {
        let mut notes = Vec::new();
        let mut ok = true;
        for d in [2usize, 3] {
            let x = cube(d, &vec![0.0; d]);
            let sol = solve(&x, 1e-10);
            let q = sol.state.shape();
            let q_err = (0..d)
                .flat_map(|a| (0..d).map(move |b| (a, b)))
                .map(|(a, b)| (q[(a, b)] - if a == b { 1.0 } else { 0.0 }).abs())
                .fold(0.0, f64::max);
            let g = sol.objective();
            ok &= q_err <= 1e-6 && g.abs() <= 1e-8;

            let shift: Vec<f64> = (0..d).map(|k| 3.0 - 2.5 * k as f64).collect();
            let e = minimum_volume_ellipsoid(&cube(d, &shift), 1e-10, 0).unwrap();
            let c_err = e.center.iter().zip(&shift).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let m = e.q.matrix();
            let lq_err = (0..d)
                .flat_map(|a| (0..d).map(move |b| (a, b)))
                .map(|(a, b)| (m[(a, b)] - if a == b { 1.0 } else { 0.0 }).abs())
                .fold(0.0, f64::max);
            ok &= c_err <= 1e-6 && lq_err <= 1e-6;
            notes.push(format!("d={d}: |Q-I| {q_err:.1e}, g {g:.1e}, lifted centre {c_err:.1e}, lifted |Q-I| {lq_err:.1e}"));
        }

        let mut r = rng(55);
        let pts: Vec<[f64; 2]> = (0..20)
            .map(|_| [r.random_range(-2.0..3.0), r.random_range(-1.0..1.0) * 0.7 + 4.0])
            .collect();
        let e = minimum_volume_ellipsoid(&DataMatrix::from_rows(&pts).unwrap(), 1e-10, 0).unwrap();
        let ours = volume(&e).unwrap();
        let oracle = brute_force_min_area(&pts);
        let rel = (ours - oracle).abs() / oracle;
        ok &= rel <= 1e-3;
        notes.push(format!("20 planar points: area {ours:.6} vs oracle {oracle:.6} (rel {rel:.1e})"));
        (ok, notes.join("; "))
    })
}

fn criterion_6() -> Outcome {
    criterion(6, "scaled-row leverage", || {
        let mut r = rng(606);
        let mut worst: f64 = 0.0;
        let mut attempted = 0;
        while attempted < 200 {
            let d = r.random_range(1..=6);
            let n = r.random_range(d + 1..=40);
            let x = random_matrix(&mut r, n, d);
            let i = r.random_range(0..n);
            let a: f64 = if r.random_bool(0.2) { r.random_range(0.0..0.5) } else { r.random_range(0.1..4.0) };
            let closed = match scaled_row_leverage(&x, i, a) {
                Ok(c) => c,
                // a = 0 on a row the rest cannot do without.
                Err(mvce::Error::DegenerateScale { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            let mut scales = vec![1.0; n];
            scales[i] = a;
            let scaled = x.scale_rows(&scales).unwrap();
            if gram(&scaled, None).is_err() {
                continue;
            }
            attempted += 1;
            let oracle = qr_leverage(&scaled);
            worst = worst.max((closed.own - oracle[i]).abs());
            for (c, o) in closed.cross.iter().zip(&oracle) {
                worst = worst.max((c - o).abs());
            }
        }

        let mut tail_fail = 0;
        let mut tightest = f64::INFINITY;
        for k in 0..50 {
            let d = r.random_range(1..=5);
            let n = r.random_range(d + 3..=80);
            let x = random_matrix(&mut r, n, d);
            let lev = exact_scores(&x).unwrap();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&p, &q| lev[q].total_cmp(&lev[p]));
            let x = x.permute_rows(&order).unwrap();
            let s = r.random_range(d..n);
            // Head weights all at least the largest tail weight.
            let floor: f64 = r.random_range(0.1..1.0);
            let mut w: Vec<f64> = (0..n)
                .map(|j| if j < s { r.random_range(floor..2.0) } else { r.random_range(0.01..floor) })
                .collect();
            if k % 5 == 0 {
                w.iter_mut().skip(s).for_each(|v| *v = floor);
            }
            let u = DesignVector::normalized(w).unwrap();
            let (weighted, plain) = weighted_tail_leverage(&x, &u, s).unwrap();
            tightest = tightest.min(plain - weighted);
            if weighted > plain + 1e-9 {
                tail_fail += 1;
            }
        }
        (
            worst <= 1e-10 && tail_fail == 0,
            format!(
                "closed forms vs QR oracle on 200 triples: max error {worst:.1e}; tail inequality {tail_fail} failures in 50, smallest slack {tightest:.2e}"
            ),
        )
    })
}

fn criterion_7() -> Outcome {
    criterion(7, "approximate leverage", || {
        let mut notes = Vec::new();
        let mut ok = true;
        for alpha in [0.25, 0.5] {
            let mut within = 0;
            let mut tail_ok = 0;
            let mut tail_total = 0;
            let mut worst: f64 = 0.0;
            for seed in 0..40u64 {
                let family = Family::ALL[seed as usize % 4];
                let x = generate(&DatasetSpec::new(family, 5000, 10, seed)).unwrap();
                let exact = qr_leverage(&x);
                let approx = approx_leverage(&x, alpha, 1000 + seed).unwrap();
                let err = exact
                    .iter()
                    .zip(approx.scores())
                    .map(|(e, a)| (a - e).abs() / e)
                    .fold(0.0, f64::max);
                worst = worst.max(err);
                if err <= alpha {
                    within += 1;
                }
                for eps in EPSILONS {
                    tail_total += 1;
                    let sel = sample_deterministic_approx(&approx, eps).unwrap();
                    let kept: f64 = sel.indices.iter().map(|&i| exact[i]).sum();
                    if 10.0 - kept < eps {
                        tail_ok += 1;
                    }
                }
            }
            ok &= within * 100 >= 95 * 40 && tail_ok * 100 >= 95 * tail_total;
            notes.push(format!(
                "alpha {alpha}: {within}/40 within, worst {worst:.3}, exact tail < epsilon {tail_ok}/{tail_total}"
            ));
        }
        let p = predict_sample_size(100, 0.5, 1.0, 0.0).unwrap();
        let third: Vec<usize> = [(10, 0.9, 2.0), (10, 0.5, 50.0), (40, 0.99, 9.0)]
            .iter()
            .map(|&(d, e, eta)| predict_sample_size(d, e, eta, 0.0).unwrap())
            .collect();
        ok &= p == 399 && third == vec![10, 10, 40];
        notes.push(format!("predicted size {p}, third branch {third:?}"));
        (ok, notes.join("; "))
    })
}

struct TrendSeed {
    det: Vec<BenchRecord>,
    uniform_small: BenchRecord,
}

fn trend_seed(family: Family, seed: u64, fractions: &[f64]) -> TrendSeed {
    let spec = DatasetSpec::new(family, 100_000, 20, seed);
    let x = generate(&spec).unwrap();
    let full = full_reference(&x, 1e-9, seed).unwrap();
    let exact = exact_scores(&x).unwrap();
    let name = spec.to_string();
    let run = |method, f| {
        let mut cfg = PipelineConfig::new(DataSource::Generated(spec.clone()), method, SampleSize::Fraction(f));
        cfg.seed = seed;
        run_pipeline_on(&x, &name, &cfg, &full, &exact).unwrap()
    };
    TrendSeed {
        det: fractions.iter().map(|&f| run(SamplingMethod::Deterministic, f)).collect(),
        uniform_small: run(SamplingMethod::Uniform, fractions[0]),
    }
}

fn criterion_8() -> Outcome {
    criterion(8, "desk-scale trends", || {
        let fractions = [0.001, 0.01, 0.1];
        let families = [Family::RotatedCauchy, Family::Lognormal];
        let mut ok = true;
        let mut notes = Vec::new();

        // Timing on a quiet machine: a few seeds, one at a time.
        let mut slow = 0;
        let mut timed = 0;
        let mut ratio_max: f64 = 0.0;
        for &family in &families {
            for seed in 0..5 {
                let t = trend_seed(family, 10_000 + seed, &fractions);
                for r in &t.det {
                    timed += 1;
                    ratio_max = ratio_max.max(r.time_total_ms / r.time_full_ms);
                    if !(r.time_total_ms < r.time_full_ms) {
                        slow += 1;
                    }
                }
            }
        }
        ok &= slow == 0;
        notes.push(format!(
            "pipeline slower than full solve in {slow}/{timed} timed runs (max ratio {ratio_max:.2})"
        ));

        for &family in &families {
            let runs: Vec<TrendSeed> = (0..100u64)
                .into_par_iter()
                .map(|seed| trend_seed(family, seed, &fractions))
                .collect();
            let mut over_bound = 0;
            let mut non_finite = 0;
            let mut max_gap: f64 = 0.0;
            for r in runs.iter().flat_map(|t| &t.det) {
                max_gap = max_gap.max(r.gap);
                if !r.gap.is_finite() {
                    non_finite += 1;
                }
                if !(r.gap <= r.bound_thm3) {
                    over_bound += 1;
                }
            }
            let ordered = runs
                .iter()
                .filter(|t| t.uniform_small.gap > t.det[0].gap)
                .count();
            let median_uniform = {
                let mut g: Vec<f64> = runs.iter().map(|t| t.uniform_small.gap).collect();
                g.sort_by(f64::total_cmp);
                g[50]
            };
            ok &= over_bound == 0 && non_finite == 0 && ordered >= 95;
            notes.push(format!(
                "{family}: det gap over bound {over_bound}/300 (max gap {max_gap:.2e}), uniform gap > det gap at 0.1% on {ordered}/100 seeds (median uniform gap {median_uniform:.2})"
            ));
        }
        (ok, notes.join("; "))
    })
}

fn criterion_9() -> Outcome {
    criterion(9, "determinism", || {
        let mut mismatches = Vec::new();
        let mut check = |what: &str, f: &dyn Fn() -> Vec<u8>| {
            if f() != f() {
                mismatches.push(what.to_string());
            }
        };
        for family in Family::ALL {
            check(family.as_str(), &|| {
                let x = generate(&DatasetSpec::new(family, 9000, 6, 21)).unwrap();
                let mut buf = Vec::new();
                write_binary(&x, &mut buf).unwrap();
                buf
            });
        }
        let x = generate(&DatasetSpec::new(Family::Lognormal, 20_000, 8, 5)).unwrap();
        check("approx leverage", &|| {
            let mut buf = Vec::new();
            approx_leverage(&x, 0.3, 17).unwrap().write_csv(&mut buf).unwrap();
            buf
        });
        let profile = exact_leverage(&x).unwrap();
        check("uniform sample", &|| {
            let mut buf = Vec::new();
            sample_uniform(x.nrows(), 8, 500, 3).unwrap().write_csv(&mut buf).unwrap();
            buf
        });
        check("proportional sample", &|| {
            let mut buf = Vec::new();
            sample_proportional(&profile, 500, 3).unwrap().write_csv(&mut buf).unwrap();
            buf
        });
        let cfg: SweepConfig = toml::from_str(
            r#"
            methods = ["det", "det-approx", "uniform", "prop"]
            s_fractions = [0.01, 0.05]
            seeds = [1, 2]
            [[datasets]]
            family = "rotated-cauchy"
            n = 5000
            d = 6
            [[datasets]]
            family = "power-law-leverage"
            n = 2000
            d = 5
            "#,
        )
        .unwrap();
        check("sweep", &|| {
            let records = run_sweep(&cfg, std::io::sink()).unwrap();
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in records {
                w.serialize(r.without_times()).unwrap();
            }
            w.into_inner().unwrap()
        });
        (
            mismatches.is_empty(),
            if mismatches.is_empty() {
                "generators, sketches, samplers and sweeps reproduce byte for byte".into()
            } else {
                format!("differences in: {}", mismatches.join(", "))
            },
        )
    })
}

#[test]
fn acceptance() {
    let mut outcomes = criteria_1_to_3();
    outcomes.push(criterion_4());
    outcomes.push(criterion_5());
    outcomes.push(criterion_6());
    outcomes.push(criterion_7());
    outcomes.push(criterion_8());
    outcomes.push(criterion_9());

    println!("\nacceptance summary");
    for o in &outcomes {
        println!("{} {} {}", o.id, if o.passed { "PASS" } else { "FAIL" }, o.name);
    }
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
