//! Acceptance criteria, run in order with one PASS/FAIL line each.
//!
//! Expected values are computed here from closed forms written out
//! independently of the library (hand-calculated laminar rates, bound
//! constants, corollary model terms).

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smdamp_core::background::{hardy_ratio, phi_norms, poincare_ratio, BackgroundFlow, RandomStripField, StripRegion};
use smdamp_core::bounds::{corollary_bound, log_log_slope, theorem_bound, BoundConstants, BoundKind};
use smdamp_core::damping::{hermite_coefficients, strip_integral, taylor_approx_f_w, van_driest_exact};
use smdamp_core::solver::operators::trilinear;
use smdamp_core::solver::{initial_field, run, run_solver, steady_shear_profile};
use smdamp_core::{
    run_experiment, DampingProfile, DomainParams, ExperimentConfig, Grid, InitialCondition, Solver, SolverConfig,
    StopReason, Table, VelocityField,
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

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Gamma from its definition `1 / (5.1 Re)` at unit kappa.
fn gamma_of(re: f64) -> f64 {
    1.0 / (5.1 * re)
}

/// Laminar Couette dissipation with constant damping:
/// `nu (U/L)^2 + (C_s delta)^2 (U/L)^3`.
fn couette_rate(nu: f64, model_length: f64) -> f64 {
    nu + model_length * model_length
}

fn criterion_1() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    // C_s delta = 0.1 with delta < L
    for (re, expected) in [(1.0, couette_rate(1.0, 0.1)), (100.0, couette_rate(0.01, 0.1))] {
        let d = DomainParams::with_reynolds(1.0, 1.0, re, 0.1, 1.0, 1.0).map_err(|e| e.to_string())?;
        let g = Grid::new(&d, 32, 32, 32).map_err(|e| e.to_string())?;
        let cfg = SolverConfig {
            end_time: 10.0,
            max_steps: Some(if re == 1.0 { 200 } else { 50 }),
            ..SolverConfig::default()
        };
        let out = run(VelocityField::couette(&d, &g), &DampingProfile::one(), &d, &cfg).map_err(|e| e.to_string())?;
        let profile = out.field.mean_u_profile();
        let profile_err = profile.iter().enumerate().map(|(k, u)| rel(*u, g.z_center(k))).fold(0.0f64, f64::max);
        let eps = out.accumulator.last().unwrap().eps_total;
        let eps_err = rel(eps, expected);
        ok &= profile_err <= 1e-6 && eps_err <= 1e-4;
        details.push(format!(
            "Re={re}: profile rel err {profile_err:.1e}, eps {eps:.6} vs {expected} (rel {eps_err:.1e}), {} steps",
            out.steps
        ));
    }
    check(ok, details.join("; "))
}

fn criterion_2() -> Outcome {
    let d = DomainParams::with_reynolds(1.0, 1.0, 1.0, 0.1, 1.0, 1.0).map_err(|e| e.to_string())?;
    let profile = DampingProfile::hermite(2);
    let oracle = steady_shear_profile(&profile, &d, 1001).map_err(|e| e.to_string())?;
    let mut errors = Vec::new();
    let mut balance = 0.0f64;
    for nz in [32, 64] {
        let g = Grid::new(&d, 4, 4, nz).map_err(|e| e.to_string())?;
        let cfg = SolverConfig {
            end_time: 20.0,
            steady_tolerance: Some(1e-11),
            sample_interval: 0.05,
            ..SolverConfig::default()
        };
        let out = run(VelocityField::couette(&d, &g), &profile, &d, &cfg).map_err(|e| e.to_string())?;
        if out.stop != StopReason::Steady {
            return Err(format!("nz={nz}: no steady state by t={}", out.field.time));
        }
        let mut err = 0.0f64;
        for (k, u) in out.field.mean_u_profile().iter().enumerate() {
            let exact = oracle.velocity_at(g.z_center(k)).map_err(|e| e.to_string())?;
            err = err.max((u - exact).abs());
        }
        errors.push(err);
        let eps = out.accumulator.last().unwrap().eps_total;
        // eps |Omega| = tau U L^2
        balance = balance.max(rel(eps * d.volume(), oracle.tau * d.lid_speed() * d.length().powi(2)));
    }
    let order = (errors[0] / errors[1]).log2();
    check(
        order >= 1.8 && balance <= 1e-3,
        format!(
            "max |u - u_oracle|: nz=32 {:.2e}, nz=64 {:.2e}, observed order {order:.2}; power balance rel {balance:.1e}",
            errors[0], errors[1]
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut ok = true;
    let mut worst_ratio = 0.0f64;
    let mut lines = Vec::new();
    let c = BoundConstants::from_gamma_re(1.0 / 5.1).map_err(|e| e.to_string())?;
    ok &= rel(c.c1, 583.1) < 1e-12 && (c.c2 - 4510.134).abs() < 5e-4;
    for (re, nz) in [(50.0, 512), (100.0, 1024)] {
        let d = DomainParams::with_reynolds(1.0, 1.0, re, 0.1, 0.1, 1.0).map_err(|e| e.to_string())?;
        let g = Grid::new(&d, 4, 4, nz).map_err(|e| e.to_string())?;
        if !g.strip_resolved() {
            return Err(format!("Re={re}: nz={nz} does not resolve the strip"));
        }
        for (n, profile) in
            [DampingProfile::one(), DampingProfile::algebraic(2), DampingProfile::hermite(2)].into_iter().enumerate()
        {
            let cfg = SolverConfig {
                end_time: 0.2,
                sample_interval: 0.002,
                initial_condition: InitialCondition::Perturbed { amplitude: 0.1, seed: 100 + n as u64 },
                ..SolverConfig::default()
            };
            let field = initial_field(&d, &g, &cfg).map_err(|e| e.to_string())?;
            let out = run(field, &profile, &d, &cfg).map_err(|e| format!("Re={re} {}: {e}", profile.name()))?;
            let proxy = out.accumulator.limsup_proxy().unwrap();
            let bound = theorem_bound(&d, &profile).map_err(|e| e.to_string())?;
            // same bound from the constants and the closed-form strip integral
            let gamma = gamma_of(re);
            let strip = match profile.kind() {
                smdamp_core::ProfileKind::Algebraic { .. } => gamma * (gamma * re).powi(2) / 3.0,
                // int_0^gamma s^2 (1 - s)^2 ds by the lower wall's mirror image
                smdamp_core::ProfileKind::Hermite { .. } => {
                    gamma.powi(3) / 3.0 - gamma.powi(4) / 2.0 + gamma.powi(5) / 5.0
                }
                _ => gamma,
            };
            let hand = 583.1 + 4510.134 * 0.01f64.powi(2) * re.powi(3) * strip;
            ok &= rel(bound.bound_value, hand) < 1e-6;
            ok &= proxy <= bound.bound_value;
            worst_ratio = worst_ratio.max(proxy / bound.bound_value);
            lines.push(format!("Re={re} {}: {proxy:.4e} <= {:.4e}", profile.name(), bound.bound_value));
        }
    }
    check(ok, format!("c1={:.1}, c2={:.3}; {}; max proxy/bound {worst_ratio:.1e}", c.c1, c.c2, lines.join(", ")))
}

fn criterion_4() -> Outcome {
    let res = [1e2, 1e3, 1e4];
    let mut ok = true;
    let mut parts = Vec::new();
    for (kind, alpha, expected) in [
        (BoundKind::Algebraic, 2, 2.0),
        (BoundKind::Hermite, 2, 0.0),
        (BoundKind::Hermite, 3, 0.0),
        (BoundKind::HermiteLinear, 1, 1.0),
    ] {
        let mut terms = Vec::new();
        for re in res {
            let d = DomainParams::with_reynolds(1.0, 1.0, re, 0.1, 0.1, 1.0).map_err(|e| e.to_string())?;
            let b = corollary_bound(&d, kind, alpha).map_err(|e| e.to_string())?;
            // hand forms with c2 = (5.1)^3 / (3 m), m = 1/102, (C_s delta/L)^2 = 1e-4
            let c2 = 5.1f64.powi(3) * 102.0 / 3.0;
            let gr: f64 = 1.0 / 5.1;
            let hand = match (kind, alpha) {
                (BoundKind::Algebraic, a) => c2 * 1e-4 * re * re * gr.powi(a as i32 + 1) / (a as f64 + 1.0),
                (BoundKind::Hermite, 2) => c2 * 1e-4 * gr.powi(3) * (1.0 / 3.0 + 1.0 / 5.0),
                (BoundKind::Hermite, 3) => c2 * 1e-4 * gr.powi(3) * (1.0 / 4.0 + 3.0 / 6.0),
                _ => c2 * 1e-4 * gr * gr * 0.5 * re,
            };
            ok &= rel(b.model_term, hand) < 1e-10;
            terms.push(b.model_term);
        }
        let slope = log_log_slope(&res, &terms).map_err(|e| e.to_string())?;
        ok &= (slope - expected).abs() <= 0.01;
        parts.push(format!("{} a={alpha}: {slope:.4}", kind.name()));
    }
    check(ok, parts.join(", "))
}

fn criterion_5() -> Outcome {
    let d = DomainParams::with_reynolds(1.0, 1.0, 100.0, 0.1, 0.1, 1.0).map_err(|e| e.to_string())?;
    let strip = StripRegion::new(&d);
    let gamma_l = gamma_of(100.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut p_viol, mut h_viol) = (0, 0);
    let (mut p_max, mut h_max) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let f = RandomStripField::generate(&mut rng, &strip);
        let p = poincare_ratio(&f, &strip).map_err(|e| e.to_string())?;
        p_max = p_max.max(p / gamma_l);
        if p > gamma_l {
            p_viol += 1;
        }
        for q in [1.5, 2.0, 3.0] {
            let h = hardy_ratio(&f, q, &strip).map_err(|e| e.to_string())?;
            h_max = h_max.max(h / (q / (q - 1.0)));
            if h > q / (q - 1.0) {
                h_viol += 1;
            }
        }
    }
    let mut norm_err = 0.0f64;
    for re in [10.0, 100.0, 1000.0] {
        let d = DomainParams::with_reynolds(1.0, 1.0, re, 0.1, 0.1, 1.0).map_err(|e| e.to_string())?;
        norm_err = norm_err.max(phi_norms(&BackgroundFlow::new(&d)).map_err(|e| e.to_string())?.max_relative_error());
    }
    check(
        p_viol == 0 && h_viol == 0 && norm_err <= 1e-10,
        format!(
            "Poincare violations {p_viol} (max ratio/gammaL {p_max:.3}), Hardy violations {h_viol} (max ratio/bound {h_max:.3}), norm rel err {norm_err:.1e}"
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut junction = 0.0f64;
    let mut coeff = 0.0f64;
    for re in [1.0, 10.0, 100.0, 1e4] {
        let d = DomainParams::with_reynolds(1.0, 1.0, re, 0.1, 0.1, 1.0).map_err(|e| e.to_string())?;
        for alpha in 0..=4 {
            let r = DampingProfile::hermite(alpha).resolve(&d).map_err(|e| e.to_string())?;
            let (v, s) = r.junction_mismatch();
            junction = junction.max(v).max(s);
            coeff = coeff.max(hermite_coefficients(&d, alpha).map_err(|e| e.to_string())?.discrepancy);
        }
    }
    let mut strip = 0.0f64;
    for re in [10.0, 100.0, 1000.0] {
        let d = DomainParams::with_reynolds(1.0, 1.0, re, 0.1, 0.1, 1.0).map_err(|e| e.to_string())?;
        let table = Table::new(vec![0.0, 0.3, 0.999, 1.0], vec![0.0, 1.0, 0.5, 0.0]).map_err(|e| e.to_string())?;
        for p in [
            DampingProfile::one(),
            DampingProfile::zero(),
            DampingProfile::constant(0.7).map_err(|e| e.to_string())?,
            DampingProfile::van_driest(),
            DampingProfile::algebraic(1),
            DampingProfile::algebraic(2),
            DampingProfile::algebraic(3),
            DampingProfile::hermite(1),
            DampingProfile::hermite(2),
            DampingProfile::hermite(3),
            DampingProfile::tabulated(table),
        ] {
            strip = strip.max(strip_integral(&p, &d).map_err(|e| e.to_string())?.relative_difference());
        }
    }
    let mut taylor = 0.0f64;
    for re in [10.0, 100.0, 1000.0] {
        let d = DomainParams::with_reynolds(1.0, 1.0, re, 0.1, 0.1, 1.0).map_err(|e| e.to_string())?;
        // validity strip: Re (1 - z/L) < 1
        for k in 0..200 {
            let z = 1.0 - k as f64 / 200.0 / re;
            let diff = taylor_approx_f_w(z, &d, 8).map_err(|e| e.to_string())?
                - van_driest_exact(z, &d).map_err(|e| e.to_string())?;
            taylor = taylor.max(diff.abs());
        }
    }
    check(
        junction < 1e-10 && strip < 1e-10 && taylor < 1e-6,
        format!(
            "junction mismatch {junction:.1e} (coefficient discrepancy {coeff:.1e}), strip integral rel {strip:.1e}, Taylor k=8 {taylor:.1e}"
        ),
    )
}

fn random_field(grid: &Grid, rng: &mut ChaCha8Rng) -> VelocityField {
    let mut f = VelocityField::zeros(grid, 1.0);
    for x in f.u.iter_mut().chain(f.v.iter_mut()) {
        *x = rng.gen_range(-1.0..1.0);
    }
    let layer = grid.nx * grid.ny;
    let n = f.w.len();
    for x in &mut f.w[layer..n - layer] {
        *x = rng.gen_range(-1.0..1.0);
    }
    f
}

fn criterion_7() -> Outcome {
    let d = DomainParams::with_reynolds(1.0, 1.0, 1000.0, 1.0 / 16.0, 0.1, 1.0).map_err(|e| e.to_string())?;
    let g = Grid::new(&d, 16, 16, 16).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut skew = 0.0f64;
    for _ in 0..5 {
        let a = random_field(&g, &mut rng);
        let phi = random_field(&g, &mut rng);
        let scale = a.inner(&a).sqrt() * phi.inner(&phi) / g.min_width();
        skew = skew.max(trilinear(&a, &phi).abs() / scale);
    }

    let cfg = SolverConfig {
        end_time: 1e3,
        max_steps: Some(500),
        initial_condition: InitialCondition::Perturbed { amplitude: 0.1, seed: 7 },
        ..SolverConfig::default()
    };
    let mut solver = Solver::new(&d, &g, &DampingProfile::hermite(2), &cfg).map_err(|e| e.to_string())?;
    let mut positive_steps = 0;
    let out = run_solver(&mut solver, &cfg, |r| {
        if r.model_energy > 0.0 {
            positive_steps += 1;
        }
        Ok(())
    });
    let out = match out {
        Ok(o) => o,
        Err(e) => return Err(format!("500-step run failed: {e}")),
    };
    check(
        skew <= 1e-12 && out.max_divergence <= 1e-10 && positive_steps == 0 && out.steps == 500,
        format!(
            "skew residual {skew:.1e}, max divergence {:.1e}, steps {} (t={:.3}), steps with model energy > 0: {positive_steps} (max {:.2e}), guard not tripped",
            out.max_divergence, out.steps, out.field.time, out.max_model_energy
        ),
    )
}

fn run_into(text: &str, dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut cfg = ExperimentConfig::parse(text).map_err(|e| e.to_string())?;
    cfg.output_dir = dir.to_path_buf();
    let art = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    for f in art.files {
        let name = f.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
        files.push((name, fs::read(&f).map_err(|e| e.to_string())?));
    }
    Ok(files)
}

fn criterion_8() -> Outcome {
    let run_cfg = "[domain]\nre = 200\n[grid]\nnx = 8\nny = 8\nnz = 16\n[damping]\nprofile = hermite\n\
                   [solver]\nend_time = 0.2\ndeterministic = true\ninitial = perturbed\nseed = 42\n[output]\nmode = run\n";
    let sweep_cfg = "[domain]\nre = 50\n[grid]\nnx = 4\nny = 4\nnz = 16\n[solver]\nend_time = 0.05\n\
                     deterministic = true\ninitial = perturbed\nseed = 3\n[sweep]\nre = 50, 100\n\
                     profile = one, hermite\n[output]\nmode = sweep\n";
    let mut compared = 0;
    for text in [run_cfg, sweep_cfg] {
        let a = tempfile::tempdir().map_err(|e| e.to_string())?;
        let b = tempfile::tempdir().map_err(|e| e.to_string())?;
        let first = run_into(text, a.path())?;
        let second = run_into(text, b.path())?;
        if first != second {
            return Err("outputs differ between consecutive runs".into());
        }
        compared += first.len();
    }
    check(true, format!("{compared} output files byte-identical across two runs"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("laminar Couette oracle", criterion_1),
        ("1-D steady shear oracle", criterion_2),
        ("dissipation below theorem bound", criterion_3),
        ("bound scaling laws", criterion_4),
        ("functional inequalities", criterion_5),
        ("damping profile suite", criterion_6),
        ("discrete structure", criterion_7),
        ("reproducibility", criterion_8),
    ];
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} ({name}): PASS [{secs:.1}s] {detail}", n + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL [{secs:.1}s] {detail}", n + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
