//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use postselect::accept::{max_acceptance, max_acceptance_unequal};
use postselect::construct::{construct, extremal_subspaces, max_c, ConstructionParams};
use postselect::examples::{example1, example1_measurement, golden_report, qubit_pair};
use postselect::lemmas::{check_lemma, Lemma};
use postselect::linalg::{eig, pseudo_power, Hermitian, Projector, Tolerances, RANK_TOL};
use postselect::metrics::{
    acceptance, classify, critical_prior, min_postselected_error, postselected_error, CaseLabel, SupportRelation,
};
use postselect::oracle::{
    oracle_max_acceptance, sample_instance, sample_measurement, sample_params, OracleConfig, PriorChoice,
};
use postselect::sim::simulate;
use postselect::state::{child_seed, rng_from_seed, DensityOperator, ProblemInstance};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(label: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || format!("{label}: got {got}, want {want} (tol {tol})"))
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn timed(label: &str, limit: Duration, elapsed: Duration) -> Result<(), String> {
    ensure(elapsed <= limit, || format!("{label} took {elapsed:?}, limit {limit:?}"))
}

fn example_one() -> Outcome {
    let start = Instant::now();
    let e0 = Projector::coordinate(3, &[0]);
    for mu in [0.2, 0.5, 0.8] {
        let inst = example1(mu).map_err(fail)?;
        let rep = min_postselected_error(&inst).map_err(fail)?;
        within(&format!("e_s at mu={mu}"), rep.e_s, 1.0 / 3.0, 1e-10)?;
        ensure(rep.case == CaseLabel::C1, || format!("case at mu={mu} is {}", rep.case))?;
        let ext = extremal_subspaces(&inst).map_err(fail)?;
        ensure(ext.t_max.rank() == 1, || format!("T^max rank {} at mu={mu}", ext.t_max.rank()))?;
        let d = ext.t_max.distance(&e0).map_err(fail)?;
        ensure(d < 1e-12, || format!("T^max is {d} away from |0><0| at mu={mu}"))?;
        for c in [0.1 * mu / 4.0, mu / 4.0] {
            let m = example1_measurement(&inst, c).map_err(fail)?;
            let want = Hermitian::from_real_diagonal(&[c * 4.0 / mu, 0.0, 0.0]);
            ensure((m.lambda_rho() - &want).max_abs() < 1e-12, || format!("Lambda_rho shape at mu={mu}, c={c}"))?;
            ensure(m.lambda_sigma().max_abs() == 0.0, || format!("Lambda_sigma nonzero at mu={mu}"))?;
            let e = postselected_error(&inst, &m).ok_or("error undefined")?;
            within(&format!("e(Lambda) at mu={mu}, c={c}"), e, 1.0 / 3.0, 1e-10)?;
        }
    }
    timed("example 1", Duration::from_secs(1), start.elapsed())?;
    Ok("e_s = 1/3, case C1, T^max = |0><0| for mu in {0.2, 0.5, 0.8}".into())
}

fn q_one() -> Outcome {
    let s7 = 7f64.sqrt();
    let (hi, lo) = ((4.0 + s7) / 3.0, (4.0 - s7) / 3.0);
    let inst = qubit_pair(0.5).map_err(fail)?;
    let inv_half = pseudo_power(inst.sigma_op(), -0.5, RANK_TOL).map_err(fail)?;
    let values = eig(&inst.rho_op().sandwich(&inv_half)).map_err(fail)?.values;
    within("largest eigenvalue", values[0], hi, 1e-10)?;
    within("smallest eigenvalue", values[1], lo, 1e-10)?;
    let (pr, ps) = critical_prior(inst.rho_op(), inst.sigma_op(), RANK_TOL).map_err(fail)?;
    within("p*_rho", pr, 0.5, 1e-10)?;
    within("p*_sigma", ps, 0.5, 1e-10)?;
    for p in [0.4, 0.5, 0.6] {
        let q = 1.0 - p;
        let want = match p {
            p if p > 0.5 => 1.0 / (1.0 + p / q * hi),
            p if p < 0.5 => 1.0 / (1.0 + q / p * hi),
            _ => 1.0 / (1.0 + hi),
        };
        let got = min_postselected_error(&qubit_pair(p).map_err(fail)?).map_err(fail)?.e_s;
        within(&format!("e_s at p={p}"), got, want, 1e-10)?;
    }
    Ok(format!("eigenvalues {:.6}, {:.6}; p* = (1/2, 1/2); e_s at p in {{0.4, 0.5, 0.6}}", hi, lo))
}

fn q_two() -> Outcome {
    let s7 = 7f64.sqrt();
    let c1 = 0.25 * (14.0 + 4.0 * s7) / (12.0 + 4.0 * s7);
    let c2 = 0.25 * (14.0 - 4.0 * s7) / (12.0 - 4.0 * s7);
    let tol = Tolerances::default();
    let mut got = Vec::new();
    for (p, target, printed) in [(0.7, c1, 0.272), (0.3, c2, 0.603)] {
        let inst = qubit_pair(p).map_err(fail)?;
        let ext = extremal_subspaces(&inst).map_err(fail)?;
        let params = if p > 0.5 {
            let psi = DensityOperator::new(ext.p_max.as_hermitian().clone(), &tol).map_err(fail)?;
            ConstructionParams::EqualC1 { psi_max: psi, c: None, residual_sigma: None }
        } else {
            let psi = DensityOperator::new(ext.p_min.as_hermitian().clone(), &tol).map_err(fail)?;
            ConstructionParams::EqualC2 { psi_min: psi, c: None, residual_rho: None }
        };
        let c = max_c(&inst, &params).map_err(fail)?;
        within(&format!("max c at p={p}"), c, target, 1e-12)?;
        let rounded = (c * 1000.0).round() / 1000.0;
        within(&format!("rounded max c at p={p}"), rounded, printed, 1e-12)?;
        let a_sigma = max_acceptance(&inst).map_err(fail)?.a_sigma_max;
        within(&format!("A_sigma max at p={p}"), a_sigma, target, 1e-12)?;
        got.push(c);
    }
    Ok(format!("max c = {:.3} / {:.3}", got[0], got[1]))
}

/// 50 equal-support instances, dims 2 to 4, priors 0.3, p* and 0.7.
fn equal_sweep() -> Vec<ProblemInstance> {
    (0..50u64)
        .map(|i| {
            let dim = 2 + (i % 3) as usize;
            let prior = match (i / 3) % 3 {
                0 => PriorChoice::Fixed(0.3),
                1 => PriorChoice::Critical,
                _ => PriorChoice::Fixed(0.7),
            };
            sample_instance(dim, SupportRelation::Equal, prior, child_seed(4, i)).expect("sweep instance")
        })
        .collect()
}

fn lower_bound(sweep: &[ProblemInstance]) -> Outcome {
    let start = Instant::now();
    let mut slack = f64::INFINITY;
    let mut constructed = 0usize;
    let mut cases = [0usize; 3];
    for (i, inst) in sweep.iter().enumerate() {
        let e_s = min_postselected_error(inst).map_err(fail)?.e_s;
        match classify(inst).map_err(fail)? {
            CaseLabel::C1 => cases[0] += 1,
            CaseLabel::C2 => cases[1] += 1,
            _ => cases[2] += 1,
        }
        for j in 0..200u64 {
            let m = sample_measurement(inst.dim(), child_seed(child_seed(40, i as u64), j));
            if let Some(e) = postselected_error(inst, &m) {
                slack = slack.min(e - e_s);
                ensure(e >= e_s - 1e-8, || format!("instance {i}, sample {j}: e = {e} < e_s = {e_s}"))?;
            }
        }
        let mut rng = rng_from_seed(child_seed(41, i as u64));
        for _ in 0..10 {
            let params = sample_params(inst, &mut rng).map_err(fail)?;
            for p in [params.clone(), params.with_c(None)] {
                let m = construct(inst, &p).map_err(fail)?;
                let e = postselected_error(inst, &m).ok_or("constructed measurement rejects everything")?;
                within(&format!("instance {i}, {}", p.name()), e, e_s, 1e-9)?;
                constructed += 1;
            }
        }
    }
    timed("lower-bound sweep", Duration::from_secs(30), start.elapsed())?;
    Ok(format!(
        "10000 random measurements, min e - e_s = {slack:.3e}; {constructed} constructed hit e_s (C1/C2/C3 = {}/{}/{})",
        cases[0], cases[1], cases[2]
    ))
}

fn dominance(sweep: &[ProblemInstance]) -> Outcome {
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_attain: f64 = 0.0;
    for (i, inst) in sweep.iter().enumerate() {
        let max = max_acceptance(inst).map_err(fail)?;
        let mut rng = rng_from_seed(child_seed(50, i as u64));
        for _ in 0..50 {
            let params = sample_params(inst, &mut rng).map_err(fail)?;
            let m = construct(inst, &params).map_err(fail)?;
            let (ar, as_) = acceptance(inst, &m);
            let excess = (ar - max.a_rho_max).max(as_ - max.a_sigma_max);
            worst_excess = worst_excess.max(excess);
            ensure(excess <= 1e-6, || format!("instance {i}: sampled member exceeds maximum by {excess}"))?;
        }
        for (rep, target, which) in [(&max.for_rho, max.a_rho_max, "rho"), (&max.for_sigma, max.a_sigma_max, "sigma")] {
            let m = rep.achieving_measurement.as_ref().ok_or("no achieving measurement")?;
            let (ar, as_) = acceptance(inst, m);
            let got = if which == "rho" { ar } else { as_ };
            worst_attain = worst_attain.max((got - target).abs());
            within(&format!("instance {i}, achieving A_{which}"), got, target, 1e-7)?;
            let e = postselected_error(inst, m).ok_or("achieving measurement rejects everything")?;
            within(
                &format!("instance {i}, achieving e for A_{which}"),
                e,
                min_postselected_error(inst).map_err(fail)?.e_s,
                1e-9,
            )?;
        }
    }
    Ok(format!("worst excess {worst_excess:.3e}, worst attainment gap {worst_attain:.3e}"))
}

fn unequal() -> Outcome {
    let start = Instant::now();
    let mut oracle_gap: f64 = 0.0;
    for (r, rel) in [SupportRelation::SigmaInsideRho, SupportRelation::RhoInsideSigma, SupportRelation::Incomparable]
        .into_iter()
        .enumerate()
    {
        for i in 0..30u64 {
            let seed = child_seed(60 + r as u64, i);
            let dim = 2 + (i % 3) as usize;
            let p = [0.3, 0.5, 0.7][(i / 3 % 3) as usize];
            let inst = sample_instance(dim, rel, PriorChoice::Fixed(p), seed).map_err(fail)?;
            let tag = format!("{rel} #{i}");
            let mut rng = rng_from_seed(seed);
            for _ in 0..10 {
                let params = sample_params(&inst, &mut rng).map_err(fail)?;
                for p in [params.clone(), params.with_c(None)] {
                    let m = construct(&inst, &p).map_err(fail)?;
                    let e = postselected_error(&inst, &m).ok_or("constructed measurement rejects everything")?;
                    ensure(e <= 1e-10, || format!("{tag}: constructed error {e}"))?;
                }
            }
            let max = max_acceptance_unequal(&inst).map_err(fail)?;
            let tr = |a: &Hermitian, b: &Hermitian| -> Result<f64, String> {
                Ok(1.0 - postselect::linalg::support_projector(a, RANK_TOL).map_err(fail)?.as_hermitian().tr_prod(b))
            };
            let (want_rho, want_sigma) = match rel {
                SupportRelation::SigmaInsideRho => (tr(inst.sigma_op(), inst.rho_op())?, 0.0),
                SupportRelation::RhoInsideSigma => (0.0, tr(inst.rho_op(), inst.sigma_op())?),
                _ => (tr(inst.sigma_op(), inst.rho_op())?, tr(inst.rho_op(), inst.sigma_op())?),
            };
            within(&format!("{tag}: A_rho max"), max.a_rho_max, want_rho, 1e-12)?;
            within(&format!("{tag}: A_sigma max"), max.a_sigma_max, want_sigma, 1e-12)?;
            let cfg = OracleConfig { trials: 2000, seed, refine_steps: 64, tol: 1e-3 };
            let (or, os) = oracle_max_acceptance(&inst, &cfg).map_err(fail)?;
            for (got, want, which) in [(or, want_rho, "rho"), (os, want_sigma, "sigma")] {
                oracle_gap = oracle_gap.max(want - got);
                ensure(got <= want + 1e-10 && got >= want - 1e-3, || {
                    format!("{tag}: oracle A_{which} = {got}, table {want}")
                })?;
            }
        }
    }
    Ok(format!("90 instances in {:?}, oracle within {oracle_gap:.2e} below the table", start.elapsed()))
}

fn lemma_suite() -> Outcome {
    let runs = [
        (Lemma::MaxTraceBound, 4, 500),
        (Lemma::MinTraceBound, 4, 500),
        (Lemma::SingleMin, 3, 50),
        (Lemma::GenProjEquivalence, 4, 200),
        (Lemma::UpsilonScaling, 3, 100),
        (Lemma::UpsilonEndpoints, 4, 100),
    ];
    let mut summary = Vec::new();
    for (lemma, dim, trials) in runs {
        let rep = check_lemma(lemma, dim, 7, trials).map_err(fail)?;
        ensure(rep.passed && rep.worst_violation <= lemma.tolerance(), || {
            format!(
                "{lemma:?}: worst violation {} over {} trials, {} failures",
                rep.worst_violation, trials, rep.failures
            )
        })?;
        summary.push(format!("{lemma:?} {:.1e}", rep.worst_violation));
    }
    Ok(summary.join(", "))
}

fn monte_carlo() -> Outcome {
    let start = Instant::now();
    let mu = 0.5;
    let inst = example1(mu).map_err(fail)?;
    let m = example1_measurement(&inst, mu / 4.0).map_err(fail)?;
    let rep = simulate(&inst, &m, 1_000_000, 42).map_err(fail)?;
    let elapsed = start.elapsed();
    let (e, ce) = (rep.e_hat.ok_or("no accepts")?, rep.ci95.e.ok_or("no CI")?);
    let (a, ca) = (rep.a_sigma_hat.ok_or("no sigma draws")?, rep.ci95.a_sigma.ok_or("no CI")?);
    within("e_hat", e, 1.0 / 3.0, ce)?;
    within("a_sigma_hat", a, mu / 4.0, ca)?;
    timed("simulation", Duration::from_secs(10), elapsed)?;
    Ok(format!("e_hat = {e:.5} +/- {ce:.5}, a_sigma_hat = {a:.5} +/- {ca:.5} in {elapsed:?}"))
}

fn determinism() -> Outcome {
    let first = golden_report().map_err(fail)?;
    for _ in 0..3 {
        ensure(golden_report().map_err(fail)? == first, || "golden report changed between runs".into())?;
    }
    Ok(format!("{} bytes, identical over 4 runs", first.len()))
}

fn main() -> ExitCode {
    let sweep = equal_sweep();
    let criteria: Vec<Criterion> = vec![
        ("example 1 reproduction", Box::new(example_one)),
        ("qubit pair spectrum and minimum error", Box::new(q_one)),
        ("qubit pair maximum c", Box::new(q_two)),
        ("lower bound over random measurements", Box::new(|| lower_bound(&sweep))),
        ("maximum acceptance dominance", Box::new(|| dominance(&sweep))),
        ("unequal supports", Box::new(unequal)),
        ("lemma suite", Box::new(lemma_suite)),
        ("monte carlo consistency", Box::new(monte_carlo)),
        ("golden report determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome =
            std::panic::catch_unwind(std::panic::AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let t = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name} [{t:.2}s]: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name} [{t:.2}s]: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        println!("all {} criteria passed", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("{failed} of {} criteria failed", criteria.len());
        ExitCode::FAILURE
    }
}
