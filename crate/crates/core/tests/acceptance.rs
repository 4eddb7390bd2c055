//! Acceptance suite: one pass/fail line per criterion.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use neutron_ks::interferometer::{
    bell_projector, Context, ForwardModel, InstrumentConfig, Rotator, Setting, Visibilities,
};
use neutron_ks::measurement::{analyze, fit_fringe, simulate_experiment, CountRecord, SimulationPlan};
use neutron_ks::peres_mermin::{
    assignment_contradiction, build_magic_square, classical_bound, qm_lhs, InequalityId,
};
use neutron_ks::{bell_state, eigenstate, BellFamily, Operator64, Sign, State64};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Box<dyn FnOnce() -> Outcome>);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed();
    match out {
        Ok(d) if took < limit => Ok(format!("{d}; {:.3} s", took.as_secs_f64())),
        Ok(d) => Err(format!("{d}; took {:.3} s, limit {:.0} s", took.as_secs_f64(), limit.as_secs_f64())),
        Err(d) => Err(d),
    }
}

fn square_products() -> Outcome {
    let sq = build_magic_square::<f64>();
    let product = |ops: [&Operator64; 3]| &(ops[0] * ops[1]) * ops[2];
    let mut worst_product: f64 = 0.0;
    let mut worst_comm: f64 = 0.0;
    let mut signs = Vec::new();
    for line in (0..3).map(|r| sq.row(r)).chain((0..3).map(|c| sq.column(c))) {
        let p = product(line);
        let id = Operator64::identity();
        let (plus, minus) = (p.max_deviation(&id), p.max_deviation(&id.scaled(Complex64::new(-1.0, 0.0))));
        signs.push(if plus < minus { 1 } else { -1 });
        worst_product = worst_product.max(plus.min(minus));
        for i in 0..3 {
            for j in 0..3 {
                let comm = &(line[i] * line[j]) - &(line[j] * line[i]);
                worst_comm = worst_comm.max(comm.max_deviation(&Operator64::zero()));
            }
        }
    }
    check(
        signs == [1, 1, 1, 1, 1, -1] && worst_product < 1e-12 && worst_comm < 1e-12,
        format!("signs {signs:?}, product dev {worst_product:.1e}, commutator {worst_comm:.1e}"),
    )
}

fn contradiction() -> Outcome {
    let r = assignment_contradiction();
    check(
        r.assignments_checked == 512 && r.satisfying_assignments == 0 && !r.satisfiable,
        format!("{} assignments, {} satisfying", r.assignments_checked, r.satisfying_assignments),
    )
}

fn bounds() -> Outcome {
    let full = classical_bound(InequalityId::Full5Term).map_err(|e| e.to_string())?;
    let reduced = classical_bound(InequalityId::Reduced3Term).map_err(|e| e.to_string())?;
    check(
        full.assignments_checked == 64
            && full.classical_max == 3
            && reduced.assignments_checked == 16
            && reduced.classical_max == 1,
        format!(
            "full max {} over {}, reduced max {} over {}",
            full.classical_max, full.assignments_checked, reduced.classical_max, reduced.assignments_checked
        ),
    )
}

fn ideal_values() -> Outcome {
    let psi = bell_state::<f64>();
    // operator products of each term, with the eigenvalue quantum mechanics assigns
    let expected = [-1.0, -1.0, 1.0, 1.0, -1.0];
    let mut worst: f64 = 0.0;
    for (term, lambda) in InequalityId::Full5Term.terms().iter().zip(expected) {
        let op = term
            .factors
            .iter()
            .fold(Operator64::identity(), |acc, o| &acc * &o.operator::<f64>());
        worst = worst.max(psi.eigen_residual(&op, lambda));
    }
    let full = qm_lhs(InequalityId::Full5Term, &psi).map_err(|e| e.to_string())?;
    let reduced = qm_lhs(InequalityId::Reduced3Term, &psi).map_err(|e| e.to_string())?;
    check(
        worst < 1e-12 && (full - 5.0).abs() < 1e-12 && (reduced - 3.0).abs() < 1e-12,
        format!("eigen residual {worst:.1e}, full {full:.15}, reduced {reduced:.15}"),
    )
}

fn bell_projections() -> Outcome {
    let psi = bell_state::<f64>();
    let mut worst: f64 = 0.0;
    for sign in [Sign::Plus, Sign::Minus] {
        let anti = psi.overlap_probability(&eigenstate(BellFamily::Anticorrelated, sign));
        let corr = psi.overlap_probability(&eigenstate(BellFamily::Correlated, sign));
        worst = worst.max((anti - 0.5).abs()).max(corr.abs());
    }
    check(worst < 1e-12, format!("max deviation {worst:.1e}"))
}

fn default_model() -> ForwardModel<f64> {
    ForwardModel::from_config(&InstrumentConfig::default()).expect("default config prepares")
}

fn headline() -> Outcome {
    let model = default_model();
    let plan = SimulationPlan::default();
    let (mut in_band, mut violated, mut sum) = (0, 0, 0.0);
    for seed in 0..100 {
        let records = simulate_experiment(&model, &plan, seed).map_err(|e| e.to_string())?;
        let r = analyze(&records).map_err(|e| e.to_string())?.inequality;
        in_band += usize::from((r.lhs - 2.291).abs() <= 0.03);
        violated += usize::from(r.violated);
        sum += r.lhs;
    }
    check(
        in_band == 100 && violated >= 99,
        format!("mean lhs {:.4}, {in_band}/100 within 2.291 ± 0.03, violated {violated}/100", sum / 100.0),
    )
}

fn term_reproduction() -> Outcome {
    const SEEDS: u64 = 200;
    let targets = [-0.679, -0.682, -0.93];
    let model = default_model();
    let plan = SimulationPlan::default();
    let mut values = vec![Vec::new(); 3];
    let mut errors = vec![Vec::new(); 3];
    let mut within = 0usize;
    for seed in 1000..1000 + SEEDS {
        let records = simulate_experiment(&model, &plan, seed).map_err(|e| e.to_string())?;
        let r = analyze(&records).map_err(|e| e.to_string())?.inequality;
        for (k, t) in r.terms.iter().enumerate() {
            within += usize::from((t.value - targets[k]).abs() <= 3.0 * t.std_error);
            values[k].push(t.value);
            errors[k].push(t.std_error);
        }
    }
    let total = 3 * SEEDS as usize;
    let mut ratios = [0.0; 3];
    for k in 0..3 {
        let n = values[k].len() as f64;
        let mean = values[k].iter().sum::<f64>() / n;
        let scatter = (values[k].iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let reported = errors[k].iter().sum::<f64>() / n;
        ratios[k] = reported / scatter;
    }
    let coverage = within as f64 / total as f64;
    check(
        coverage >= 0.99 && ratios.iter().all(|r| (r - 1.0).abs() <= 0.25),
        format!(
            "{within}/{total} term estimates within 3σ; std_error/scatter xx {:.3}, yy {:.3}, bell {:.3}",
            ratios[0], ratios[1], ratios[2]
        ),
    )
}

fn fit_oracle() -> Outcome {
    let record = |chi: f64, rate: f64| CountRecord {
        context: Context::Xx,
        alpha: 0.0,
        chi,
        rotator: Rotator::PiHalf,
        counts: 1_000_000,
        exposure: 1_000_000.0 / rate,
    };
    let mut worst: f64 = 0.0;
    for (a, b, phi, n) in [(10.0, 5.0, 0.3, 8), (2.0e4, 1.36e4, -2.0, 16), (1.0, 0.999, 3.0, 11)] {
        let samples: Vec<_> = (0..n)
            .map(|k| {
                let chi = 2.0 * PI * k as f64 / n as f64 + 0.1;
                record(chi, a + b * f64::cos(chi + phi))
            })
            .collect();
        let fit = fit_fringe(&samples).map_err(|e| e.to_string())?;
        let dphi = (fit.phase_phi - phi + PI).rem_euclid(2.0 * PI) - PI;
        worst = worst
            .max((fit.offset_a - a).abs() / a)
            .max((fit.amplitude_b - b).abs() / a)
            .max(dphi.abs());
    }
    let flat: Vec<_> = (0..8).map(|k| record(PI * k as f64 / 4.0, 42.0)).collect();
    let flat_fit = fit_fringe(&flat).map_err(|e| e.to_string())?;
    check(
        worst < 1e-9 && flat_fit.amplitude_b == 0.0 && flat_fit.phase_unconstrained,
        format!("max relative error {worst:.1e}; flat fringe B = {}", flat_fit.amplitude_b),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut model = ForwardModel::ideal(bell_state::<f64>());
    model.visibilities = Visibilities::perfect();
    let psi = bell_state::<f64>();
    let mut worst: f64 = 0.0;
    for i in 0..64 {
        let chi = 4.0 * PI * i as f64 / 64.0;
        for j in 0..8 {
            let alpha = 2.0 * PI * j as f64 / 8.0;
            // ⟨↑I| + e^{-iχ}⟨↑II| + e^{-iα}⟨↓I| + e^{-i(α+χ)}⟨↓II| against (0, −1, 1, 0)/√2
            let amp = (Complex64::from_polar(1.0, -alpha) - Complex64::from_polar(1.0, -chi)) * 0.5 * FRAC_1_SQRT_2;
            for context in [Context::Xx, Context::Yy] {
                let p = model.probability(&Setting::joint(context, alpha, chi)).map_err(|e| e.to_string())?;
                worst = worst.max((p - amp.norm_sqr()).abs());
            }
        }
        for rotator in [Rotator::Pi, Rotator::Off] {
            let p = model.probability(&Setting::bell(chi, rotator)).map_err(|e| e.to_string())?;
            let exact = psi.overlap_probability(&bell_projector(chi, rotator).map_err(|e| e.to_string())?);
            worst = worst.max((p - exact).abs());
        }
    }
    check(worst < 1e-12, format!("max deviation {worst:.1e} over 64 × 8 grid"))
}

fn random_qubit(rng: &mut ChaCha8Rng) -> [Complex64; 2] {
    let mut z = [Complex64::new(0.0, 0.0); 2];
    for c in &mut z {
        *c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    }
    let n = (z[0].norm_sqr() + z[1].norm_sqr()).sqrt();
    [z[0] / n, z[1] / n]
}

fn separable_states() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut max_lhs = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let state = State64::product(random_qubit(&mut rng), random_qubit(&mut rng)).map_err(|e| e.to_string())?;
        max_lhs = max_lhs.max(qm_lhs(InequalityId::Reduced3Term, &state).map_err(|e| e.to_string())?);
    }
    check(max_lhs <= 1.0 + 1e-12, format!("max reduced lhs {max_lhs:.6} over 1000 product states"))
}

fn main() -> ExitCode {
    let one_second = Duration::from_secs(1);
    let criteria: [Criterion; 10] = [
        ("magic-square products and commutators", Box::new(move || timed(one_second, square_products))),
        ("no noncontextual assignment", Box::new(move || timed(one_second, contradiction))),
        ("classical bounds by enumeration", Box::new(move || timed(one_second, bounds))),
        ("ideal quantum values", Box::new(ideal_values)),
        ("Bell-projection probabilities", Box::new(bell_projections)),
        ("headline reproduction, 100 seeds", Box::new(|| timed(Duration::from_secs(30), headline))),
        ("term-level reproduction, 200 seeds", Box::new(term_reproduction)),
        ("fit oracle", Box::new(fit_oracle)),
        ("interferometer vs algebra projections", Box::new(oracle_equivalence)),
        ("separable-state sanity", Box::new(separable_states)),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.into_iter().enumerate() {
        match run() {
            Ok(d) => println!("[PASS] {:>2}. {name}: {d}", k + 1),
            Err(d) => {
                failures += 1;
                println!("[FAIL] {:>2}. {name}: {d}", k + 1);
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
