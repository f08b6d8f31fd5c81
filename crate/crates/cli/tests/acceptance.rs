//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Tolerances and runtime limits are pinned below.

use std::f64::consts::{E, SQRT_2};
use std::process::Command;
use std::time::{Duration, Instant};

use ftoc_core::expr::parse;
use ftoc_core::fixedpoint::{newton, power_method, SmallMatrix};
use ftoc_core::funcspace::{Interval, QuadratureConfig, RealFunction};
use ftoc_core::operators::{apply, ftoc_operator, iterated_integral_one};
use ftoc_core::rng::{CounterRng, Cursor};
use ftoc_core::simplex::{
    ordering_partition_check, remainder_by_slicing, simplex_volume_montecarlo, MonteCarloConfig,
    SimplexSpec,
};
use ftoc_core::taylor::{expand, remainder_bound, report_for, verify_exchange, TwoVarIntegrand};

const SEED: u64 = 0x5EED_2024;

const BASIS_TOL: f64 = 1e-9;
const BASIS_RUNTIME: Duration = Duration::from_secs(10);
const FOUR_WAY_TOL: f64 = 1e-6;
const THREE_WAY_TOL: f64 = 1e-7;
const REMAINDER_RUNTIME: Duration = Duration::from_secs(120);
const BOUND_REL_SLACK: f64 = 1e-9;
const BOUND_ABS_SLACK: f64 = 1e-12;
const EXP_CASE_TOL: f64 = 1e-6;
const FTOC_TOL: f64 = 5e-10;
const EXCHANGE_TOL: f64 = 1e-8;
const PARTITION_SAMPLES: u64 = 600_000;
const CELL_SIGMAS: f64 = 5.0;
const CHI_SQUARE_DF5_999: f64 = 20.515;
const VOLUME_SAMPLES: u64 = 1_000_000;
const VOLUME_SIGMAS: f64 = 4.0;
const SIMPLEX_RUNTIME: Duration = Duration::from_secs(30);
const NEWTON_TOL: f64 = 1e-10;
const NEWTON_MAX_STEPS: usize = 6;
const NEWTON_SECOND: f64 = 1.4166667;
const NEWTON_SECOND_TOL: f64 = 1e-7;
const EIGEN_TOL: f64 = 1e-8;

struct Outcome {
    pass: bool,
    summary: String,
}

fn outcome(pass: bool, summary: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        summary: summary.into(),
    }
}

/// The six test functions with base point and probe interval.
const POOL: [(&str, f64, f64, f64); 6] = [
    ("exp(x)", 0.0, -1.5, 1.5),
    ("sin(x)", 0.3, -1.5, 2.0),
    ("cos(x)", -0.5, -2.0, 1.5),
    ("x^5 - 2*x^3 + x", 0.5, -1.0, 1.5),
    ("(1 + x)^(-1)", 0.5, 0.0, 1.5),
    ("ln(1 + x)", 0.5, 0.0, 1.5),
];

fn stream(id: u64) -> Cursor {
    CounterRng::new(SEED).split(id).cursor(0)
}

fn gap(values: &[f64]) -> f64 {
    let hi = values.iter().cloned().fold(f64::MIN, f64::max);
    let lo = values.iter().cloned().fold(f64::MAX, f64::min);
    hi - lo
}

fn basis_identity() -> Outcome {
    let cfg = QuadratureConfig::default();
    let mut cur = stream(1);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in 1..=4u32 {
        for _ in 0..20 {
            let a = cur.uniform(-3.0, 3.0);
            let x = a + cur.uniform(-2.0, 2.0);
            let closed = (x - a).powi(n as i32) / (1..=n).product::<u32>() as f64;
            let v = iterated_integral_one(n, a, x, &cfg).expect("iterated integral");
            worst = worst.max((v - closed).abs());
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= BASIS_TOL && elapsed <= BASIS_RUNTIME,
        format!("max |I^n 1 - (x-a)^n/n!| = {worst:.3e} (tol {BASIS_TOL:e}), {elapsed:.2?}"),
    )
}

fn remainder_agreement() -> Outcome {
    let cfg = QuadratureConfig::default();
    let mut cur = stream(2);
    let start = Instant::now();
    let (mut worst_low, mut worst_high) = (0.0f64, 0.0f64);
    for (text, a, lo, hi) in POOL {
        let f = parse(text).unwrap();
        for n in 0..=5usize {
            let t = expand(&f, a, n).unwrap();
            for _ in 0..10 {
                let x = cur.uniform(lo, hi);
                let r = report_for(&t, x, &cfg).unwrap();
                let sliced = remainder_by_slicing(&f, a, n, x, &cfg).unwrap();
                let mut values = vec![r.direct, r.exact_integral, sliced];
                if n <= 3 {
                    values.push(r.nested_integral.expect("nested form for N <= 3"));
                    worst_low = worst_low.max(gap(&values));
                } else {
                    assert!(r.nested_integral.is_none());
                    worst_high = worst_high.max(gap(&values));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst_low <= FOUR_WAY_TOL && worst_high <= THREE_WAY_TOL && elapsed <= REMAINDER_RUNTIME,
        format!(
            "N<=3 four-way gap {worst_low:.3e} (tol {FOUR_WAY_TOL:e}), \
             N in 4..=5 three-way gap {worst_high:.3e} (tol {THREE_WAY_TOL:e}), {elapsed:.2?}"
        ),
    )
}

fn remainder_bound_check() -> Outcome {
    let cfg = QuadratureConfig::default();
    let mut cur = stream(3);
    let mut violations = 0;
    let mut cases = 0;
    for (text, a, _, hi) in POOL {
        let f = parse(text).unwrap();
        for n in 0..=5usize {
            let t = expand(&f, a, n).unwrap();
            for _ in 0..10 {
                let x = cur.uniform(a, hi);
                let r = report_for(&t, x, &cfg).unwrap();
                cases += 1;
                if r.direct.abs() > r.bound * (1.0 + BOUND_REL_SLACK) + BOUND_ABS_SLACK {
                    violations += 1;
                }
            }
        }
    }
    let t = expand(&parse("exp(x)").unwrap(), 0.0, 2).unwrap();
    let r = report_for(&t, 1.0, &cfg).unwrap();
    let bound = remainder_bound(&t, 1.0, &cfg).unwrap();
    let (bound_oracle, direct_oracle) = (E / 6.0, E - 2.5);
    let exp_ok = (bound - bound_oracle).abs() <= EXP_CASE_TOL
        && (r.direct.abs() - direct_oracle).abs() <= EXP_CASE_TOL
        && (bound - 0.45304697).abs() <= EXP_CASE_TOL
        && (r.direct.abs() - 0.21828183).abs() <= EXP_CASE_TOL;
    outcome(
        violations == 0 && exp_ok,
        format!(
            "{violations} violations in {cases} cases; exp N=2 x=1: bound {bound:.8}, |direct| {:.8}",
            r.direct.abs()
        ),
    )
}

fn ftoc_fixed_point() -> Outcome {
    let cfg = QuadratureConfig::default();
    let mut cur = stream(4);
    let mut worst: f64 = 0.0;
    for (text, a, lo, hi) in POOL {
        let f = RealFunction::from_expr(parse(text).unwrap(), Interval::new(lo, hi).unwrap());
        let lf = apply(&ftoc_operator(a), &f, &cfg).unwrap();
        for _ in 0..20 {
            let x = cur.uniform(lo, hi);
            worst = worst.max((lf.eval(x).unwrap() - f.eval(x).unwrap()).abs());
        }
    }
    outcome(
        worst <= FTOC_TOL,
        format!("max |Lf - f| = {worst:.3e} (tol {FTOC_TOL:e})"),
    )
}

fn exchange_identity() -> Outcome {
    let cfg = QuadratureConfig::default();
    let cases = [
        ("1", "1"),
        ("x", "1"),
        ("1", "x^2"),
        ("sin(x)", "cos(x)"),
        ("exp(x)", "x"),
        ("x^3 - x", "exp(-x)"),
        ("cos(2*x)", "1 + x^2"),
        ("(2 + x)^(-1)", "sin(x)"),
        ("ln(3 + x)", "x"),
        ("exp(x)*sin(x)", "cos(x)"),
    ];
    let (a, u) = (-0.25, 1.5);
    let mut worst: f64 = 0.0;
    for (l, r) in cases {
        let g = TwoVarIntegrand::new(parse(l).unwrap(), parse(r).unwrap());
        worst = worst.max(verify_exchange(&g, a, u, &cfg).unwrap().gap);
    }
    let one = verify_exchange(&TwoVarIntegrand::one(), a, u, &cfg).unwrap();
    let closed = (u - a) * (u - a) / 2.0;
    let one_gap = (one.inner_first - closed).abs().max((one.outer_first - closed).abs());
    outcome(
        worst <= EXCHANGE_TOL && one_gap <= EXCHANGE_TOL,
        format!(
            "max exchange gap {worst:.3e}, g=1 gap to (u-a)^2/2 {one_gap:.3e} (tol {EXCHANGE_TOL:e})"
        ),
    )
}

fn simplex_tiling() -> Outcome {
    let start = Instant::now();
    let cfg = MonteCarloConfig::new(PARTITION_SAMPLES, SEED).unwrap();
    let p = ordering_partition_check(3, &cfg).unwrap();
    let expected = 1.0 / 6.0;
    let sigma = (expected * (1.0 - expected) / p.classified as f64).sqrt();
    let cells_ok = p
        .cell_counts
        .iter()
        .all(|&c| ((c as f64 / p.classified as f64) - expected).abs() <= CELL_SIGMAS * sigma);
    let tiling_ok = p.classified + p.discarded == PARTITION_SAMPLES
        && p.multiply_classified == 0
        && p.misclassified == 0
        && p.cell_counts.iter().sum::<u64>() == p.classified;
    let chi_ok = p.chi_square < CHI_SQUARE_DF5_999;
    let mut worst_sigmas: f64 = 0.0;
    for n in 2..=4usize {
        let s = SimplexSpec::new(n, 0.0, 1.0).unwrap();
        let m = simplex_volume_montecarlo(&s, &MonteCarloConfig::new(VOLUME_SAMPLES, SEED + n as u64).unwrap())
            .unwrap();
        let exact = 1.0 / (1..=n).product::<usize>() as f64;
        worst_sigmas = worst_sigmas.max((m.estimate - exact).abs() / m.std_error);
    }
    let elapsed = start.elapsed();
    outcome(
        tiling_ok && cells_ok && chi_ok && worst_sigmas <= VOLUME_SIGMAS && elapsed <= SIMPLEX_RUNTIME,
        format!(
            "tiling {tiling_ok}, cells within {CELL_SIGMAS}σ {cells_ok}, chi² {:.3} < {CHI_SQUARE_DF5_999}, \
             volume worst {worst_sigmas:.2}σ, {elapsed:.2?}",
            p.chi_square
        ),
    )
}

fn fixed_point_toolkit() -> Outcome {
    let t = newton(&parse("x^2 - 2").unwrap(), 1.0, NEWTON_TOL, 50).unwrap();
    let f_last = t.last() * t.last() - 2.0;
    let newton_ok = t.converged
        && t.iterations_used <= NEWTON_MAX_STEPS
        && f_last.abs() <= NEWTON_TOL
        && (t.iterates[2] - NEWTON_SECOND).abs() <= NEWTON_SECOND_TOL
        && (t.last() - SQRT_2).abs() <= 1e-10;
    let m = SmallMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
    let r = power_method(&m, &[1.0, 0.0], 1e-12, 1000).unwrap();
    let power_ok = r.trace.converged && (r.eigenvalue - 3.0).abs() <= EIGEN_TOL;
    outcome(
        newton_ok && power_ok,
        format!(
            "Newton {} steps, x_2 = {:.8}, |f| = {:.1e}; power eigenvalue {:.12}",
            t.iterations_used,
            t.iterates[2],
            f_last.abs(),
            r.eigenvalue
        ),
    )
}

fn ftoc(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ftoc"))
        .args(args)
        .output()
        .expect("spawn ftoc")
}

fn verifier_non_vacuity() -> Outcome {
    let clean = ftoc(&["verify"]);
    let faulty = ftoc(&["verify", "--perturb-basis", "1e-3"]);
    let faulty_text = format!(
        "{}{}",
        String::from_utf8_lossy(&faulty.stdout),
        String::from_utf8_lossy(&faulty.stderr)
    );
    let flagged = faulty_text
        .lines()
        .any(|l| l.contains("basis_closed_form") && (l.contains("false") || l.contains("FAIL")));
    let clean_code = clean.status.code();
    let faulty_code = faulty.status.code();
    outcome(
        clean_code == Some(0) && faulty_code == Some(1) && flagged,
        format!("clean exit {clean_code:?}, perturbed exit {faulty_code:?}, basis flagged {flagged}"),
    )
}

fn determinism() -> Outcome {
    let mut same = true;
    for format in ["csv", "json"] {
        let args = ["simplex", "--n", "3", "--samples", "200000", "--seed", "7", "--format", format];
        let (a, b) = (ftoc(&args), ftoc(&args));
        same &= a.status.success() && b.status.success() && a.stdout == b.stdout && !a.stdout.is_empty();
    }
    outcome(same, format!("csv and json outputs byte-identical: {same}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("basis identity", basis_identity),
        ("remainder agreement", remainder_agreement),
        ("remainder bound", remainder_bound_check),
        ("FTOC fixed point", ftoc_fixed_point),
        ("exchange identity", exchange_identity),
        ("simplex tiling", simplex_tiling),
        ("fixed-point toolkit", fixed_point_toolkit),
        ("verifier non-vacuity", verifier_non_vacuity),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        println!(
            "criterion {} {}: {name}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.summary
        );
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
