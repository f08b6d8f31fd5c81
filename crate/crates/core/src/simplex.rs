//! Volumes of ordered simplices `{a ≤ t_n ≤ … ≤ t_1 ≤ x}`: closed form,
//! Monte Carlo estimate, the tiling of the cube by the `n!` order cells,
//! and the sliced form of the Taylor remainder.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::expr::{differentiate_n, Expr};
use crate::funcspace::{integrate_with, QuadratureConfig};
use crate::operators::basis_closed_form;
use crate::report::CheckReport;
use crate::rng::CounterRng;

pub const MAX_DIMENSION: usize = 12;
pub const MAX_SAMPLES: u64 = 1_000_000_000;
/// Dimension range accepted by [`ordering_partition_check`].
pub const PARTITION_DIMENSIONS: std::ops::RangeInclusive<usize> = 2..=6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexSpec {
    n: usize,
    a: f64,
    x: f64,
}

impl SimplexSpec {
    pub fn new(n: usize, a: f64, x: f64) -> Result<Self> {
        if !(1..=MAX_DIMENSION).contains(&n) {
            return Err(Error::precondition(format!(
                "simplex dimension must lie in 1..={MAX_DIMENSION}, got {n}"
            )));
        }
        if !(a.is_finite() && x.is_finite() && x > a) {
            return Err(Error::precondition(format!(
                "simplex needs finite a < x, got a = {a}, x = {x}"
            )));
        }
        Ok(SimplexSpec { n, a, x })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    /// `(x - a)^n`, the volume of the enclosing cube.
    pub fn cube_volume(&self) -> f64 {
        (self.x - self.a).powi(self.n as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarloConfig {
    pub samples: u64,
    pub seed: u64,
}

impl MonteCarloConfig {
    pub fn new(samples: u64, seed: u64) -> Result<Self> {
        let cfg = MonteCarloConfig { samples, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_SAMPLES).contains(&self.samples) {
            return Err(Error::Config(format!(
                "samples must lie in 1..={MAX_SAMPLES}, got {}",
                self.samples
            )));
        }
        Ok(())
    }
}

/// `(x - a)^n / n!`.
pub fn simplex_volume_exact(s: &SimplexSpec) -> f64 {
    basis_closed_form(s.n as u32, s.a, s.x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub hits: u64,
    pub samples: u64,
}

/// Fills `buf` with sample `index`'s coordinates in `[0, 1)`.
#[inline]
fn draw(rng: &CounterRng, index: u64, buf: &mut [f64]) {
    let n = buf.len() as u64;
    for (k, slot) in buf.iter_mut().enumerate() {
        *slot = rng.f64_at(index * n + k as u64);
    }
}

/// Samples in `range` whose coordinates satisfy `u_1 ≥ u_2 ≥ … ≥ u_n`.
pub fn count_ordered_hits(n: usize, seed: u64, range: std::ops::Range<u64>) -> u64 {
    let rng = CounterRng::new(seed);
    let mut buf = vec![0.0; n];
    let mut hits = 0;
    for j in range {
        draw(&rng, j, &mut buf);
        if buf.windows(2).all(|w| w[1] <= w[0]) {
            hits += 1;
        }
    }
    hits
}

fn estimate_from_hits(s: &SimplexSpec, hits: u64, samples: u64) -> MonteCarloEstimate {
    let p = hits as f64 / samples as f64;
    let scale = s.cube_volume();
    MonteCarloEstimate {
        estimate: scale * p,
        std_error: scale * (p * (1.0 - p) / samples as f64).sqrt(),
        hits,
        samples,
    }
}

/// Fraction of uniform cube samples that fall in the ordered simplex,
/// scaled by the cube volume. Deterministic in the seed.
pub fn simplex_volume_montecarlo(
    s: &SimplexSpec,
    cfg: &MonteCarloConfig,
) -> Result<MonteCarloEstimate> {
    cfg.validate()?;
    let hits = count_ordered_hits(s.n, cfg.seed, 0..cfg.samples);
    Ok(estimate_from_hits(s, hits, cfg.samples))
}

/// Same estimate with the sample range split across `workers` threads.
/// Hit counts are integers, so the result is bit-identical to
/// [`simplex_volume_montecarlo`].
pub fn simplex_volume_montecarlo_parallel(
    s: &SimplexSpec,
    cfg: &MonteCarloConfig,
    workers: usize,
) -> Result<MonteCarloEstimate> {
    cfg.validate()?;
    let workers = workers.max(1) as u64;
    let block = cfg.samples.div_ceil(workers);
    let hits = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let start = (w * block).min(cfg.samples);
                let end = ((w + 1) * block).min(cfg.samples);
                scope.spawn(move || count_ordered_hits(s.n, cfg.seed, start..end))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("monte carlo worker panicked"))
            .sum()
    });
    Ok(estimate_from_hits(s, hits, cfg.samples))
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..n).collect();
    let mut out = vec![current.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
}

/// Position of `perm` in the lexicographic order of permutations.
pub fn lehmer_rank(perm: &[usize]) -> usize {
    let n = perm.len();
    let mut rank = 0;
    for i in 0..n {
        let smaller_after = perm[i + 1..].iter().filter(|&&v| v < perm[i]).count();
        rank = rank * (n - i) + smaller_after;
    }
    rank
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// Lexicographic rank of the permutation listing coordinate indices in
    /// ascending order of value.
    Cell(usize),
    /// Two coordinates coincide: the sample lies on a cell boundary.
    Discarded,
}

pub fn classify_sample(coords: &[f64]) -> Classification {
    let mut order: Vec<usize> = (0..coords.len()).collect();
    order.sort_by(|&i, &j| coords[i].total_cmp(&coords[j]));
    if order.windows(2).any(|w| coords[w[0]] == coords[w[1]]) {
        return Classification::Discarded;
    }
    Classification::Cell(lehmer_rank(&order))
}

/// Whether `coords` satisfies `coords[perm[0]] ≤ coords[perm[1]] ≤ …`.
pub fn in_cell(coords: &[f64], perm: &[usize]) -> bool {
    perm.windows(2).all(|w| coords[w[0]] <= coords[w[1]])
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionReport {
    pub n: usize,
    pub samples: u64,
    pub classified: u64,
    pub discarded: u64,
    pub cell_counts: Vec<u64>,
    /// Classified samples that satisfied more than one cell's inequalities.
    pub multiply_classified: u64,
    /// Classified samples whose membership disagreed with their key.
    pub misclassified: u64,
    pub chi_square: f64,
    /// 99.9% quantile of the chi-square law with `n! - 1` degrees of freedom.
    pub chi_square_threshold: f64,
    /// Largest `|freq - 1/n!| / σ` over cells.
    pub max_abs_z: f64,
}

impl PartitionReport {
    pub const Z_LIMIT: f64 = 5.0;
    pub const CHI_SQUARE_LEVEL: f64 = 0.999;

    pub fn frequencies(&self) -> Vec<f64> {
        self.cell_counts
            .iter()
            .map(|&c| c as f64 / self.classified as f64)
            .collect()
    }

    pub fn tiling_ok(&self) -> bool {
        self.classified + self.discarded == self.samples
            && self.multiply_classified == 0
            && self.misclassified == 0
            && self.cell_counts.iter().sum::<u64>() == self.classified
    }

    pub fn checks(&self) -> Vec<CheckReport> {
        let leaked = (self.samples as i128
            - self.classified as i128
            - self.discarded as i128)
            .unsigned_abs()
            + self.multiply_classified as u128
            + self.misclassified as u128;
        vec![
            CheckReport::new(format!("tiling[n={}]", self.n), leaked as f64, 0.0)
                .and(self.tiling_ok(), "sample accounting mismatch")
                .with_detail(format!(
                    "{} classified, {} discarded of {}",
                    self.classified, self.discarded, self.samples
                )),
            CheckReport::new(
                format!("cell_frequencies[n={}]", self.n),
                self.max_abs_z,
                Self::Z_LIMIT,
            ),
            CheckReport::new(
                format!("equal_cell_volumes[n={}]", self.n),
                self.chi_square,
                self.chi_square_threshold,
            ),
        ]
    }

    pub fn pass(&self) -> bool {
        self.checks().iter().all(|c| c.pass)
    }
}

/// 99.9% chi-square quantile for `df` degrees of freedom.
pub fn chi_square_quantile(df: u64, level: f64) -> f64 {
    ChiSquared::new(df as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(level)
}

/// Classifies uniform cube samples into the `n!` order cells and checks
/// that every sample lands in exactly one cell with equal frequencies.
pub fn ordering_partition_check(n: usize, cfg: &MonteCarloConfig) -> Result<PartitionReport> {
    if !PARTITION_DIMENSIONS.contains(&n) {
        return Err(Error::precondition(format!(
            "partition check needs 2 <= n <= 6, got {n}"
        )));
    }
    cfg.validate()?;
    let perms = permutations(n);
    let cells = perms.len();
    let rng = CounterRng::new(cfg.seed);
    let mut buf = vec![0.0; n];
    let mut counts = vec![0u64; cells];
    let (mut discarded, mut multiply, mut misclassified) = (0u64, 0u64, 0u64);
    for j in 0..cfg.samples {
        draw(&rng, j, &mut buf);
        match classify_sample(&buf) {
            Classification::Discarded => discarded += 1,
            Classification::Cell(key) => {
                counts[key] += 1;
                let mut memberships = 0;
                for (idx, perm) in perms.iter().enumerate() {
                    if in_cell(&buf, perm) {
                        memberships += 1;
                        if idx != key {
                            misclassified += 1;
                        }
                    }
                }
                if memberships > 1 {
                    multiply += 1;
                }
            }
        }
    }
    let classified = cfg.samples - discarded;
    let p = 1.0 / cells as f64;
    let expected = classified as f64 * p;
    let chi_square = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let sigma = (p * (1.0 - p) / classified as f64).sqrt();
    let max_abs_z = counts
        .iter()
        .map(|&c| ((c as f64 / classified as f64 - p) / sigma).abs())
        .fold(0.0, f64::max);
    Ok(PartitionReport {
        n,
        samples: cfg.samples,
        classified,
        discarded,
        cell_counts: counts,
        multiply_classified: multiply,
        misclassified,
        chi_square,
        chi_square_threshold: chi_square_quantile(
            cells as u64 - 1,
            PartitionReport::CHI_SQUARE_LEVEL,
        ),
        max_abs_z,
    })
}

/// Volume of `{floor ≤ t_N ≤ … ≤ t_1 ≤ ceiling}`: `(ceiling - floor)^N / N!`.
pub fn ordered_cell_volume(n: usize, floor: f64, ceiling: f64) -> f64 {
    basis_closed_form(n as u32, floor, ceiling)
}

/// `N`-volume of the slice `{t ≤ t_N ≤ … ≤ t_1 ≤ x}` of the ordered simplex
/// at `t_{N+1} = t`, i.e. `(x - t)^N / N!`.
pub fn sliced_simplex_volume(n: usize, t: f64, a: f64, x: f64) -> Result<f64> {
    if !(a <= t && t <= x) {
        return Err(Error::precondition(format!(
            "slice height must satisfy a <= t <= x, got a = {a}, t = {t}, x = {x}"
        )));
    }
    Ok(ordered_cell_volume(n, t, x))
}

/// `∫_a^x f^{(N+1)}(t) · Vol(slice at t) dt`.
///
/// For `x < a` the slice is `{x ≤ t_N ≤ … ≤ t_1 ≤ t}` and the oriented
/// integral picks up the sign `(-1)^N`.
pub fn remainder_by_slicing(
    f: &Expr,
    a: f64,
    n: usize,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let derivative = differentiate_n(f, n + 1);
    remainder_by_slicing_with(&derivative, a, n, x, cfg)
}

/// [`remainder_by_slicing`] with `f^{(N+1)}` already computed.
pub fn remainder_by_slicing_with(
    derivative: &Expr,
    a: f64,
    n: usize,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let integrand = |t: f64| {
        let volume = if x >= a {
            sliced_simplex_volume(n, t, a, x)?
        } else {
            sign * ordered_cell_volume(n, x, t)
        };
        Ok(derivative.eval(t)? * volume)
    };
    Ok(integrate_with(&integrand, a, x, cfg)?.value)
}
