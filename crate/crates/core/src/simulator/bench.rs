//! Timing of the similarity search against the window count.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scheduler::{best_window, SearchSpace};
use crate::similarity::{Matching, SimilarityMap};

use super::rng::{stream, Tag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub k_grid: Vec<usize>,
    pub zeta: usize,
    pub grid: usize,
    /// Timed repetitions per `K`; the first tenth is discarded as warm-up.
    pub repetitions: usize,
    /// Searches per repetition.
    pub batch: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            k_grid: vec![75, 150, 300, 600, 1200],
            zeta: 24,
            grid: 2400,
            repetitions: 300,
            batch: 50,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub k: usize,
    pub median_us: f64,
    pub p99_us: f64,
    pub comparisons: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Least-squares fit of median time against `K`.
    pub slope_us: f64,
    pub intercept_us: f64,
    pub r2: f64,
}

/// Times one search per call on the current thread.
pub fn benchmark_search(cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.k_grid.len() < 2 || cfg.repetitions < 10 || cfg.batch == 0 {
        return Err(Error::InvalidConfig(
            "benchmark needs two K values, ten repetitions and a non-empty batch".into(),
        ));
    }
    let map = SimilarityMap::new(2, 2)?;
    let mut rng = stream(cfg.seed, Tag::Bench, &[]);
    let grid: Vec<usize> = (0..cfg.grid).map(|_| rng.random_range(0..2)).collect();
    let blocks: Vec<Vec<usize>> = (0..cfg.batch)
        .map(|_| (0..cfg.zeta).map(|_| rng.random_range(0..2)).collect())
        .collect();

    let spaces: Vec<SearchSpace> = cfg
        .k_grid
        .iter()
        .map(|&k| SearchSpace::spread(cfg.grid, cfg.zeta, k))
        .collect::<Result<_>>()?;
    // K values are interleaved within each repetition so that drift in the
    // machine's speed affects all of them alike.
    let warmup = cfg.repetitions / 10;
    let mut times = vec![Vec::with_capacity(cfg.repetitions); spaces.len()];
    for rep in 0..cfg.repetitions + warmup {
        for (i, space) in spaces.iter().enumerate() {
            let starts = space.starts();
            let t0 = Instant::now();
            for block in &blocks {
                let best = best_window(cfg.zeta, 0..starts.len(), |t, w| {
                    map.matches(Matching::Region, block[t], grid[starts[w] + t])
                });
                std::hint::black_box(best);
            }
            if rep >= warmup {
                times[i].push(t0.elapsed().as_secs_f64() * 1e6 / cfg.batch as f64);
            }
        }
    }
    let rows: Vec<BenchRow> = cfg
        .k_grid
        .iter()
        .zip(&mut times)
        .map(|(&k, t)| {
            t.sort_by(f64::total_cmp);
            let at = |q: f64| t[((t.len() - 1) as f64 * q).round() as usize];
            BenchRow {
                k,
                median_us: at(0.5),
                p99_us: at(0.99),
                comparisons: k * cfg.zeta,
            }
        })
        .collect();

    let (slope_us, intercept_us, r2) = linear_fit(
        &rows.iter().map(|r| r.k as f64).collect::<Vec<_>>(),
        &rows.iter().map(|r| r.median_us).collect::<Vec<_>>(),
    );
    Ok(BenchReport {
        rows,
        slope_us,
        intercept_us,
        r2,
    })
}

/// Ordinary least squares `y = a x + b` with its coefficient of determination.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_fits_perfectly() {
        let (a, b, r2) = linear_fit(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]);
        assert!((a - 2.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_benchmark_runs() {
        let r = benchmark_search(&BenchConfig {
            k_grid: vec![10, 20],
            repetitions: 10,
            batch: 2,
            ..BenchConfig::default()
        })
        .unwrap();
        assert_eq!(r.rows.len(), 2);
        assert_eq!(r.rows[1].comparisons, 480);
    }
}
