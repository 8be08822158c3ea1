//! Maxima of i.i.d. binomial match counts.
//!
//! A URLLC block of `ζ` symbols matches a random eMBB block of the same length
//! in `X ~ Binomial(ζ, η)` positions. Searching `c` independent candidates and
//! keeping the best gives `E[max] = Σ_{k<ζ} (1 − F(k)^c)`.

use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};

/// Binomial(ζ, η) distribution tabulated over `0..=ζ`.
#[derive(Debug, Clone)]
pub struct BinomialTable {
    pmf: Vec<f64>,
    /// `ln F(k)`, accurate both near 0 and near 1.
    log_cdf: Vec<f64>,
}

impl BinomialTable {
    pub fn new(zeta: usize, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidProbability {
                name: "eta",
                value: eta,
            });
        }
        let n = zeta as u64;
        let log_pmf: Vec<f64> = (0..=zeta)
            .map(|j| {
                let j64 = j as u64;
                let hit = if j == 0 { 0.0 } else { j as f64 * eta.ln() };
                let miss = if j == zeta {
                    0.0
                } else {
                    (zeta - j) as f64 * (-eta).ln_1p()
                };
                ln_binomial(n, j64) + hit + miss
            })
            .collect();
        let pmf: Vec<f64> = log_pmf.iter().map(|l| l.exp()).collect();

        // Lower tail accumulated in log space; upper tail used once F > 1/2.
        let mut log_cdf = vec![0.0; zeta + 1];
        let mut acc = f64::NEG_INFINITY;
        for (k, &lp) in log_pmf.iter().enumerate() {
            acc = log_add(acc, lp);
            log_cdf[k] = acc;
        }
        let mut upper = 0.0;
        for k in (0..zeta).rev() {
            upper += pmf[k + 1];
            if upper < 0.5 {
                log_cdf[k] = (-upper).ln_1p();
            }
        }
        log_cdf[zeta] = 0.0;
        Ok(BinomialTable { pmf, log_cdf })
    }

    pub fn zeta(&self) -> usize {
        self.pmf.len() - 1
    }

    pub fn pmf(&self, k: usize) -> f64 {
        self.pmf[k]
    }

    pub fn cdf(&self, k: usize) -> f64 {
        self.log_cdf[k].exp()
    }

    pub fn log_cdf(&self, k: usize) -> f64 {
        self.log_cdf[k]
    }

    /// Expected maximum of `candidates` independent draws.
    ///
    /// Non-integer counts interpolate smoothly; one candidate gives `ζη`.
    pub fn expected_max(&self, candidates: f64) -> f64 {
        let c = candidates.max(1.0);
        (0..self.zeta()).map(|k| -(c * self.log_cdf[k]).exp_m1()).sum()
    }

    /// Expected zero-based position of the first maximum among `candidates`
    /// independent draws.
    pub fn expected_argmax(&self, candidates: usize) -> f64 {
        if candidates <= 1 {
            return 0.0;
        }
        let c = candidates;
        let mut mean = 0.0;
        for v in 0..=self.zeta() {
            let p = self.pmf[v];
            if p == 0.0 {
                continue;
            }
            // Strictly below v before the maximum, at most v after it.
            let ln_below = if v == 0 { f64::NEG_INFINITY } else { self.log_cdf[v - 1] };
            let ln_upto = self.log_cdf[v];
            let mut s = 0.0;
            for i in 1..c {
                let ln_term = i as f64 * ln_below + (c - 1 - i) as f64 * ln_upto;
                s += i as f64 * ln_term.exp();
            }
            mean += p * s;
        }
        mean
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_matches_direct_sum() {
        let t = BinomialTable::new(10, 0.3).unwrap();
        let mut acc = 0.0;
        for k in 0..=10 {
            let c = (1..=k).fold(1.0, |c, j| c * (10 - j + 1) as f64 / j as f64);
            acc += c * 0.3f64.powi(k as i32) * 0.7f64.powi(10 - k as i32);
            assert!((t.cdf(k) - acc).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn degenerate_eta() {
        let zero = BinomialTable::new(8, 0.0).unwrap();
        assert_eq!(zero.expected_max(100.0), 0.0);
        let one = BinomialTable::new(8, 1.0).unwrap();
        assert!((one.expected_max(100.0) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn single_candidate_is_the_mean() {
        let t = BinomialTable::new(24, 0.5).unwrap();
        assert!((t.expected_max(1.0) - 12.0).abs() < 1e-10);
    }

    #[test]
    fn small_case_closed_form() {
        // Max of 10 Bernoulli(1/2) draws.
        let t = BinomialTable::new(1, 0.5).unwrap();
        assert!((t.expected_max(10.0) - (1.0 - 0.5f64.powi(10))).abs() < 1e-15);
    }

    #[test]
    fn argmax_position_of_two_coins() {
        // Second position wins only for (0, 1): probability 1/4.
        let t = BinomialTable::new(1, 0.5).unwrap();
        assert!((t.expected_argmax(2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn argmax_position_by_enumeration() {
        // Three draws of Binomial(2, 0.4), enumerated exhaustively.
        let t = BinomialTable::new(2, 0.4).unwrap();
        let p = [0.36, 0.48, 0.16];
        let mut mean = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    let v = [a, b, c];
                    let best = *v.iter().max().unwrap();
                    let pos = v.iter().position(|&x| x == best).unwrap();
                    mean += p[a] * p[b] * p[c] * pos as f64;
                }
            }
        }
        assert!((t.expected_argmax(3) - mean).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_eta() {
        assert!(BinomialTable::new(4, 1.5).is_err());
    }
}
