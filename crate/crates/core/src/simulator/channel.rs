//! Path loss, block Rayleigh fading and adaptive modulation.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::constellation::{channel_ser_rayleigh, SnrPoint};

use super::rng::{stream, Tag};

pub const NOISE_POWER: f64 = 1e-9;
pub const PATH_LOSS_EXPONENT: f64 = 3.0;
/// Mini-slots over which an eMBB user's fading gain is held.
pub const COHERENCE_STTIS: usize = 14;
/// Channel SER an adapted modulation order must meet.
pub const ADAPTATION_TARGET: f64 = 0.01;

/// Circularly symmetric complex Gaussian sample with unit variance.
#[inline]
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Large-scale propagation to the users of a cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub path_loss_exponent: f64,
    pub noise_power: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        LinkBudget {
            path_loss_exponent: PATH_LOSS_EXPONENT,
            noise_power: NOISE_POWER,
        }
    }
}

impl LinkBudget {
    pub fn path_gain(&self, distance: f64) -> f64 {
        distance.powf(-self.path_loss_exponent)
    }

    /// Mean received SNR per symbol at `power_dbm` over `distance`.
    pub fn mean_snr(&self, power_dbm: f64, distance: f64) -> f64 {
        dbm_to_watts(power_dbm) * self.path_gain(distance) / self.noise_power
    }
}

/// Fading gains of every user during one coherence window.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    pub window: u64,
    pub gains: Vec<Complex64>,
    pub path_gains: Vec<f64>,
    pub noise_power: f64,
}

impl ChannelState {
    /// Draws the gains of coherence window `window`; each user has its own stream.
    pub fn draw(budget: &LinkBudget, distances: &[f64], seed: u64, window: u64) -> Self {
        let gains = (0..distances.len())
            .map(|u| complex_gaussian(&mut stream(seed, Tag::Fading, &[u as u64, window])))
            .collect();
        ChannelState {
            window,
            gains,
            path_gains: distances.iter().map(|&d| budget.path_gain(d)).collect(),
            noise_power: budget.noise_power,
        }
    }

    /// Instantaneous SNR of user `u` at transmit power `power_w`.
    pub fn snr(&self, u: usize, power_w: f64) -> f64 {
        power_w * self.path_gains[u] * self.gains[u].norm_sqr() / self.noise_power
    }

    /// Coherence window holding mini-slot `stti`.
    pub fn window_of(stti: u64, coherence: usize) -> u64 {
        stti / coherence as u64
    }
}

/// Largest order in {4, 16, 64} whose Rayleigh SER at `snr` is at most 1%,
/// BPSK otherwise.
pub fn adapt_modulation(snr: SnrPoint) -> usize {
    [64, 16, 4]
        .into_iter()
        .find(|&m| channel_ser_rayleigh(m, snr).expect("supported order") <= ADAPTATION_TARGET)
        .unwrap_or(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::bisect;

    #[test]
    fn adaptation_extremes() {
        assert_eq!(adapt_modulation(SnrPoint::new(0.0).unwrap()), 2);
        assert_eq!(adapt_modulation(SnrPoint::from_db(80.0).unwrap()), 64);
    }

    #[test]
    fn adaptation_switch_points() {
        for m in [4usize, 16, 64] {
            let db = bisect(
                |x| channel_ser_rayleigh(m, SnrPoint::from_db(x).unwrap()).unwrap() - ADAPTATION_TARGET,
                0.0,
                80.0,
                1e-9,
            )
            .unwrap();
            assert!(adapt_modulation(SnrPoint::from_db(db + 0.01).unwrap()) >= m);
            assert!(adapt_modulation(SnrPoint::from_db(db - 0.01).unwrap()) < m);
        }
    }

    #[test]
    fn fading_held_within_window() {
        let b = LinkBudget::default();
        let a = ChannelState::draw(&b, &[50.0, 80.0], 1, 3);
        let c = ChannelState::draw(&b, &[50.0, 80.0], 1, 3);
        let d = ChannelState::draw(&b, &[50.0, 80.0], 1, 4);
        assert_eq!(a, c);
        assert_ne!(a.gains, d.gains);
        assert_eq!(ChannelState::window_of(13, 14), 0);
        assert_eq!(ChannelState::window_of(14, 14), 1);
    }

    #[test]
    fn unit_power_gaussian() {
        let mut rng = stream(5, Tag::Noise, &[]);
        let n = 200_000;
        let p: f64 = (0..n).map(|_| complex_gaussian(&mut rng).norm_sqr()).sum::<f64>() / n as f64;
        assert!((p - 1.0).abs() < 0.01);
    }

    #[test]
    fn snr_from_budget() {
        let b = LinkBudget::default();
        // 10 dBm over 100 m: 0.01 W * 1e-6 / 1e-9.
        assert!((b.mean_snr(10.0, 100.0) - 10.0).abs() < 1e-9);
    }
}
