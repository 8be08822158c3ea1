//! Gray-mapped square QAM (and BPSK) constellations, maximum-likelihood
//! detection and single-link symbol error rates.
//!
//! Every constellation has unit average energy. Bits are split into an
//! in-phase half and a quadrature half; each half is a reflected-binary Gray
//! code of the amplitude level, with level 0 being the most positive
//! amplitude. The symbol index is the integer value of its label, so for
//! BPSK index 0 is `+1` and for 16-QAM indices `0..8` are the points with a
//! positive real part.

use std::f64::consts::FRAC_2_PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{normal_interval, q_function, rayleigh_average};

/// Modulation orders understood by the toolkit.
pub const SUPPORTED_ORDERS: [usize; 4] = [2, 4, 16, 64];

/// Rejects anything outside [`SUPPORTED_ORDERS`].
pub fn check_order(order: usize) -> Result<()> {
    if SUPPORTED_ORDERS.contains(&order) {
        Ok(())
    } else {
        Err(Error::UnsupportedOrder(order))
    }
}

/// Linear signal-to-noise ratio per symbol.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SnrPoint(f64);

impl SnrPoint {
    /// Noiseless limit.
    pub const INFINITE: SnrPoint = SnrPoint(f64::INFINITY);

    pub fn new(linear: f64) -> Result<Self> {
        if linear.is_nan() || linear < 0.0 {
            return Err(Error::InvalidSnr(linear));
        }
        Ok(SnrPoint(linear))
    }

    pub fn from_db(db: f64) -> Result<Self> {
        if db.is_nan() {
            return Err(Error::InvalidSnr(db));
        }
        Self::new(10f64.powf(db / 10.0))
    }

    pub fn linear(self) -> f64 {
        self.0
    }

    pub fn db(self) -> f64 {
        10.0 * self.0.log10()
    }

    /// SNR multiplied by a non-negative power factor.
    pub fn scaled(self, factor: f64) -> Self {
        debug_assert!(factor >= 0.0);
        if factor == 0.0 {
            return SnrPoint(0.0);
        }
        SnrPoint(self.0 * factor)
    }
}

impl TryFrom<f64> for SnrPoint {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<SnrPoint> for f64 {
    fn from(value: SnrPoint) -> f64 {
        value.0
    }
}

/// Propagation model used by the analytic error expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Awgn,
    /// Flat Rayleigh fading with unit mean power and coherent detection.
    Rayleigh,
}

/// A (possibly unbounded) interval along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    const ALL: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Distance from `x` to the interval when outside, zero when inside.
    fn gap(&self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }

    /// Distance from an inside point to the nearest finite end.
    fn margin(&self, x: f64) -> f64 {
        (x - self.lo).min(self.hi - x)
    }
}

/// Rectangular ML decision region of one constellation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionCell {
    pub re: Interval,
    pub im: Interval,
}

impl DecisionCell {
    pub fn contains(&self, p: Complex64) -> bool {
        self.re.contains(p.re) && self.im.contains(p.im)
    }

    /// Euclidean distance from `p` to the boundary of the cell.
    pub fn boundary_distance(&self, p: Complex64) -> f64 {
        if self.contains(p) {
            self.re.margin(p.re).min(self.im.margin(p.im))
        } else {
            self.re.gap(p.re).hypot(self.im.gap(p.im))
        }
    }

    /// Probability that a unit-energy transmission of `tx` lands in this cell
    /// at the given per-symbol SNR.
    pub fn hit_probability(&self, tx: Complex64, snr: SnrPoint, channel: Channel) -> f64 {
        match channel {
            Channel::Awgn => self.hit_probability_awgn(tx, snr.linear()),
            Channel::Rayleigh => rayleigh_average(|g| self.hit_probability_awgn(tx, snr.linear() * g)),
        }
    }

    fn hit_probability_awgn(&self, tx: Complex64, gamma: f64) -> f64 {
        // Per-dimension noise variance is 1 / (2 gamma).
        let scale = (2.0 * gamma).sqrt();
        axis_probability(self.re, tx.re, scale) * axis_probability(self.im, tx.im, scale)
    }
}

fn standardize(offset: f64, scale: f64) -> f64 {
    if offset.is_infinite() || offset == 0.0 {
        offset
    } else {
        offset * scale
    }
}

fn axis_probability(interval: Interval, x: f64, scale: f64) -> f64 {
    if interval == Interval::ALL {
        return 1.0;
    }
    let lo = standardize(interval.lo - x, scale);
    let hi = standardize(interval.hi - x, scale);
    if lo == 0.0 && hi == 0.0 {
        return 0.0;
    }
    normal_interval(lo, hi)
}

/// A normalized, Gray-labelled constellation.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    points: Vec<Complex64>,
    labels: Vec<String>,
    min_distance: f64,
    cells: Vec<DecisionCell>,
    /// Normalized amplitude of each level, most positive first.
    levels: Vec<f64>,
    bits_per_axis: u32,
}

fn gray(level: usize) -> usize {
    level ^ (level >> 1)
}

impl Constellation {
    /// Builds the unit-energy constellation of the given order.
    pub fn new(order: usize) -> Result<Self> {
        check_order(order)?;
        let bits = order.trailing_zeros();
        let (levels_per_axis, bits_per_axis) = if order == 2 {
            (2, 1)
        } else {
            let k = bits / 2;
            (1usize << k, k)
        };
        // Raw amplitudes s-1, s-3, ..., -(s-1).
        let raw: Vec<f64> = (0..levels_per_axis)
            .map(|l| (levels_per_axis - 1) as f64 - 2.0 * l as f64)
            .collect();
        let norm = if order == 2 {
            1.0
        } else {
            (2.0 * (order as f64 - 1.0) / 3.0).sqrt()
        };
        let levels: Vec<f64> = raw.iter().map(|a| a / norm).collect();
        let spacing = 2.0 / norm;

        let axis_interval = |level: usize| Interval {
            lo: if level + 1 == levels_per_axis {
                f64::NEG_INFINITY
            } else {
                levels[level] - spacing / 2.0
            },
            hi: if level == 0 {
                f64::INFINITY
            } else {
                levels[level] + spacing / 2.0
            },
        };

        let mut points = vec![Complex64::new(0.0, 0.0); order];
        let mut cells = vec![
            DecisionCell {
                re: Interval::ALL,
                im: Interval::ALL,
            };
            order
        ];
        if order == 2 {
            for level in 0..2 {
                points[level] = Complex64::new(levels[level], 0.0);
                cells[level] = DecisionCell {
                    re: axis_interval(level),
                    im: Interval::ALL,
                };
            }
        } else {
            for li in 0..levels_per_axis {
                for lq in 0..levels_per_axis {
                    let index = (gray(li) << bits_per_axis) | gray(lq);
                    points[index] = Complex64::new(levels[li], levels[lq]);
                    cells[index] = DecisionCell {
                        re: axis_interval(li),
                        im: axis_interval(lq),
                    };
                }
            }
        }
        let labels = (0..order)
            .map(|i| format!("{:0width$b}", i, width = bits as usize))
            .collect();

        Ok(Constellation {
            order,
            points,
            labels,
            min_distance: spacing,
            cells,
            levels,
            bits_per_axis,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.order.trailing_zeros()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn min_distance(&self) -> f64 {
        self.min_distance
    }

    pub fn cell(&self, index: usize) -> &DecisionCell {
        &self.cells[index]
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.order {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index,
                order: self.order,
            })
        }
    }

    /// Maximum-likelihood (minimum distance) decision, ties to the lowest index.
    pub fn ml_detect(&self, sample: Complex64) -> Result<usize> {
        if !sample.re.is_finite() || !sample.im.is_finite() {
            return Err(Error::NonFiniteSample {
                re: sample.re,
                im: sample.im,
            });
        }
        Ok(self.detect(sample))
    }

    /// [`ml_detect`](Self::ml_detect) without the finiteness check, for hot loops.
    #[inline]
    pub fn detect(&self, sample: Complex64) -> usize {
        if self.order == 2 {
            // Boundary at re = 0 is a tie; lowest index is +1.
            return usize::from(sample.re < 0.0);
        }
        match (self.slice(sample.re), self.slice(sample.im)) {
            (Some(li), Some(lq)) => (gray(li) << self.bits_per_axis) | gray(lq),
            _ => self.detect_exhaustive(sample),
        }
    }

    /// Nearest level on one axis, `None` when the sample sits on a threshold.
    #[inline]
    fn slice(&self, x: f64) -> Option<usize> {
        let top = self.levels.len() - 1;
        let v = (self.levels[0] - x) / self.min_distance;
        if v <= 0.0 {
            return Some(0);
        }
        if v >= top as f64 {
            return Some(top);
        }
        let frac = v - v.floor();
        if (frac - 0.5).abs() < 1e-9 {
            return None;
        }
        Some(v.round() as usize)
    }

    /// Exhaustive nearest-point scan.
    pub fn detect_exhaustive(&self, sample: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (sample - p).norm_sqr();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    /// Probability that the ML receiver outputs `decided` when the point `tx`
    /// (not necessarily from this constellation) is transmitted.
    pub fn decision_probability(&self, decided: usize, tx: Complex64, snr: SnrPoint, channel: Channel) -> f64 {
        self.cells[decided].hit_probability(tx, snr, channel)
    }

    /// Distance from `p` to the decision boundary of symbol `index`.
    pub fn boundary_distance(&self, index: usize, p: Complex64) -> f64 {
        self.cells[index].boundary_distance(p)
    }

    /// Average symbol error probability computed point by point from the
    /// decision cells (exact for these constellations).
    pub fn exact_ser(&self, snr: SnrPoint, channel: Channel) -> f64 {
        let correct: f64 = (0..self.order)
            .map(|i| self.decision_probability(i, self.points[i], snr, channel))
            .sum();
        1.0 - correct / self.order as f64
    }
}

/// Symbol error rate over AWGN.
///
/// Square QAM uses `4a·Q(√(3γ/(m−1)))` with `a = 1 − 1/√m`, clamped to 1;
/// BPSK uses the exact `Q(√(2γ))`.
pub fn channel_ser_awgn(order: usize, snr: SnrPoint) -> Result<f64> {
    check_order(order)?;
    let gamma = snr.linear();
    if order == 2 {
        return Ok(q_function((2.0 * gamma).sqrt()));
    }
    let m = order as f64;
    let a = 1.0 - 1.0 / m.sqrt();
    Ok((4.0 * a * q_function((3.0 * gamma / (m - 1.0)).sqrt())).min(1.0))
}

/// Exact square-QAM SER over AWGN, `4aQ − 4a²Q²`; offered for comparison
/// with the union-style form of [`channel_ser_awgn`].
pub fn channel_ser_awgn_exact(order: usize, snr: SnrPoint) -> Result<f64> {
    check_order(order)?;
    let gamma = snr.linear();
    if order == 2 {
        return Ok(q_function((2.0 * gamma).sqrt()));
    }
    let m = order as f64;
    let a = 1.0 - 1.0 / m.sqrt();
    let q = q_function((3.0 * gamma / (m - 1.0)).sqrt());
    Ok(4.0 * a * q - 4.0 * a * a * q * q)
}

/// Average symbol error rate over flat Rayleigh fading.
///
/// Square QAM: `2a(1−b) − a²(1 − (4b/π)·atan(1/b))` with
/// `b = √(3γ / (2(m−1) + 3γ))`. BPSK: `½(1 − √(γ/(1+γ)))`.
pub fn channel_ser_rayleigh(order: usize, snr: SnrPoint) -> Result<f64> {
    check_order(order)?;
    let gamma = snr.linear();
    if gamma.is_infinite() {
        return Ok(0.0);
    }
    if order == 2 {
        return Ok(0.5 * (1.0 - (gamma / (1.0 + gamma)).sqrt()));
    }
    let m = order as f64;
    let a = 1.0 - 1.0 / m.sqrt();
    let b = (3.0 * gamma / (2.0 * (m - 1.0) + 3.0 * gamma)).sqrt();
    // b·atan(1/b) → 0 as b → 0.
    let b_atan = if b == 0.0 { 0.0 } else { b * (1.0 / b).atan() };
    let ser = 2.0 * a * (1.0 - b) - a * a * (1.0 - 2.0 * FRAC_2_PI * b_atan);
    Ok(ser.clamp(0.0, 1.0))
}

/// Channel-only SER `P_m(γ)` for the selected propagation model.
pub fn channel_ser(order: usize, snr: SnrPoint, channel: Channel) -> Result<f64> {
    match channel {
        Channel::Awgn => channel_ser_awgn(order, snr),
        Channel::Rayleigh => channel_ser_rayleigh(order, snr),
    }
}
