//! Single-pair link experiments: SER sweeps, block loss and the search
//! maximum.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::{LoadProfile, SearchModel};
use crate::constellation::{Constellation, SnrPoint};
use crate::error::{Error, Result};
use crate::scheduler::{best_window, mapper_actions, segmented_search, Action, Mapper, SearchSpace, Selection};
use crate::similarity::{Matching, SimilarityMap};

use super::channel::complex_gaussian;
use super::report::{budget_warning, Estimate};
use super::rng::{stream, Tag};
use super::traffic::{generate_slot, ArrivalProcess, TrafficModel};
use super::{run_units, Execution, Scheme};

/// Non-overlapping segment starts spread evenly over the grid with a random
/// common offset.
pub(crate) fn baseline_starts<R: Rng>(grid: usize, zeta: usize, segments: usize, rng: &mut R) -> Vec<usize> {
    if segments == 0 {
        return Vec::new();
    }
    let pitch = grid / segments;
    let offset = rng.random_range(0..=pitch - zeta);
    (0..segments).map(|z| z * pitch + offset).collect()
}

/// Places the URLLC segments of one slot, falling back to content-blind
/// placement when the ordered search runs out of windows.
pub(crate) fn place_segments<F>(
    scheme: Scheme,
    space: &SearchSpace,
    grid: usize,
    segments: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
    is_match: F,
) -> (Vec<usize>, bool)
where
    F: Fn(usize, usize, usize) -> bool,
{
    let zeta = space.zeta();
    if scheme == Scheme::Proposed && segments > 0 {
        match segmented_search(space, segments, is_match) {
            Ok(sel) => return (sel.iter().map(|s: &Selection| s.start).collect(), false),
            Err(Error::InfeasibleOrdering { .. }) => {
                return (baseline_starts(grid, zeta, segments, rng), true);
            }
            Err(_) => unreachable!("segmented search only fails on ordering"),
        }
    }
    (baseline_starts(grid, zeta, segments, rng), false)
}

/// Fixed `(n, m)` pair over the whole grid with i.i.d. Rayleigh fading per
/// symbol at each SNR of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairConfig {
    pub urllc_order: usize,
    pub embb_order: usize,
    pub mapper: Mapper,
    pub scheme: Scheme,
    /// Search windows `K` shared by the segments of a slot.
    pub windows: usize,
    pub lambda: f64,
    pub zeta: usize,
    pub snr_db: Vec<f64>,
    pub sttis: u64,
    pub seed: u64,
    /// Smallest error rate the run should resolve; smaller budgets warn.
    pub min_ser: f64,
    #[serde(skip)]
    pub execution: Execution,
}

impl PairConfig {
    pub fn new(urllc_order: usize, embb_order: usize, mapper: Mapper) -> Self {
        PairConfig {
            urllc_order,
            embb_order,
            mapper,
            scheme: Scheme::Proposed,
            windows: 1200,
            lambda: 7.0,
            zeta: 24,
            snr_db: vec![10.0, 20.0, 30.0, 40.0],
            sttis: 1000,
            seed: 1,
            min_ser: 1e-3,
            execution: Execution::Parallel,
        }
    }

    fn traffic(&self) -> Result<TrafficModel> {
        TrafficModel::single_user(ArrivalProcess::new(self.lambda, self.zeta)?, self.urllc_order)
    }

    /// Analytic profile matching this configuration.
    pub fn profile(&self) -> Result<LoadProfile> {
        let model = self.traffic()?;
        let grid = model.grid_symbols();
        let spp = model.arrivals.segments_per_packet(self.urllc_order)?;
        let mean = model.arrivals.mean_per_stti();
        let punctured = mean_capped_poisson(mean, model.packet_capacity()) * (spp * self.zeta) as f64;
        let search = match self.scheme {
            Scheme::Baseline => SearchModel::Baseline,
            Scheme::Proposed => SearchModel::Segmented {
                windows: self.windows,
                grid,
                segments_per_packet: spp,
                mean_packets: mean,
            },
        };
        LoadProfile::single(self.urllc_order, self.embb_order, grid, punctured, self.zeta, search)
    }
}

/// `E[min(N, cap)]` for `N ~ Poisson(mean)`.
pub(crate) fn mean_capped_poisson(mean: f64, cap: usize) -> f64 {
    let mut p = (-mean).exp();
    let mut below = 0.0;
    let mut mass = p;
    for n in 1..cap {
        p *= mean / n as f64;
        below += n as f64 * p;
        mass += p;
    }
    below + cap as f64 * (1.0 - mass).max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairPoint {
    pub snr_db: f64,
    pub embb: Estimate,
    pub urllc: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub config: PairConfig,
    pub points: Vec<PairPoint>,
    pub punctured: u64,
    /// Punctured positions where the eMBB symbol was kept.
    pub substituted: u64,
    /// Punctured positions whose URLLC symbol did not match the eMBB symbol.
    pub mismatched: u64,
    pub arrived: u64,
    pub dropped: u64,
    /// Slots where the ordered search ran out of windows.
    pub fallbacks: u64,
    pub warnings: Vec<String>,
}

impl PairReport {
    /// Fraction of URLLC symbols replaced by eMBB symbols.
    pub fn substitution_fraction(&self) -> f64 {
        if self.punctured == 0 {
            0.0
        } else {
            self.substituted as f64 / self.punctured as f64
        }
    }
}

#[derive(Debug, Clone, Default)]
struct PairCounts {
    embb_err: Vec<u64>,
    embb_sym: u64,
    urllc_err: Vec<u64>,
    urllc_sym: u64,
    punctured: u64,
    substituted: u64,
    mismatched: u64,
    arrived: u64,
    dropped: u64,
    fallbacks: u64,
}

impl PairCounts {
    fn add(&mut self, o: &PairCounts) {
        if self.embb_err.is_empty() {
            self.embb_err = vec![0; o.embb_err.len()];
            self.urllc_err = vec![0; o.urllc_err.len()];
        }
        for (a, b) in self.embb_err.iter_mut().zip(&o.embb_err) {
            *a += b;
        }
        for (a, b) in self.urllc_err.iter_mut().zip(&o.urllc_err) {
            *a += b;
        }
        self.embb_sym += o.embb_sym;
        self.urllc_sym += o.urllc_sym;
        self.punctured += o.punctured;
        self.substituted += o.substituted;
        self.mismatched += o.mismatched;
        self.arrived += o.arrived;
        self.dropped += o.dropped;
        self.fallbacks += o.fallbacks;
    }
}

/// Scaled noise `w / (h √γ)` after coherent equalization of one symbol.
#[inline]
fn equalized_noise<R: Rng>(rng: &mut R) -> Complex64 {
    let h = complex_gaussian(rng);
    let w = complex_gaussian(rng);
    w / h
}

pub fn run_pair(cfg: &PairConfig) -> Result<PairReport> {
    let model = cfg.traffic()?;
    if cfg.snr_db.is_empty() {
        return Err(Error::InvalidConfig("empty SNR grid".into()));
    }
    if cfg.sttis == 0 {
        return Err(Error::InvalidConfig("at least one mini-slot is required".into()));
    }
    let scales: Vec<f64> = cfg
        .snr_db
        .iter()
        .map(|&d| SnrPoint::from_db(d).map(|s| 1.0 / s.linear().sqrt()))
        .collect::<Result<_>>()?;
    let map = SimilarityMap::new(cfg.urllc_order, cfg.embb_order)?;
    let mapper = cfg.mapper.effective(cfg.urllc_order, cfg.embb_order);
    let matching = mapper.matching();
    let grid = model.grid_symbols();
    let space = SearchSpace::spread(grid, cfg.zeta, cfg.windows.min(grid - cfg.zeta + 1))?;
    let uc = map.urllc_constellation();
    let ec = map.embb_constellation();

    let units = run_units(cfg.sttis, cfg.execution, |t| -> Result<PairCounts> {
        let slot = generate_slot(&model, &[cfg.embb_order], cfg.seed, t)?;
        let segs = &slot.segments;
        let mut place_rng = stream(cfg.seed, Tag::Urllc, &[t, 1]);
        let (starts, fallback) = place_segments(cfg.scheme, &space, grid, segs.len(), &mut place_rng, |z, i, p| {
            map.matches(matching, segs[z][i], slot.embb[p])
        });

        let mut c = PairCounts {
            embb_err: vec![0; scales.len()],
            urllc_err: vec![0; scales.len()],
            embb_sym: grid as u64,
            arrived: slot.arrived as u64,
            dropped: slot.dropped as u64,
            fallbacks: u64::from(fallback),
            ..Default::default()
        };
        let mut tx: Vec<Complex64> = slot.embb.iter().map(|&e| ec.point(e)).collect();
        let mut urllc_tx: Vec<(usize, Complex64)> = Vec::new();
        for (seg, &s) in segs.iter().zip(&starts) {
            let embb = &slot.embb[s..s + cfg.zeta];
            let actions = mapper_actions(mapper, &map, seg, embb);
            for (i, a) in actions.iter().enumerate() {
                let (u, e) = (seg[i], embb[i]);
                c.punctured += 1;
                if !map.matches(matching, u, e) {
                    c.mismatched += 1;
                }
                let x = match a {
                    Action::KeepEmbb => {
                        c.substituted += 1;
                        ec.point(e)
                    }
                    Action::SendUrllc => uc.point(u),
                };
                tx[s + i] = x;
                urllc_tx.push((u, x));
            }
        }

        let mut noise = stream(cfg.seed, Tag::Noise, &[t]);
        for (p, &x) in tx.iter().enumerate() {
            let n = equalized_noise(&mut noise);
            let want = slot.embb[p];
            for (k, &sc) in scales.iter().enumerate() {
                c.embb_err[k] += u64::from(ec.detect(x + n * sc) != want);
            }
        }
        let mut link = stream(cfg.seed, Tag::UrllcLink, &[t]);
        for &(u, x) in &urllc_tx {
            let n = equalized_noise(&mut link);
            for (k, &sc) in scales.iter().enumerate() {
                c.urllc_err[k] += u64::from(uc.detect(x + n * sc) != u);
            }
        }
        c.urllc_sym = urllc_tx.len() as u64;
        Ok(c)
    });

    let mut total = PairCounts::default();
    for u in units {
        total.add(&u?);
    }
    let points = cfg
        .snr_db
        .iter()
        .enumerate()
        .map(|(k, &snr_db)| PairPoint {
            snr_db,
            embb: Estimate::new(total.embb_err[k], total.embb_sym),
            urllc: Estimate::new(total.urllc_err[k], total.urllc_sym),
        })
        .collect();
    let warnings = budget_warning("eMBB symbols", total.embb_sym, cfg.min_ser)
        .into_iter()
        .collect();
    Ok(PairReport {
        config: cfg.clone(),
        points,
        punctured: total.punctured,
        substituted: total.substituted,
        mismatched: total.mismatched,
        arrived: total.arrived,
        dropped: total.dropped,
        fallbacks: total.fallbacks,
        warnings,
    })
}

/// One URLLC block per trial searched over `K` windows of a fresh grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub pairs: Vec<(usize, usize)>,
    pub mappers: Vec<Mapper>,
    pub k_grid: Vec<usize>,
    pub zeta: usize,
    pub grid: usize,
    pub snr_db: f64,
    pub trials: u64,
    pub seed: u64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            pairs: vec![(2, 2), (2, 4), (2, 16)],
            mappers: vec![Mapper::Urllc, Mapper::Esrm],
            k_grid: vec![1, 75, 150, 300, 600, 1200],
            zeta: 24,
            grid: 2400,
            snr_db: 40.0,
            trials: 20_000,
            seed: 1,
            execution: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossRow {
    pub urllc_order: usize,
    pub embb_order: usize,
    /// Mapper requested; pairs that cannot substitute fall back to the URLLC mapper.
    pub mapper: Mapper,
    pub k: usize,
    /// Punctured eMBB symbols decoded in error, over punctured symbols.
    pub lost: Estimate,
    /// Mean matches of the chosen window.
    pub similarity: f64,
}

pub fn run_block_loss(cfg: &LossConfig) -> Result<Vec<LossRow>> {
    if cfg.k_grid.is_empty() || cfg.pairs.is_empty() || cfg.mappers.is_empty() || cfg.trials == 0 {
        return Err(Error::InvalidConfig(
            "loss sweep needs pairs, mappers, a K grid and trials".into(),
        ));
    }
    let scale = 1.0 / SnrPoint::from_db(cfg.snr_db)?.linear().sqrt();
    let mut rows = Vec::new();
    for &(n, m) in &cfg.pairs {
        let map = SimilarityMap::new(n, m)?;
        let spaces: Vec<SearchSpace> = cfg
            .k_grid
            .iter()
            .map(|&k| SearchSpace::spread(cfg.grid, cfg.zeta, k))
            .collect::<Result<_>>()?;
        let mappers: Vec<Mapper> = cfg.mappers.iter().map(|mp| mp.effective(n, m)).collect();
        let cells = mappers.len() * spaces.len();
        let uc = map.urllc_constellation();
        let ec = map.embb_constellation();

        let units = run_units(cfg.trials, cfg.execution, |trial| {
            let mut rng = stream(cfg.seed, Tag::Loss, &[n as u64, m as u64, trial]);
            let grid: Vec<usize> = (0..cfg.grid).map(|_| rng.random_range(0..m)).collect();
            let block: Vec<usize> = (0..cfg.zeta).map(|_| rng.random_range(0..n)).collect();
            let noise: Vec<Complex64> = (0..cfg.zeta).map(|_| equalized_noise(&mut rng) * scale).collect();
            let mut lost = vec![0u64; cells];
            let mut sim = vec![0u64; cells];
            for (a, &mapper) in mappers.iter().enumerate() {
                let matching = mapper.matching();
                for (b, space) in spaces.iter().enumerate() {
                    let starts = space.starts();
                    let (w, c) = best_window(cfg.zeta, 0..starts.len(), |t, k| {
                        map.matches(matching, block[t], grid[starts[k] + t])
                    })
                    .expect("non-empty search space");
                    let embb = &grid[starts[w]..starts[w] + cfg.zeta];
                    let actions = mapper_actions(mapper, &map, &block, embb);
                    let mut l = 0;
                    for t in 0..cfg.zeta {
                        let x = match actions[t] {
                            Action::KeepEmbb => ec.point(embb[t]),
                            Action::SendUrllc => uc.point(block[t]),
                        };
                        l += u64::from(ec.detect(x + noise[t]) != embb[t]);
                    }
                    lost[a * spaces.len() + b] = l;
                    sim[a * spaces.len() + b] = c as u64;
                }
            }
            (lost, sim)
        });

        let mut lost = vec![0u64; cells];
        let mut sim = vec![0u64; cells];
        for (l, s) in units {
            for i in 0..cells {
                lost[i] += l[i];
                sim[i] += s[i];
            }
        }
        for (a, &mapper) in cfg.mappers.iter().enumerate() {
            for (b, &k) in cfg.k_grid.iter().enumerate() {
                let i = a * spaces.len() + b;
                rows.push(LossRow {
                    urllc_order: n,
                    embb_order: m,
                    mapper,
                    k,
                    lost: Estimate::new(lost[i], cfg.trials * cfg.zeta as u64),
                    similarity: sim[i] as f64 / cfg.trials as f64,
                });
            }
        }
    }
    Ok(rows)
}

/// Mean and standard error of the best match count of a random URLLC block
/// against `candidates` independent random eMBB blocks.
pub fn simulate_max_similarity(
    map: &SimilarityMap,
    matching: Matching,
    zeta: usize,
    candidates: usize,
    trials: u64,
    seed: u64,
    execution: Execution,
) -> Result<(f64, f64)> {
    if candidates == 0 {
        return Err(Error::EmptyCandidates);
    }
    if trials < 2 {
        return Err(Error::InvalidConfig("at least two trials are required".into()));
    }
    let (n, m) = (map.urllc_order(), map.embb_order());
    let best = run_units(trials, execution, |trial| {
        let mut rng = stream(seed, Tag::Lemma, &[zeta as u64, candidates as u64, trial]);
        let block: Vec<usize> = (0..zeta).map(|_| rng.random_range(0..n)).collect();
        let pool: Vec<usize> = (0..zeta * candidates).map(|_| rng.random_range(0..m)).collect();
        let (_, c) = best_window(zeta, 0..candidates, |t, k| {
            map.matches(matching, block[t], pool[k * zeta + t])
        })
        .expect("non-empty candidates");
        c as u64
    });
    let sum: u64 = best.iter().sum();
    let sq: u64 = best.iter().map(|c| c * c).sum();
    let nt = trials as f64;
    let mean = sum as f64 / nt;
    let var = (sq as f64 / nt - mean * mean) * nt / (nt - 1.0);
    Ok((mean, (var / nt).sqrt()))
}

/// Unit-energy constellation for an order, for callers building streams by hand.
pub fn constellation(order: usize) -> Result<Constellation> {
    Constellation::new(order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capped_poisson_mean() {
        assert!((mean_capped_poisson(1.001, 25) - 1.001).abs() < 1e-12);
        assert!((mean_capped_poisson(3.0, 1) - (1.0 - (-3.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn baseline_starts_do_not_overlap() {
        let mut rng = stream(1, Tag::Urllc, &[]);
        for z in 1..=100 {
            let s = baseline_starts(2400, 24, z, &mut rng);
            assert!(s.windows(2).all(|w| w[1] >= w[0] + 24));
            assert!(*s.last().unwrap() + 24 <= 2400);
        }
    }

    #[test]
    fn pair_run_is_deterministic_across_execution_modes() {
        let mut cfg = PairConfig::new(2, 4, Mapper::Srm);
        cfg.sttis = 40;
        cfg.snr_db = vec![5.0, 25.0];
        let a = run_pair(&cfg).unwrap();
        cfg.execution = Execution::Sequential;
        let b = run_pair(&cfg).unwrap();
        assert_eq!(a.points, b.points);
        assert_eq!(a.punctured, b.punctured);
        assert_eq!(a.punctured, a.arrived * 96 - a.dropped * 96);
    }

    #[test]
    fn no_arrivals_no_punctures() {
        let mut cfg = PairConfig::new(2, 2, Mapper::Urllc);
        cfg.lambda = 0.0;
        cfg.sttis = 10;
        let r = run_pair(&cfg).unwrap();
        assert_eq!(r.punctured, 0);
        assert_eq!(r.points[0].urllc.trials, 0);
    }

    #[test]
    fn max_similarity_single_position() {
        let map = SimilarityMap::new(2, 2).unwrap();
        let (mean, se) =
            simulate_max_similarity(&map, Matching::Region, 1, 10, 20_000, 3, Execution::Parallel).unwrap();
        assert!((mean - (1.0 - 0.5f64.powi(10))).abs() < 4.0 * se + 1e-3);
    }
}
