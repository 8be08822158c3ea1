//! Multi-user cell: path loss, block fading and adaptive modulation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::{embb_ser, substitution_fraction, urllc_ser, LoadProfile, SearchModel};
use crate::constellation::{Channel, SnrPoint};
use crate::error::{Error, Result};
use crate::scheduler::{mapper_actions, select_mapper, Action, Mapper, SearchSpace};
use crate::similarity::{EpsilonPolicy, SimilarityAtlas, SimilarityMap};

use super::channel::{adapt_modulation, complex_gaussian, ChannelState, LinkBudget, COHERENCE_STTIS};
use super::link::{mean_capped_poisson, place_segments};
use super::report::{budget_warning, Estimate};
use super::rng::{stream, Tag};
use super::traffic::{equal_allocation, generate_slot, ArrivalProcess, TrafficModel, RESOURCE_ELEMENTS};
use super::{run_units, Execution, Scheme};

/// Span of eMBB symbols over which one reliability sample is measured.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReliabilityBlock {
    /// One user's symbols in one mini-slot.
    Stti,
    /// One user's symbols over a coherence window.
    #[default]
    Coherence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellConfig {
    /// Distance of each eMBB user from the base station in metres.
    pub distances: Vec<f64>,
    pub urllc_distance: f64,
    pub budget: LinkBudget,
    /// Mini-slots per coherence window.
    pub coherence: usize,
    pub power_dbm: Vec<f64>,
    /// Fixed mapper, or `None` to select one per user from the URLLC target.
    /// The baseline scheme always sends URLLC points (code-based puncturing).
    pub mapper: Option<Mapper>,
    pub urllc_target: f64,
    pub scheme: Scheme,
    pub windows: usize,
    pub lambda: f64,
    pub zeta: usize,
    pub urllc_order: usize,
    /// Coherence windows simulated per power point.
    pub coherence_windows: u64,
    pub seed: u64,
    /// eMBB block SER targets for the reliability curve.
    pub targets: Vec<f64>,
    pub reliability_block: ReliabilityBlock,
    pub min_ser: f64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for CellConfig {
    fn default() -> Self {
        CellConfig {
            distances: (1..=10).map(|u| 16.0 * u as f64).collect(),
            urllc_distance: 100.0,
            budget: LinkBudget::default(),
            coherence: COHERENCE_STTIS,
            power_dbm: (0..=8).map(|p| 5.0 * p as f64).collect(),
            mapper: None,
            urllc_target: 1e-2,
            scheme: Scheme::Proposed,
            windows: 1200,
            lambda: 7.0,
            zeta: 24,
            urllc_order: 2,
            coherence_windows: 200,
            seed: 1,
            targets: vec![1e-3, 1e-2, 1e-1],
            reliability_block: ReliabilityBlock::Coherence,
            min_ser: 1e-3,
            execution: Execution::Parallel,
        }
    }
}

impl CellConfig {
    pub fn traffic(&self) -> Result<TrafficModel> {
        TrafficModel::new(
            equal_allocation(RESOURCE_ELEMENTS, self.distances.len()),
            ArrivalProcess::new(self.lambda, self.zeta)?,
            self.urllc_order,
        )
    }

    fn validate(&self) -> Result<()> {
        if self.distances.is_empty()
            || self
                .distances
                .iter()
                .chain([&self.urllc_distance])
                .any(|d| d.is_nan() || *d <= 0.0)
        {
            return Err(Error::InvalidConfig("user distances must be positive".into()));
        }
        if self.power_dbm.is_empty() || self.power_dbm.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidConfig("power grid must be non-empty and finite".into()));
        }
        if self.coherence == 0 || self.coherence_windows == 0 {
            return Err(Error::InvalidConfig(
                "coherence length and window count must be positive".into(),
            ));
        }
        if self.targets.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::InvalidConfig("reliability targets must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellPoint {
    pub power_dbm: f64,
    pub orders: Vec<usize>,
    pub mappers: Vec<Mapper>,
    pub embb: Estimate,
    pub per_user: Vec<Estimate>,
    pub urllc: Estimate,
    /// `(target, fraction of eMBB blocks meeting it)`.
    pub reliability: Vec<(f64, f64)>,
    /// Fraction of each user's blocks meeting each target, user-major.
    pub per_user_reliability: Vec<Vec<f64>>,
    /// `(target, fraction of URLLC packets meeting it)`.
    pub urllc_reliability: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub config: CellConfig,
    pub points: Vec<CellPoint>,
    pub punctured: u64,
    pub arrived: u64,
    pub dropped: u64,
    pub fallbacks: u64,
    pub warnings: Vec<String>,
}

/// Modulation, mapper and SNR scales fixed for one power point.
struct PowerPlan {
    orders: Vec<usize>,
    mappers: Vec<Mapper>,
    maps: Vec<SimilarityMap>,
    /// `1/√γ̄` per eMBB user.
    embb_scale: Vec<f64>,
    urllc_scale: f64,
}

#[derive(Debug, Clone, Default)]
struct Counts {
    embb_err: Vec<u64>,
    embb_sym: Vec<u64>,
    urllc_err: u64,
    urllc_sym: u64,
    /// Blocks per user.
    blocks: Vec<u64>,
    /// Blocks meeting each target, `[user][target]` flattened.
    blocks_ok: Vec<u64>,
    packets: u64,
    packets_ok: Vec<u64>,
}

impl Counts {
    fn new(users: usize, targets: usize) -> Self {
        Counts {
            embb_err: vec![0; users],
            embb_sym: vec![0; users],
            blocks: vec![0; users],
            blocks_ok: vec![0; users * targets],
            packets_ok: vec![0; targets],
            ..Default::default()
        }
    }

    fn add(&mut self, o: &Counts) {
        let sum = |a: &mut Vec<u64>, b: &Vec<u64>| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        sum(&mut self.embb_err, &o.embb_err);
        sum(&mut self.embb_sym, &o.embb_sym);
        sum(&mut self.blocks_ok, &o.blocks_ok);
        sum(&mut self.packets_ok, &o.packets_ok);
        self.urllc_err += o.urllc_err;
        self.urllc_sym += o.urllc_sym;
        sum(&mut self.blocks, &o.blocks);
        self.packets += o.packets;
    }

    fn tally_block(&mut self, user: usize, errors: u64, symbols: u64, targets: &[f64]) {
        self.blocks[user] += 1;
        for (k, &t) in targets.iter().enumerate() {
            self.blocks_ok[user * targets.len() + k] += u64::from(errors as f64 <= t * symbols as f64);
        }
    }

    fn tally_packet(&mut self, errors: u64, symbols: u64, targets: &[f64]) {
        self.packets += 1;
        for (k, &t) in targets.iter().enumerate() {
            self.packets_ok[k] += u64::from(errors as f64 <= t * symbols as f64);
        }
    }
}

fn plan_power(cfg: &CellConfig, atlas: &SimilarityAtlas, model: &TrafficModel, power_dbm: f64) -> Result<PowerPlan> {
    let n = cfg.urllc_order;
    let grid = model.grid_symbols();
    let spp = model.arrivals.segments_per_packet(n)?;
    let mean = model.arrivals.mean_per_stti();
    let punctured = mean_capped_poisson(mean, model.packet_capacity()) * (spp * cfg.zeta) as f64;
    let search = match cfg.scheme {
        Scheme::Baseline => SearchModel::Baseline,
        Scheme::Proposed => SearchModel::Segmented {
            windows: cfg.windows,
            grid,
            segments_per_packet: spp,
            mean_packets: mean,
        },
    };
    let urllc_snr = SnrPoint::new(cfg.budget.mean_snr(power_dbm, cfg.urllc_distance))?;
    let mut plan = PowerPlan {
        orders: Vec::new(),
        mappers: Vec::new(),
        maps: Vec::new(),
        embb_scale: Vec::new(),
        urllc_scale: 1.0 / urllc_snr.linear().sqrt(),
    };
    for &d in &cfg.distances {
        let snr = SnrPoint::new(cfg.budget.mean_snr(power_dbm, d))?;
        let m = adapt_modulation(snr);
        let map = atlas.get(n, m)?.clone();
        let mapper = match (cfg.scheme, cfg.mapper) {
            (Scheme::Baseline, _) => Mapper::Urllc,
            (_, Some(mp)) => mp.effective(n, m),
            (_, None) => {
                let candidate = if map.enhanced_is_strict() {
                    Mapper::Esrm
                } else {
                    Mapper::Srm
                };
                let q = substitution_fraction(&map, candidate, cfg.zeta, &search, punctured, grid)?;
                select_mapper(&map, urllc_snr, cfg.urllc_target, q, Channel::Rayleigh)?.effective(n, m)
            }
        };
        plan.orders.push(m);
        plan.mappers.push(mapper);
        plan.maps.push(map);
        plan.embb_scale.push(1.0 / snr.linear().sqrt());
    }
    Ok(plan)
}

/// Per-user analytic inputs of a power point: share of the grid, load
/// profile with the punctured load split evenly, and mean SNR.
struct UserModel {
    share: f64,
    profile: LoadProfile,
    snr: SnrPoint,
}

fn user_models(cfg: &CellConfig, point: &CellPoint) -> Result<Vec<UserModel>> {
    let model = cfg.traffic()?;
    let grid = model.grid_symbols();
    let spp = model.arrivals.segments_per_packet(cfg.urllc_order)?;
    let mean = model.arrivals.mean_per_stti();
    let punctured = mean_capped_poisson(mean, model.packet_capacity()) * (spp * cfg.zeta) as f64;
    let search = match cfg.scheme {
        Scheme::Baseline => SearchModel::Baseline,
        Scheme::Proposed => SearchModel::Segmented {
            windows: cfg.windows,
            grid,
            segments_per_packet: spp,
            mean_packets: mean,
        },
    };
    let ranges = model.user_ranges();
    cfg.distances
        .iter()
        .enumerate()
        .map(|(u, &d)| {
            let share = ranges[u].len() as f64 / grid as f64;
            Ok(UserModel {
                share,
                profile: LoadProfile::single(
                    cfg.urllc_order,
                    point.orders[u],
                    ranges[u].len(),
                    punctured * share,
                    cfg.zeta,
                    search,
                )?,
                snr: SnrPoint::new(cfg.budget.mean_snr(point.power_dbm, d))?,
            })
        })
        .collect()
}

/// Analytic eMBB SER of a power point: each user's Rayleigh SER at its mean
/// SNR, averaged over users by resource share.
pub fn analytic_embb_ser(cfg: &CellConfig, point: &CellPoint) -> Result<f64> {
    let atlas = SimilarityAtlas::new(EpsilonPolicy::default())?;
    let mut total = 0.0;
    for (u, m) in user_models(cfg, point)?.iter().enumerate() {
        total += m.share * embb_ser(&m.profile, &atlas, m.snr, point.mappers[u], Channel::Rayleigh)?;
    }
    Ok(total)
}

/// Analytic URLLC SER: the substitution-degraded BPSK Rayleigh SER at the
/// URLLC user's mean SNR, averaged over the users being punctured.
pub fn analytic_urllc_ser(cfg: &CellConfig, point: &CellPoint) -> Result<f64> {
    let atlas = SimilarityAtlas::new(EpsilonPolicy::default())?;
    let snr = SnrPoint::new(cfg.budget.mean_snr(point.power_dbm, cfg.urllc_distance))?;
    let mut total = 0.0;
    for (u, m) in user_models(cfg, point)?.iter().enumerate() {
        let map = atlas.get(cfg.urllc_order, point.orders[u])?;
        let mapper = point.mappers[u].effective(cfg.urllc_order, point.orders[u]);
        let load = &m.profile.loads[0];
        let q = substitution_fraction(
            map,
            mapper,
            cfg.zeta,
            &m.profile.search,
            load.punctured,
            m.profile.embb_symbols(point.orders[u]) as usize,
        )?;
        total += m.share * urllc_ser(map, snr, mapper, q, Channel::Rayleigh)?;
    }
    Ok(total)
}

pub fn run_cell(cfg: &CellConfig) -> Result<CellReport> {
    cfg.validate()?;
    let model = cfg.traffic()?;
    let atlas = SimilarityAtlas::new(EpsilonPolicy::default())?;
    let plans: Vec<PowerPlan> = cfg
        .power_dbm
        .iter()
        .map(|&p| plan_power(cfg, &atlas, &model, p))
        .collect::<Result<_>>()?;
    let grid = model.grid_symbols();
    let users = cfg.distances.len();
    let ranges = model.user_ranges();
    let mut owner = vec![0usize; grid];
    for (u, r) in ranges.iter().enumerate() {
        owner[r.clone()].iter_mut().for_each(|o| *o = u);
    }
    let space = SearchSpace::spread(grid, cfg.zeta, cfg.windows.min(grid - cfg.zeta + 1))?;
    let packet_symbols = model.arrivals.packet_symbols(cfg.urllc_order)? as u64;
    let spp = model.arrivals.segments_per_packet(cfg.urllc_order)?;
    let targets = &cfg.targets;

    struct Unit {
        per_power: Vec<Counts>,
        punctured: u64,
        arrived: u64,
        dropped: u64,
        fallbacks: u64,
    }

    let units = run_units(cfg.coherence_windows, cfg.execution, |w| -> Result<Unit> {
        let state = ChannelState::draw(&cfg.budget, &cfg.distances, cfg.seed, w);
        let inv_gain: Vec<Complex64> = state.gains.iter().map(|h| 1.0 / h).collect();
        let mut per_power: Vec<Counts> = plans.iter().map(|_| Counts::new(users, targets.len())).collect();
        let mut window_err = vec![vec![0u64; users]; plans.len()];
        let (mut punctured, mut arrived, mut dropped, mut fallbacks) = (0, 0, 0, 0);

        for t in w * cfg.coherence as u64..(w + 1) * cfg.coherence as u64 {
            let noise: Vec<Complex64> = {
                let mut rng = stream(cfg.seed, Tag::Noise, &[t]);
                (0..grid)
                    .map(|p| complex_gaussian(&mut rng) * inv_gain[owner[p]])
                    .collect()
            };
            let mut link = stream(cfg.seed, Tag::UrllcLink, &[t]);
            let mut urllc_noise: Vec<Complex64> = Vec::new();

            for (pi, plan) in plans.iter().enumerate() {
                let slot = generate_slot(&model, &plan.orders, cfg.seed, t)?;
                let segs = &slot.segments;
                if pi == 0 {
                    arrived += slot.arrived as u64;
                    dropped += slot.dropped as u64;
                    let total = segs.len() * cfg.zeta;
                    urllc_noise = (0..total)
                        .map(|_| complex_gaussian(&mut link) / complex_gaussian(&mut link))
                        .collect();
                }
                let mut place_rng = stream(cfg.seed, Tag::Urllc, &[t, 1]);
                let (starts, fallback) =
                    place_segments(cfg.scheme, &space, grid, segs.len(), &mut place_rng, |z, i, p| {
                        let u = owner[p];
                        plan.maps[u].matches(plan.mappers[u].matching(), segs[z][i], slot.embb[p])
                    });
                if pi == 0 {
                    fallbacks += u64::from(fallback);
                    punctured += (segs.len() * cfg.zeta) as u64;
                }

                let mut tx: Vec<Complex64> = slot
                    .embb
                    .iter()
                    .zip(&owner)
                    .map(|(&e, &u)| plan.maps[u].embb_constellation().point(e))
                    .collect();
                let c = &mut per_power[pi];
                let mut packet_err = vec![0u64; segs.len() / spp.max(1)];
                for (z, (seg, &s)) in segs.iter().zip(&starts).enumerate() {
                    // Each symbol follows the mapper of the user owning it.
                    let mut actions = Vec::with_capacity(cfg.zeta);
                    for i in 0..cfg.zeta {
                        let u = owner[s + i];
                        actions.push(
                            mapper_actions(plan.mappers[u], &plan.maps[u], &seg[i..=i], &slot.embb[s + i..=s + i])[0],
                        );
                    }
                    for (i, a) in actions.into_iter().enumerate() {
                        let p = s + i;
                        let map = &plan.maps[owner[p]];
                        let x = match a {
                            Action::KeepEmbb => map.embb_constellation().point(slot.embb[p]),
                            Action::SendUrllc => map.urllc_constellation().point(seg[i]),
                        };
                        tx[p] = x;
                        let r = x + urllc_noise[z * cfg.zeta + i] * plan.urllc_scale;
                        let err = u64::from(map.urllc_constellation().detect(r) != seg[i]);
                        c.urllc_err += err;
                        packet_err[z / spp] += err;
                    }
                }
                c.urllc_sym += (segs.len() * cfg.zeta) as u64;
                for e in packet_err {
                    c.tally_packet(e, packet_symbols, targets);
                }

                for (u, r) in ranges.iter().enumerate() {
                    let ec = plan.maps[u].embb_constellation();
                    let sc = plan.embb_scale[u];
                    let errs: u64 = r
                        .clone()
                        .map(|p| u64::from(ec.detect(tx[p] + noise[p] * sc) != slot.embb[p]))
                        .sum();
                    c.embb_err[u] += errs;
                    c.embb_sym[u] += r.len() as u64;
                    match cfg.reliability_block {
                        ReliabilityBlock::Stti => c.tally_block(u, errs, r.len() as u64, targets),
                        ReliabilityBlock::Coherence => window_err[pi][u] += errs,
                    }
                }
            }
        }
        if cfg.reliability_block == ReliabilityBlock::Coherence {
            for (pi, errs) in window_err.iter().enumerate() {
                for (u, &e) in errs.iter().enumerate() {
                    let symbols = (ranges[u].len() * cfg.coherence) as u64;
                    per_power[pi].tally_block(u, e, symbols, targets);
                }
            }
        }
        Ok(Unit {
            per_power,
            punctured,
            arrived,
            dropped,
            fallbacks,
        })
    });

    let mut totals: Vec<Counts> = plans.iter().map(|_| Counts::new(users, targets.len())).collect();
    let (mut punctured, mut arrived, mut dropped, mut fallbacks) = (0, 0, 0, 0);
    for unit in units {
        let unit = unit?;
        for (t, c) in totals.iter_mut().zip(&unit.per_power) {
            t.add(c);
        }
        punctured += unit.punctured;
        arrived += unit.arrived;
        dropped += unit.dropped;
        fallbacks += unit.fallbacks;
    }

    let fraction = |ok: u64, all: u64| {
        if all == 0 {
            1.0
        } else {
            ok as f64 / all as f64
        }
    };
    let points = cfg
        .power_dbm
        .iter()
        .zip(plans)
        .zip(&totals)
        .map(|((&power_dbm, plan), c)| CellPoint {
            power_dbm,
            embb: Estimate::new(c.embb_err.iter().sum(), c.embb_sym.iter().sum()),
            per_user: c
                .embb_err
                .iter()
                .zip(&c.embb_sym)
                .map(|(&e, &s)| Estimate::new(e, s))
                .collect(),
            urllc: Estimate::new(c.urllc_err, c.urllc_sym),
            reliability: targets
                .iter()
                .enumerate()
                .map(|(k, &t)| {
                    let ok = (0..users).map(|u| c.blocks_ok[u * targets.len() + k]).sum();
                    (t, fraction(ok, c.blocks.iter().sum()))
                })
                .collect(),
            per_user_reliability: (0..users)
                .map(|u| {
                    (0..targets.len())
                        .map(|k| fraction(c.blocks_ok[u * targets.len() + k], c.blocks[u]))
                        .collect()
                })
                .collect(),
            urllc_reliability: targets
                .iter()
                .zip(&c.packets_ok)
                .map(|(&t, &ok)| (t, fraction(ok, c.packets)))
                .collect(),
            orders: plan.orders,
            mappers: plan.mappers,
        })
        .collect();
    let embb_symbols = totals.first().map_or(0, |c| c.embb_sym.iter().sum());
    Ok(CellReport {
        config: cfg.clone(),
        points,
        punctured,
        arrived,
        dropped,
        fallbacks,
        warnings: budget_warning("eMBB symbols per power point", embb_symbols, cfg.min_ser)
            .into_iter()
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CellConfig {
        CellConfig {
            power_dbm: vec![10.0, 30.0],
            coherence_windows: 6,
            ..CellConfig::default()
        }
    }

    #[test]
    fn deterministic_across_execution_modes() {
        let mut cfg = small();
        let a = run_cell(&cfg).unwrap();
        cfg.execution = Execution::Sequential;
        let b = run_cell(&cfg).unwrap();
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn higher_power_adapts_upward() {
        let r = run_cell(&small()).unwrap();
        let (lo, hi) = (&r.points[0], &r.points[1]);
        assert!(lo.orders.iter().zip(&hi.orders).all(|(a, b)| a <= b));
        assert!(hi.orders.iter().sum::<usize>() > lo.orders.iter().sum::<usize>());
    }

    #[test]
    fn coherence_blocks_count_windows() {
        let mut cfg = small();
        cfg.reliability_block = ReliabilityBlock::Coherence;
        cfg.targets = vec![1.0];
        let r = run_cell(&cfg).unwrap();
        assert_eq!(r.points[0].reliability, vec![(1.0, 1.0)]);
    }

    #[test]
    fn analytic_tracks_simulation() {
        let mut cfg = small();
        cfg.coherence_windows = 60;
        let r = run_cell(&cfg).unwrap();
        for p in &r.points {
            let a = analytic_embb_ser(&cfg, p).unwrap();
            assert!((p.embb.rate() - a).abs() / a < 0.15, "{} vs {a}", p.embb.rate());
        }
    }

    #[test]
    fn analytic_urllc_is_clean_under_urllc_mapper() {
        let cfg = CellConfig {
            mapper: Some(Mapper::Urllc),
            ..small()
        };
        let r = run_cell(&cfg).unwrap();
        let p = &r.points[0];
        let snr = SnrPoint::new(cfg.budget.mean_snr(p.power_dbm, cfg.urllc_distance)).unwrap();
        let clean = crate::constellation::channel_ser_rayleigh(2, snr).unwrap();
        assert!((analytic_urllc_ser(&cfg, p).unwrap() - clean).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_distances() {
        let mut cfg = small();
        cfg.distances = vec![10.0, -1.0];
        assert!(run_cell(&cfg).is_err());
    }
}
