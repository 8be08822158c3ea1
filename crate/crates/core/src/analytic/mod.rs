//! Closed-form eMBB and URLLC error, similarity and loss expressions.
//!
//! The eMBB SER of a modulation order `m` mixes three populations of
//! symbols: untouched symbols that only see the channel, punctured symbols
//! whose replacement lies in their own similarity region (non-effective), and
//! punctured symbols whose replacement does not (effective). The expected
//! split comes from the order statistics of the block search.

pub mod order_stats;

use serde::{Deserialize, Serialize};

use crate::constellation::{channel_ser, check_order, Channel, SnrPoint};
use crate::error::{Error, Result};
use crate::numeric::rayleigh_average;
use crate::scheduler::Mapper;
use crate::similarity::{Matching, SimilarityAtlas, SimilarityMap};

pub use order_stats::BinomialTable;

/// Expected best match count of a `ζ`-symbol URLLC block searched over the
/// `L_m − ζ` candidate blocks of an eMBB load of `L_m` symbols.
///
/// Every one of the `⌈l/ζ⌉` blocks sees the same candidate count, so the
/// block average equals the single-block value. Returns `ζη` when
/// `L_m ≤ ζ`.
pub fn expected_similarity(zeta: usize, l_nm: f64, l_m: usize, eta: f64) -> Result<f64> {
    check_block(zeta, l_m)?;
    if l_nm.is_nan() || l_nm < 0.0 {
        return Err(Error::InvalidProfile(format!("punctured load {l_nm} is negative")));
    }
    let table = BinomialTable::new(zeta, eta)?;
    if l_m <= zeta {
        return Ok(zeta as f64 * eta);
    }
    Ok(table.expected_max((l_m - zeta) as f64))
}

/// Expected best match count over `candidates` independent blocks.
pub fn similarity_with_candidates(zeta: usize, eta: f64, candidates: f64) -> Result<f64> {
    if zeta == 0 {
        return Err(Error::InvalidProfile("block size must be positive".into()));
    }
    Ok(BinomialTable::new(zeta, eta)?.expected_max(candidates))
}

fn check_block(zeta: usize, l_m: usize) -> Result<()> {
    if zeta == 0 {
        return Err(Error::InvalidProfile("block size must be positive".into()));
    }
    if zeta > l_m {
        return Err(Error::InvalidProfile(format!(
            "block size {zeta} exceeds eMBB load {l_m}"
        )));
    }
    Ok(())
}

/// Ordered search of `windows` evenly spaced windows over a grid, shared by
/// several URLLC segments.
///
/// Each segment owns `windows / Z` consecutive windows plus whatever its
/// predecessor left unused after its selection and the windows overlapping
/// it. The expected leftover uses the mean position of the first maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentedSearch {
    pub windows: usize,
    pub grid: usize,
    pub zeta: usize,
}

impl SegmentedSearch {
    fn blocked(&self) -> f64 {
        if self.windows <= 1 {
            return 0.0;
        }
        let step = (self.grid - self.zeta) as f64 / (self.windows - 1) as f64;
        ((self.zeta as f64 / step).ceil() - 1.0).max(0.0)
    }

    /// Mean best match count per segment when `segments` segments share the windows.
    pub fn similarity(&self, table: &BinomialTable, segments: usize) -> f64 {
        let segments = segments.max(1);
        let share = self.windows as f64 / segments as f64;
        let blocked = self.blocked();
        let mut carry = 0.0;
        let mut total = 0.0;
        for _ in 0..segments {
            let c = (share + carry).max(1.0);
            total += table.expected_max(c);
            let pos = table.expected_argmax(c.round() as usize);
            carry = (c - 1.0 - pos - blocked).max(0.0);
        }
        total / segments as f64
    }

    /// Segment-weighted mean over a Poisson number of packets per grid.
    pub fn poisson_similarity(&self, table: &BinomialTable, segments_per_packet: usize, mean_packets: f64) -> f64 {
        let spp = segments_per_packet.max(1);
        let capacity = (self.grid / (spp * self.zeta)).max(1);
        if mean_packets <= 0.0 {
            return self.similarity(table, spp);
        }
        let mut p = (-mean_packets).exp();
        let mut cumulative = p;
        let (mut num, mut den) = (0.0, 0.0);
        let mut n = 0usize;
        while cumulative < 1.0 - 1e-12 && n < 10_000 {
            n += 1;
            p *= mean_packets / n as f64;
            cumulative += p;
            let sent = n.min(capacity);
            let w = p * sent as f64;
            num += w * self.similarity(table, sent * spp);
            den += w;
        }
        num / den
    }
}

/// How the scheduler looks for the eMBB block to puncture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchModel {
    /// No search: the block is placed regardless of content.
    Baseline,
    /// `L_m − ζ` independent candidates per block.
    Lemma,
    /// A fixed number of independent candidates per block.
    Block { candidates: usize },
    /// Ordered search shared by all segments of a Poisson number of packets.
    Segmented {
        windows: usize,
        grid: usize,
        segments_per_packet: usize,
        mean_packets: f64,
    },
}

impl SearchModel {
    /// Expected best match count `U` for a block of `ζ` symbols.
    pub fn similarity(&self, zeta: usize, eta: f64, l_nm: f64, l_m: usize) -> Result<f64> {
        let table = BinomialTable::new(zeta, eta)?;
        Ok(match *self {
            SearchModel::Baseline => zeta as f64 * eta,
            SearchModel::Lemma => return expected_similarity(zeta, l_nm, l_m, eta),
            SearchModel::Block { candidates } => table.expected_max(candidates as f64),
            SearchModel::Segmented {
                windows,
                grid,
                segments_per_packet,
                mean_packets,
            } => {
                if grid < zeta || windows == 0 {
                    return Err(Error::InvalidProfile(format!(
                        "segmented search over {windows} windows of a {grid}-symbol grid"
                    )));
                }
                SegmentedSearch { windows, grid, zeta }.poisson_similarity(&table, segments_per_packet, mean_packets)
            }
        })
    }
}

/// Punctured symbols split by whether the replacement left their region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PuncturedSplit {
    pub effective: f64,
    pub non_effective: f64,
}

impl PuncturedSplit {
    /// Split of `l_nm` punctured symbols given the expected similarity `u` per block.
    pub fn from_similarity(u: f64, zeta: usize, l_nm: f64) -> Self {
        let effective = (1.0 - u / zeta as f64) * l_nm;
        PuncturedSplit {
            effective,
            non_effective: l_nm - effective,
        }
    }

    pub fn total(&self) -> f64 {
        self.effective + self.non_effective
    }
}

/// Expected effectively punctured symbols under the plain lemma.
pub fn effective_punctured(zeta: usize, l_nm: f64, l_m: usize, eta: f64) -> Result<PuncturedSplit> {
    let u = expected_similarity(zeta, l_nm, l_m, eta)?;
    Ok(PuncturedSplit::from_similarity(u, zeta, l_nm))
}

/// Averages `f(γ)` over the channel: identity for AWGN, exponential power
/// gain for Rayleigh.
fn channel_average<F: Fn(f64) -> f64>(snr: SnrPoint, channel: Channel, f: F) -> f64 {
    let gamma = snr.linear();
    match channel {
        Channel::Awgn => f(gamma),
        Channel::Rayleigh => rayleigh_average(|g| f(gamma * g)),
    }
}

fn awgn(gamma: f64) -> SnrPoint {
    SnrPoint::new(gamma).expect("channel-scaled SNR is non-negative")
}

/// Mean eMBB symbol error over the (URLLC, eMBB) pairs selected by `keep`,
/// when the URLLC point is transmitted in place of the eMBB symbol.
fn replaced_error<P: Fn(usize, usize) -> bool>(
    map: &SimilarityMap,
    snr: SnrPoint,
    channel: Channel,
    keep: P,
) -> Option<f64> {
    let urllc = map.urllc_constellation();
    let embb = map.embb_constellation();
    let pairs: Vec<(usize, usize)> = (0..urllc.order())
        .flat_map(|u| (0..embb.order()).map(move |e| (u, e)))
        .filter(|&(u, e)| keep(u, e))
        .collect();
    if pairs.is_empty() {
        return None;
    }
    let correct = channel_average(snr, channel, |g| {
        let s = awgn(g);
        pairs
            .iter()
            .map(|&(u, e)| embb.decision_probability(e, urllc.point(u), s, Channel::Awgn))
            .sum::<f64>()
    });
    Some(1.0 - correct / pairs.len() as f64)
}

/// Effective-puncture SER: exact pairwise sum and the loose closed-form bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveSer {
    pub exact: f64,
    pub bound: f64,
}

/// SER of eMBB symbols replaced by a URLLC symbol from another region.
pub fn ser_effective(map: &SimilarityMap, snr: SnrPoint, channel: Channel) -> Result<EffectiveSer> {
    let exact = ser_mismatched(map, Matching::Region, snr, channel);
    let n = map.urllc_order();
    let m = map.embb_order() as f64;
    let bound = 1.0 - channel_ser(n, snr, channel)? / (m - 1.0);
    Ok(EffectiveSer { exact, bound })
}

/// SER of eMBB symbols replaced by a URLLC symbol that does not match them
/// under `matching`. Zero when every pair matches.
pub fn ser_mismatched(map: &SimilarityMap, matching: Matching, snr: SnrPoint, channel: Channel) -> f64 {
    replaced_error(map, snr, channel, |u, e| !map.matches(matching, u, e)).unwrap_or(0.0)
}

/// SER of eMBB symbols replaced by a matching URLLC symbol.
pub fn ser_matched_replaced(map: &SimilarityMap, matching: Matching, snr: SnrPoint, channel: Channel) -> f64 {
    replaced_error(map, snr, channel, |u, e| map.matches(matching, u, e)).unwrap_or(0.0)
}

/// SER of non-effectively punctured eMBB symbols.
///
/// When the mapper keeps the eMBB symbol, or the constellations coincide,
/// this is the channel SER of `m`; otherwise the URLLC point is sent and the
/// pairwise decision probabilities are averaged over the matching pairs.
pub fn ser_non_effective(map: &SimilarityMap, snr: SnrPoint, mapper: Mapper, channel: Channel) -> Result<f64> {
    let (n, m) = (map.urllc_order(), map.embb_order());
    mapper.check(n, m)?;
    if n == m || mapper.substitutes() {
        return channel_ser(m, snr, channel);
    }
    Ok(ser_matched_replaced(map, mapper.matching(), snr, channel))
}

/// Share of the eMBB load carried by one modulation order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModShare {
    pub order: usize,
    pub share: f64,
}

/// Mean punctured symbols of order `embb` hit by URLLC order `urllc`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairLoad {
    pub urllc: usize,
    pub embb: usize,
    pub punctured: f64,
}

/// eMBB load composition, URLLC load and search configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadProfile {
    /// Symbols per scheduling unit, `L`.
    pub total: usize,
    pub shares: Vec<ModShare>,
    pub loads: Vec<PairLoad>,
    /// URLLC block size `ζ`.
    pub zeta: usize,
    pub search: SearchModel,
}

impl LoadProfile {
    pub fn new(
        total: usize,
        shares: Vec<ModShare>,
        loads: Vec<PairLoad>,
        zeta: usize,
        search: SearchModel,
    ) -> Result<Self> {
        let profile = LoadProfile {
            total,
            shares,
            loads,
            zeta,
            search,
        };
        profile.validate()?;
        Ok(profile)
    }

    /// One eMBB order carrying the whole load, punctured by one URLLC order.
    pub fn single(
        urllc: usize,
        embb: usize,
        total: usize,
        punctured: f64,
        zeta: usize,
        search: SearchModel,
    ) -> Result<Self> {
        Self::new(
            total,
            vec![ModShare {
                order: embb,
                share: 1.0,
            }],
            vec![PairLoad { urllc, embb, punctured }],
            zeta,
            search,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidProfile(msg));
        if self.total == 0 {
            return bad("total load must be positive".into());
        }
        if self.zeta == 0 {
            return bad("block size must be positive".into());
        }
        let mut sum = 0.0;
        for (i, s) in self.shares.iter().enumerate() {
            check_order(s.order)?;
            if !(0.0..=1.0).contains(&s.share) {
                return bad(format!("share {} of order {} out of range", s.share, s.order));
            }
            if self.shares[..i].iter().any(|t| t.order == s.order) {
                return bad(format!("order {} listed twice", s.order));
            }
            sum += s.share;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::PriorsNotNormalized(sum));
        }
        for (i, l) in self.loads.iter().enumerate() {
            check_order(l.urllc)?;
            check_order(l.embb)?;
            if l.punctured.is_nan() || l.punctured < 0.0 {
                return bad(format!("negative punctured load {}", l.punctured));
            }
            if self.loads[..i].iter().any(|o| o.urllc == l.urllc && o.embb == l.embb) {
                return bad(format!("pair ({}, {}) listed twice", l.urllc, l.embb));
            }
            if l.punctured > 0.0 && self.share(l.embb) == 0.0 {
                return bad(format!("order {} is punctured but carries no load", l.embb));
            }
        }
        for s in &self.shares {
            let l_m = self.embb_symbols(s.order);
            let punctured = self.punctured(s.order);
            if punctured > l_m + 1e-9 {
                return bad(format!(
                    "order {} has {punctured} punctured symbols but only {l_m} in total",
                    s.order
                ));
            }
            if punctured > 0.0 && (self.zeta as f64) > l_m {
                return bad(format!(
                    "block size {} exceeds load {l_m} of order {}",
                    self.zeta, s.order
                ));
            }
        }
        Ok(())
    }

    pub fn share(&self, order: usize) -> f64 {
        self.shares.iter().find(|s| s.order == order).map_or(0.0, |s| s.share)
    }

    /// `L_m = p_m · L`.
    pub fn embb_symbols(&self, order: usize) -> f64 {
        self.share(order) * self.total as f64
    }

    /// `Σ_n l_{n,m}`.
    pub fn punctured(&self, order: usize) -> f64 {
        self.loads.iter().filter(|l| l.embb == order).map(|l| l.punctured).sum()
    }

    /// Same profile with every punctured load scaled.
    pub fn with_punctured_scale(&self, factor: f64) -> Self {
        let mut p = self.clone();
        for l in &mut p.loads {
            l.punctured *= factor;
        }
        p
    }
}

/// Per-pair quantities entering the eMBB SER.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairTerms {
    pub urllc: usize,
    pub embb: usize,
    pub mapper: Mapper,
    /// Probability that a random pair matches under the mapper's rule.
    pub eta: f64,
    /// Expected matches per block after the search.
    pub similarity: f64,
    pub split: PuncturedSplit,
    pub ser_non_effective: f64,
    pub ser_effective: f64,
}

/// Evaluates the per-pair terms of a profile at one SNR.
pub fn pair_terms(
    profile: &LoadProfile,
    atlas: &SimilarityAtlas,
    snr: SnrPoint,
    mapper: Mapper,
    channel: Channel,
) -> Result<Vec<PairTerms>> {
    profile.validate()?;
    profile
        .loads
        .iter()
        .map(|load| {
            let map = atlas.get(load.urllc, load.embb)?;
            let used = mapper.effective(load.urllc, load.embb);
            let matching = used.matching();
            let eta = map.uniform_match_probability(matching);
            let l_m = profile.embb_symbols(load.embb);
            let similarity = profile
                .search
                .similarity(profile.zeta, eta, load.punctured, l_m.round() as usize)?;
            Ok(PairTerms {
                urllc: load.urllc,
                embb: load.embb,
                mapper: used,
                eta,
                similarity,
                split: PuncturedSplit::from_similarity(similarity, profile.zeta, load.punctured),
                ser_non_effective: ser_non_effective(map, snr, used, channel)?,
                ser_effective: ser_mismatched(map, matching, snr, channel),
            })
        })
        .collect()
}

/// eMBB SER under puncturing, averaged over the eMBB orders of the profile.
pub fn embb_ser(
    profile: &LoadProfile,
    atlas: &SimilarityAtlas,
    snr: SnrPoint,
    mapper: Mapper,
    channel: Channel,
) -> Result<f64> {
    let terms = pair_terms(profile, atlas, snr, mapper, channel)?;
    let mut total = 0.0;
    for s in profile.shares.iter().filter(|s| s.share > 0.0) {
        let l_m = profile.embb_symbols(s.order);
        let mut inner = channel_ser(s.order, snr, channel)? * (1.0 - profile.punctured(s.order) / l_m);
        for t in terms.iter().filter(|t| t.embb == s.order) {
            inner += (t.ser_non_effective * t.split.non_effective + t.ser_effective * t.split.effective) / l_m;
        }
        total += s.share * inner;
    }
    Ok(total)
}

/// High-SNR limit: punctured symbols that still decode wrongly without noise.
///
/// With a substituting mapper, or `n = m`, only effectively punctured
/// symbols remain, giving `Σ p_m ℒ/L_m`. Under the URLLC mapper with `n < m`
/// a URLLC point inside the eMBB symbol's region is usually decoded as a
/// different eMBB symbol and is counted too.
pub fn embb_ser_high_snr(profile: &LoadProfile, atlas: &SimilarityAtlas, mapper: Mapper) -> Result<f64> {
    let terms = pair_terms(profile, atlas, SnrPoint::INFINITE, mapper, Channel::Awgn)?;
    Ok(profile
        .shares
        .iter()
        .filter(|s| s.share > 0.0)
        .map(|s| {
            let l_m = profile.embb_symbols(s.order);
            s.share
                * terms
                    .iter()
                    .filter(|t| t.embb == s.order)
                    .map(|t| (t.ser_effective * t.split.effective + t.ser_non_effective * t.split.non_effective) / l_m)
                    .sum::<f64>()
        })
        .sum())
}

/// Effectively punctured fraction `Σ p_m ℒ/L_m`.
pub fn effective_fraction(profile: &LoadProfile, atlas: &SimilarityAtlas, mapper: Mapper) -> Result<f64> {
    let terms = pair_terms(profile, atlas, SnrPoint::INFINITE, mapper, Channel::Awgn)?;
    Ok(profile
        .shares
        .iter()
        .filter(|s| s.share > 0.0)
        .map(|s| {
            let l_m = profile.embb_symbols(s.order);
            s.share
                * terms
                    .iter()
                    .filter(|t| t.embb == s.order)
                    .map(|t| t.split.effective / l_m)
                    .sum::<f64>()
        })
        .sum())
}

/// High-similarity limit: effectively punctured symbols dropped.
pub fn embb_ser_high_similarity(
    profile: &LoadProfile,
    atlas: &SimilarityAtlas,
    snr: SnrPoint,
    mapper: Mapper,
    channel: Channel,
) -> Result<f64> {
    let terms = pair_terms(profile, atlas, snr, mapper, channel)?;
    let mut total = 0.0;
    for s in profile.shares.iter().filter(|s| s.share > 0.0) {
        let l_m = profile.embb_symbols(s.order);
        let mine = || terms.iter().filter(|t| t.embb == s.order);
        let kept: f64 = mine().map(|t| t.split.non_effective).sum();
        let mut inner = channel_ser(s.order, snr, channel)? * (1.0 - kept / l_m);
        inner += mine()
            .map(|t| t.ser_non_effective * t.split.non_effective / l_m)
            .sum::<f64>();
        total += s.share * inner;
    }
    Ok(total)
}

/// Expected fraction of the eMBB load lost to puncturing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossModel {
    /// Every punctured symbol is lost.
    Linear,
    /// Punctured symbols are lost only when decoded in error.
    Generalized,
}

pub fn embb_loss(
    profile: &LoadProfile,
    atlas: &SimilarityAtlas,
    snr: SnrPoint,
    mapper: Mapper,
    channel: Channel,
    model: LossModel,
) -> Result<f64> {
    profile.validate()?;
    let terms = match model {
        LossModel::Linear => Vec::new(),
        LossModel::Generalized => pair_terms(profile, atlas, snr, mapper, channel)?,
    };
    Ok(profile
        .shares
        .iter()
        .filter(|s| s.share > 0.0)
        .map(|s| {
            let l_m = profile.embb_symbols(s.order);
            let lost = match model {
                LossModel::Linear => profile.punctured(s.order),
                LossModel::Generalized => terms
                    .iter()
                    .filter(|t| t.embb == s.order)
                    .map(|t| t.ser_non_effective * t.split.non_effective + t.ser_effective * t.split.effective)
                    .sum(),
            };
            s.share * lost / l_m
        })
        .sum())
}

/// Fraction of URLLC symbols replaced by eMBB symbols: the expected matches
/// per block over the block size for a substituting mapper, zero otherwise.
pub fn substitution_fraction(
    map: &SimilarityMap,
    mapper: Mapper,
    zeta: usize,
    search: &SearchModel,
    l_nm: f64,
    l_m: usize,
) -> Result<f64> {
    let used = mapper.effective(map.urllc_order(), map.embb_order());
    if !used.substitutes() {
        return Ok(0.0);
    }
    let eta = map.uniform_match_probability(used.matching());
    Ok(search.similarity(zeta, eta, l_nm, l_m)? / zeta as f64)
}

/// Matching (low, high) index pairs for a substituting mapper.
fn substituted_pairs(map: &SimilarityMap, mapper: Mapper) -> Vec<(usize, usize)> {
    let matching = mapper.matching();
    (0..map.urllc_order())
        .flat_map(|u| (0..map.embb_order()).map(move |e| (u, e)))
        .filter(|&(u, e)| map.matches(matching, u, e))
        .collect()
}

/// URLLC SER when a fraction `substitution` of URLLC symbols is replaced by
/// matching eMBB symbols.
///
/// A replaced symbol sits at distance `d^{i,j}` from the URLLC decision
/// boundary instead of `d^i`, which scales the SNR by `(d^{i,j}/d^i)²`.
pub fn urllc_ser(
    map: &SimilarityMap,
    snr: SnrPoint,
    mapper: Mapper,
    substitution: f64,
    channel: Channel,
) -> Result<f64> {
    let (n, m) = (map.urllc_order(), map.embb_order());
    mapper.check(n, m)?;
    check_fraction(substitution)?;
    let clean = channel_ser(n, snr, channel)?;
    if !mapper.substitutes() || substitution == 0.0 {
        return Ok(clean);
    }
    let pairs = substituted_pairs(map, mapper);
    let mut degraded = 0.0;
    for &(u, e) in &pairs {
        let ratio = map.distances()[u][e] / map.self_distances()[u];
        degraded += channel_ser(n, snr.scaled(ratio * ratio), channel)?;
    }
    degraded /= pairs.len() as f64;
    Ok((1.0 - substitution) * clean + substitution * degraded)
}

/// Equivalent URLLC power loss in dB (positive means worse).
pub fn urllc_power_loss_db(map: &SimilarityMap, mapper: Mapper, substitution: f64) -> Result<f64> {
    let (n, m) = (map.urllc_order(), map.embb_order());
    mapper.check(n, m)?;
    check_fraction(substitution)?;
    if !mapper.substitutes() {
        return Ok(0.0);
    }
    let pairs = substituted_pairs(map, mapper);
    let mean: f64 = pairs
        .iter()
        .map(|&(u, e)| {
            let ratio = map.self_distances()[u] / map.distances()[u][e];
            (ratio * ratio).log10()
        })
        .sum::<f64>()
        / pairs.len() as f64;
    Ok(10.0 * substitution * mean)
}

fn check_fraction(value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidProbability {
            name: "substitution",
            value,
        })
    }
}

/// Fraction of blocks whose measured SER meets `target`.
pub fn reliability(block_ser: &[f64], target: f64) -> Result<f64> {
    if block_ser.is_empty() {
        return Err(Error::EmptySamples);
    }
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::InvalidProbability {
            name: "target",
            value: target,
        });
    }
    let ok = block_ser.iter().filter(|&&s| s <= target).count();
    Ok(ok as f64 / block_ser.len() as f64)
}
