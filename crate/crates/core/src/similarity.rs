//! Similarity regions between a URLLC constellation of order `n` and an
//! eMBB constellation of order `m`.
//!
//! The lower-order constellation supplies one region-index-symbol per
//! region; every point of the higher-order constellation joins the region of
//! its nearest lower-order point. For `n = m` the constellations coincide and
//! each region holds one symbol of each service.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::constellation::{check_order, Channel, Constellation, SnrPoint, SUPPORTED_ORDERS};
use crate::error::{Error, Result};

/// Slack and operating point for classifying region members.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonPolicy {
    pub epsilon: f64,
    pub reference_snr: SnrPoint,
}

impl EpsilonPolicy {
    pub fn new(epsilon: f64, reference_snr: SnrPoint) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::InvalidProbability {
                name: "epsilon",
                value: epsilon,
            });
        }
        Ok(EpsilonPolicy { epsilon, reference_snr })
    }
}

impl Default for EpsilonPolicy {
    /// `ε = 1e-3` evaluated at a 10 dB URLLC operating point.
    fn default() -> Self {
        EpsilonPolicy {
            epsilon: 1e-3,
            reference_snr: SnrPoint::from_db(10.0).expect("finite"),
        }
    }
}

/// Relation between a region-index-symbol and one of its mapping-symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Similarity {
    Absolute,
    Strong,
    Weak,
}

/// Which pairs count as similar during the block search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Matching {
    /// Same similarity region.
    Region,
    /// Same enhanced similarity region.
    Enhanced,
}

/// One similarity region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    /// Region-index-symbol (index into the lower-order constellation).
    pub index_symbol: usize,
    /// Mapping-symbols (indices into the higher-order constellation).
    pub members: Vec<usize>,
    /// Members that pass the enhanced-region test, in ascending order.
    pub enhanced: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMap {
    n: usize,
    m: usize,
    low: Constellation,
    high: Constellation,
    policy: EpsilonPolicy,
    regions: Vec<Region>,
    region_of_high: Vec<usize>,
    classes: Vec<Similarity>,
    /// `distances[i][j]`: high symbol `j` to the decision boundary of low symbol `i`.
    distances: Vec<Vec<f64>>,
    self_distances: Vec<f64>,
    /// Row-major `n × m` lookup tables indexed by (URLLC symbol, eMBB symbol).
    same_region: Vec<bool>,
    same_enhanced: Vec<bool>,
}

impl SimilarityMap {
    /// Builds the map with the default [`EpsilonPolicy`].
    pub fn new(n: usize, m: usize) -> Result<Self> {
        Self::with_policy(n, m, EpsilonPolicy::default())
    }

    pub fn with_policy(n: usize, m: usize, policy: EpsilonPolicy) -> Result<Self> {
        check_order(n)?;
        check_order(m)?;
        let low = Constellation::new(n.min(m))?;
        let high = Constellation::new(n.max(m))?;

        let region_of_high: Vec<usize> = high.points().iter().map(|&p| low.detect_exhaustive(p)).collect();

        let distances: Vec<Vec<f64>> = (0..low.order())
            .map(|i| high.points().iter().map(|&p| low.boundary_distance(i, p)).collect())
            .collect();
        let self_distances = (0..low.order())
            .map(|i| low.boundary_distance(i, low.point(i)))
            .collect();

        let mut map = SimilarityMap {
            n,
            m,
            low,
            high,
            policy,
            regions: Vec::new(),
            region_of_high,
            classes: Vec::new(),
            distances,
            self_distances,
            same_region: Vec::new(),
            same_enhanced: Vec::new(),
        };

        map.classes = (0..map.high.order())
            .map(|j| map.classify_member(map.region_of_high[j], j, &policy))
            .collect();
        map.regions = (0..map.low.order())
            .map(|i| {
                let members: Vec<usize> = (0..map.high.order()).filter(|&j| map.region_of_high[j] == i).collect();
                let enhanced = members
                    .iter()
                    .copied()
                    .filter(|&j| map.classes[j] != Similarity::Weak)
                    .collect();
                Region {
                    index_symbol: i,
                    members,
                    enhanced,
                }
            })
            .collect();

        map.same_region = vec![false; n * m];
        map.same_enhanced = vec![false; n * m];
        for u in 0..n {
            for e in 0..m {
                let (low_sym, high_sym) = map.split(u, e);
                let same = map.region_of_high[high_sym] == low_sym;
                map.same_region[u * m + e] = same;
                map.same_enhanced[u * m + e] = same && map.classes[high_sym] != Similarity::Weak;
            }
        }
        Ok(map)
    }

    /// Splits a (URLLC, eMBB) symbol pair into (lower-order, higher-order) indices.
    #[inline]
    fn split(&self, urllc: usize, embb: usize) -> (usize, usize) {
        if self.urllc_is_low() {
            (urllc, embb)
        } else {
            (embb, urllc)
        }
    }

    pub fn urllc_order(&self) -> usize {
        self.n
    }

    pub fn embb_order(&self) -> usize {
        self.m
    }

    /// Whether the URLLC constellation supplies the region-index-symbols.
    pub fn urllc_is_low(&self) -> bool {
        self.n <= self.m
    }

    pub fn low(&self) -> &Constellation {
        &self.low
    }

    pub fn high(&self) -> &Constellation {
        &self.high
    }

    pub fn urllc_constellation(&self) -> &Constellation {
        if self.urllc_is_low() {
            &self.low
        } else {
            &self.high
        }
    }

    pub fn embb_constellation(&self) -> &Constellation {
        if self.urllc_is_low() {
            &self.high
        } else {
            &self.low
        }
    }

    pub fn policy(&self) -> &EpsilonPolicy {
        &self.policy
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    /// Region (lower-order symbol) containing higher-order symbol `j`.
    pub fn region_of(&self, high_symbol: usize) -> usize {
        self.region_of_high[high_symbol]
    }

    /// Classification of higher-order symbol `j` against its own region symbol.
    pub fn class_of(&self, high_symbol: usize) -> Similarity {
        self.classes[high_symbol]
    }

    pub fn distances(&self) -> &[Vec<f64>] {
        &self.distances
    }

    pub fn self_distances(&self) -> &[f64] {
        &self.self_distances
    }

    /// Distance from higher-order point `j` to the decision boundary of
    /// lower-order symbol `i`.
    pub fn boundary_distance(&self, i: usize, j: usize) -> Result<f64> {
        self.low.check_index(i)?;
        self.high.check_index(j)?;
        Ok(self.distances[i][j])
    }

    /// True when URLLC symbol `urllc` and eMBB symbol `embb` share a region.
    #[inline]
    pub fn same_region(&self, urllc: usize, embb: usize) -> bool {
        self.same_region[urllc * self.m + embb]
    }

    /// True when the pair shares an enhanced region.
    #[inline]
    pub fn same_enhanced(&self, urllc: usize, embb: usize) -> bool {
        self.same_enhanced[urllc * self.m + embb]
    }

    #[inline]
    pub fn matches(&self, matching: Matching, urllc: usize, embb: usize) -> bool {
        match matching {
            Matching::Region => self.same_region(urllc, embb),
            Matching::Enhanced => self.same_enhanced(urllc, embb),
        }
    }

    /// eMBB symbols matching URLLC symbol `urllc` under `matching`.
    pub fn matching_embb(&self, matching: Matching, urllc: usize) -> Vec<usize> {
        (0..self.m).filter(|&e| self.matches(matching, urllc, e)).collect()
    }

    /// True when some region's enhanced set is a strict subset of its members.
    pub fn enhanced_is_strict(&self) -> bool {
        self.regions.iter().any(|r| r.enhanced.len() < r.members.len())
    }

    fn classify_member(&self, region: usize, member: usize, policy: &EpsilonPolicy) -> Similarity {
        let snr = policy.reference_snr;
        let own = 1.0
            - self
                .low
                .decision_probability(region, self.low.point(region), snr, Channel::Awgn);
        let mapped = 1.0
            - self
                .low
                .decision_probability(region, self.high.point(member), snr, Channel::Awgn);
        let diff = own - mapped;
        if diff >= 0.0 {
            Similarity::Absolute
        } else if diff >= -policy.epsilon {
            Similarity::Strong
        } else {
            Similarity::Weak
        }
    }

    /// Classifies `mapping_symbol` against `region_symbol` under `policy`.
    pub fn classify_pair(
        &self,
        region_symbol: usize,
        mapping_symbol: usize,
        policy: &EpsilonPolicy,
    ) -> Result<Similarity> {
        self.low.check_index(region_symbol)?;
        self.high.check_index(mapping_symbol)?;
        if self.region_of_high[mapping_symbol] != region_symbol {
            return Err(Error::NotInRegion {
                region: region_symbol,
                mapping: mapping_symbol,
            });
        }
        Ok(self.classify_member(region_symbol, mapping_symbol, policy))
    }

    /// Probability that independently drawn URLLC and eMBB symbols share a region.
    pub fn eta(&self, urllc_priors: &[f64], embb_priors: &[f64]) -> Result<f64> {
        self.match_probability(Matching::Region, urllc_priors, embb_priors)
    }

    /// Probability that independently drawn symbols match under `matching`.
    pub fn match_probability(&self, matching: Matching, urllc_priors: &[f64], embb_priors: &[f64]) -> Result<f64> {
        check_priors(urllc_priors, self.n)?;
        check_priors(embb_priors, self.m)?;
        let mut eta = 0.0;
        for (u, pu) in urllc_priors.iter().enumerate() {
            for (e, pe) in embb_priors.iter().enumerate() {
                if self.matches(matching, u, e) {
                    eta += pu * pe;
                }
            }
        }
        Ok(eta)
    }

    /// Match probability under uniform symbol priors.
    pub fn uniform_match_probability(&self, matching: Matching) -> f64 {
        let table = match matching {
            Matching::Region => &self.same_region,
            Matching::Enhanced => &self.same_enhanced,
        };
        table.iter().filter(|&&b| b).count() as f64 / (self.n * self.m) as f64
    }

    /// Structured snapshot suitable for serialization.
    pub fn dump(&self) -> MapDump {
        let low_labels = self.low.labels();
        let high_labels = self.high.labels();
        MapDump {
            urllc_order: self.n,
            embb_order: self.m,
            region_index_service: if self.urllc_is_low() { "urllc" } else { "embb" }.into(),
            epsilon: self.policy.epsilon,
            reference_snr_db: self.policy.reference_snr.db(),
            regions: self
                .regions
                .iter()
                .map(|r| RegionDump {
                    index_symbol: low_labels[r.index_symbol].clone(),
                    members: r.members.iter().map(|&j| high_labels[j].clone()).collect(),
                    enhanced: r.enhanced.iter().map(|&j| high_labels[j].clone()).collect(),
                    classes: r.members.iter().map(|&j| self.classes[j]).collect(),
                })
                .collect(),
            distances: self.distances.clone(),
            self_distances: self.self_distances.clone(),
        }
    }
}

fn check_priors(priors: &[f64], order: usize) -> Result<()> {
    if priors.len() != order {
        return Err(Error::LengthMismatch {
            expected: order,
            actual: priors.len(),
        });
    }
    if let Some(&bad) = priors.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidProbability {
            name: "prior",
            value: bad,
        });
    }
    let total: f64 = priors.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::PriorsNotNormalized(total));
    }
    Ok(())
}

/// Uniform prior over `order` symbols.
pub fn uniform_priors(order: usize) -> Vec<f64> {
    vec![1.0 / order as f64; order]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionDump {
    pub index_symbol: String,
    pub members: Vec<String>,
    pub enhanced: Vec<String>,
    pub classes: Vec<Similarity>,
}

/// Serializable form of a [`SimilarityMap`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapDump {
    pub urllc_order: usize,
    pub embb_order: usize,
    pub region_index_service: String,
    pub epsilon: f64,
    pub reference_snr_db: f64,
    pub regions: Vec<RegionDump>,
    pub distances: Vec<Vec<f64>>,
    pub self_distances: Vec<f64>,
}

/// Every supported (URLLC, eMBB) map built with one policy.
#[derive(Debug, Clone)]
pub struct SimilarityAtlas {
    maps: BTreeMap<(usize, usize), SimilarityMap>,
}

impl SimilarityAtlas {
    pub fn new(policy: EpsilonPolicy) -> Result<Self> {
        let mut maps = BTreeMap::new();
        for &n in &SUPPORTED_ORDERS {
            for &m in &SUPPORTED_ORDERS {
                maps.insert((n, m), SimilarityMap::with_policy(n, m, policy)?);
            }
        }
        Ok(SimilarityAtlas { maps })
    }

    pub fn get(&self, n: usize, m: usize) -> Result<&SimilarityMap> {
        check_order(n)?;
        check_order(m)?;
        Ok(&self.maps[&(n, m)])
    }
}
