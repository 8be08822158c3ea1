//! Mapper selection, block search and ordered segmented search.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::urllc_ser;
use crate::constellation::{Channel, SnrPoint};
use crate::error::{Error, Result};
use crate::similarity::{Matching, SimilarityMap};

/// URLLC encoding rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mapper {
    /// Always transmit the URLLC symbol.
    Urllc,
    /// Keep the eMBB symbol when it shares the URLLC symbol's region.
    Srm,
    /// Keep the eMBB symbol when it lies in the enhanced region.
    Esrm,
}

impl Mapper {
    pub const ALL: [Mapper; 3] = [Mapper::Urllc, Mapper::Srm, Mapper::Esrm];

    pub fn as_str(self) -> &'static str {
        match self {
            Mapper::Urllc => "urllc",
            Mapper::Srm => "srm",
            Mapper::Esrm => "esrm",
        }
    }

    /// Whether matching eMBB symbols are transmitted in place of URLLC symbols.
    pub fn substitutes(self) -> bool {
        self != Mapper::Urllc
    }

    /// Pair relation the block search counts.
    pub fn matching(self) -> Matching {
        match self {
            Mapper::Esrm => Matching::Enhanced,
            _ => Matching::Region,
        }
    }

    /// Substituting mappers need a strictly lower URLLC order.
    pub fn check(self, n: usize, m: usize) -> Result<()> {
        if self.substitutes() && n >= m {
            return Err(Error::InvalidMapper {
                mapper: self.as_str(),
                n,
                m,
            });
        }
        Ok(())
    }

    /// The mapper actually usable for a pair: substitution falls back to the
    /// URLLC mapper unless `n < m`.
    pub fn effective(self, n: usize, m: usize) -> Mapper {
        if self.check(n, m).is_ok() {
            self
        } else {
            Mapper::Urllc
        }
    }
}

impl fmt::Display for Mapper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mapper {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "urllc" => Ok(Mapper::Urllc),
            "srm" => Ok(Mapper::Srm),
            "esrm" => Ok(Mapper::Esrm),
            other => Err(Error::InvalidConfig(format!("unknown mapper {other:?}"))),
        }
    }
}

/// What is sent at one punctured position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    SendUrllc,
    KeepEmbb,
}

/// Outcome of a block search plus the per-symbol mapping of the chosen block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PuncturingPlan {
    /// Index of the chosen candidate.
    pub selected: usize,
    /// Matches between the URLLC block and the chosen candidate.
    pub similarity: usize,
    pub mapper: Mapper,
    pub actions: Vec<Action>,
    /// Symbol comparisons performed by the search.
    pub comparisons: usize,
}

/// Per-symbol actions of `mapper` for a URLLC block over an eMBB block.
pub fn mapper_actions(mapper: Mapper, map: &SimilarityMap, urllc: &[usize], embb: &[usize]) -> Vec<Action> {
    urllc
        .iter()
        .zip(embb)
        .map(|(&u, &e)| {
            if mapper.substitutes() && map.matches(mapper.matching(), u, e) {
                Action::KeepEmbb
            } else {
                Action::SendUrllc
            }
        })
        .collect()
}

/// Index and count of the best window, lowest index on ties.
///
/// `is_match(t, window)` tells whether URLLC position `t` matches the eMBB
/// symbol under window `window` at the same offset.
#[inline]
pub fn best_window<F>(zeta: usize, windows: Range<usize>, is_match: F) -> Option<(usize, usize)>
where
    F: Fn(usize, usize) -> bool,
{
    let mut best: Option<(usize, usize)> = None;
    for k in windows {
        let mut c = 0;
        for t in 0..zeta {
            c += usize::from(is_match(t, k));
        }
        if best.is_none_or(|(_, b)| c > b) {
            best = Some((k, c));
        }
    }
    best
}

/// Counts region matches of the URLLC block against every candidate and
/// selects the best one.
pub fn similarity_search(
    urllc: &[usize],
    candidates: &[&[usize]],
    map: &SimilarityMap,
    mapper: Mapper,
) -> Result<PuncturingPlan> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    check_symbols(urllc, map.urllc_order())?;
    for c in candidates {
        if c.len() != urllc.len() {
            return Err(Error::LengthMismatch {
                expected: urllc.len(),
                actual: c.len(),
            });
        }
        check_symbols(c, map.embb_order())?;
    }
    let mapper = mapper.effective(map.urllc_order(), map.embb_order());
    let matching = mapper.matching();
    let zeta = urllc.len();
    let (selected, similarity) = best_window(zeta, 0..candidates.len(), |t, k| {
        map.matches(matching, urllc[t], candidates[k][t])
    })
    .expect("non-empty candidates");
    Ok(PuncturingPlan {
        selected,
        similarity,
        mapper,
        actions: mapper_actions(mapper, map, urllc, candidates[selected]),
        comparisons: candidates.len() * zeta,
    })
}

fn check_symbols(block: &[usize], order: usize) -> Result<()> {
    match block.iter().find(|&&s| s >= order) {
        Some(&index) => Err(Error::IndexOutOfRange { index, order }),
        None => Ok(()),
    }
}

/// Candidate window start positions over a symbol grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpace {
    starts: Vec<usize>,
    zeta: usize,
}

impl SearchSpace {
    /// `k` windows spread evenly from the start to the end of the grid.
    pub fn spread(grid: usize, zeta: usize, k: usize) -> Result<Self> {
        Self::check(grid, zeta, k)?;
        let last = (grid - zeta) as f64;
        let starts = if k == 1 {
            vec![0]
        } else {
            (0..k)
                .map(|i| (i as f64 * last / (k - 1) as f64).round() as usize)
                .collect()
        };
        Ok(SearchSpace { starts, zeta })
    }

    /// Up to `k` windows every `step` symbols from the start of the grid.
    pub fn with_step(grid: usize, zeta: usize, step: usize, k: usize) -> Result<Self> {
        Self::check(grid, zeta, k)?;
        if step == 0 {
            return Err(Error::InvalidConfig("window step must be positive".into()));
        }
        let starts: Vec<usize> = (0..=grid - zeta).step_by(step).take(k).collect();
        Ok(SearchSpace { starts, zeta })
    }

    fn check(grid: usize, zeta: usize, k: usize) -> Result<()> {
        if k == 0 {
            return Err(Error::EmptyCandidates);
        }
        if zeta == 0 || zeta > grid {
            return Err(Error::InvalidConfig(format!(
                "block size {zeta} does not fit a grid of {grid} symbols"
            )));
        }
        Ok(())
    }

    pub fn starts(&self) -> &[usize] {
        &self.starts
    }

    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    pub fn zeta(&self) -> usize {
        self.zeta
    }

    /// Ordered, equal (to within one) subsets of window indices.
    pub fn partition(&self, segments: usize) -> Vec<Range<usize>> {
        let k = self.len();
        let z = segments.max(1);
        (0..z).map(|i| (i * k / z)..((i + 1) * k / z)).collect()
    }
}

/// One selection of the segmented search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    /// Index into [`SearchSpace::starts`].
    pub window: usize,
    /// First grid symbol covered.
    pub start: usize,
    pub similarity: usize,
    pub comparisons: usize,
}

/// Ordered search of `segments` URLLC segments over a shared search space.
///
/// Segment `z` searches subset `z` together with the part of earlier subsets
/// after the previous selection; windows overlapping the previous selection
/// are skipped, so selections are strictly increasing and disjoint.
/// `is_match(z, t, start)` compares position `t` of segment `z` with the grid
/// symbol at `start + t`.
pub fn segmented_search<F>(space: &SearchSpace, segments: usize, is_match: F) -> Result<Vec<Selection>>
where
    F: Fn(usize, usize, usize) -> bool,
{
    if segments == 0 {
        return Ok(Vec::new());
    }
    let zeta = space.zeta;
    let starts = &space.starts;
    let subsets = space.partition(segments);
    let mut out = Vec::with_capacity(segments);
    let mut from = 0;
    let mut free_from = 0;
    for (z, subset) in subsets.iter().enumerate() {
        let mut first = from;
        while first < subset.end && starts[first] < free_from {
            first += 1;
        }
        let (window, similarity) = best_window(zeta, first..subset.end, |t, k| is_match(z, t, starts[k] + t))
            .ok_or(Error::InfeasibleOrdering { segment: z })?;
        out.push(Selection {
            window,
            start: starts[window],
            similarity,
            comparisons: (subset.end - first) * zeta,
        });
        from = window + 1;
        free_from = starts[window] + zeta;
    }
    Ok(out)
}

/// Chooses the mapper for a URLLC transmission with target SER `target`.
///
/// Substitution is allowed only when `n < m` and the predicted URLLC SER with
/// substitution stays within the target; ESRM is preferred whenever its
/// enhanced set is strictly smaller than the regions.
pub fn select_mapper(
    map: &SimilarityMap,
    snr: SnrPoint,
    target: f64,
    substitution: f64,
    channel: Channel,
) -> Result<Mapper> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::InvalidProbability {
            name: "target",
            value: target,
        });
    }
    if map.urllc_order() >= map.embb_order() {
        return Ok(Mapper::Urllc);
    }
    let candidate = if map.enhanced_is_strict() {
        Mapper::Esrm
    } else {
        Mapper::Srm
    };
    let predicted = urllc_ser(map, snr, candidate, substitution, channel)?;
    Ok(if predicted <= target { candidate } else { Mapper::Urllc })
}

/// Transmitted constellation points for a planned block.
pub fn apply_plan(
    plan: &PuncturingPlan,
    urllc: &[usize],
    embb: &[usize],
    map: &SimilarityMap,
) -> Result<Vec<Complex64>> {
    for len in [embb.len(), plan.actions.len()] {
        if len != urllc.len() {
            return Err(Error::LengthMismatch {
                expected: urllc.len(),
                actual: len,
            });
        }
    }
    check_symbols(urllc, map.urllc_order())?;
    check_symbols(embb, map.embb_order())?;
    let uc = map.urllc_constellation();
    let ec = map.embb_constellation();
    Ok(plan
        .actions
        .iter()
        .zip(urllc.iter().zip(embb))
        .map(|(a, (&u, &e))| match a {
            Action::SendUrllc => uc.point(u),
            Action::KeepEmbb => ec.point(e),
        })
        .collect())
}
