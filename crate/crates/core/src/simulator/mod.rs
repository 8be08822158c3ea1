//! Monte Carlo link simulation.
//!
//! Work is split into independent units (mini-slots, coherence windows or
//! trials) that draw from their own random streams and return integer
//! counts. Units run on the rayon pool with the `parallel` feature or in a
//! plain loop otherwise; the counts are summed in unit order, so both paths
//! give bit-identical reports.

pub mod bench;
pub mod cell;
pub mod channel;
pub mod link;
pub mod report;
pub mod rng;
pub mod traffic;

use serde::{Deserialize, Serialize};

pub use bench::{benchmark_search, BenchConfig, BenchReport, BenchRow};
pub use cell::{analytic_embb_ser, analytic_urllc_ser, run_cell, CellConfig, CellPoint, CellReport, ReliabilityBlock};
pub use channel::{adapt_modulation, ChannelState, LinkBudget};
pub use link::{
    run_block_loss, run_pair, simulate_max_similarity, LossConfig, LossRow, PairConfig, PairPoint, PairReport,
};
pub use report::{Estimate, RateSummary};
pub use traffic::{generate_slot, ArrivalProcess, Slot, TrafficModel};

/// How work units are evaluated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

impl std::str::FromStr for Execution {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "parallel" => Ok(Execution::Parallel),
            "sequential" => Ok(Execution::Sequential),
            other => Err(crate::Error::InvalidConfig(format!("unknown execution mode {other:?}"))),
        }
    }
}

/// Block placement strategy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Similarity search over `K` windows.
    #[default]
    Proposed,
    /// Content-blind placement spread evenly over the grid.
    Baseline,
}

impl std::str::FromStr for Scheme {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "proposed" => Ok(Scheme::Proposed),
            "baseline" => Ok(Scheme::Baseline),
            other => Err(crate::Error::InvalidConfig(format!("unknown scheme {other:?}"))),
        }
    }
}

/// Evaluates `f` on units `0..units`, returning results in unit order.
pub(crate) fn run_units<T, F>(units: u64, execution: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..units).into_par_iter().map(f).collect()
        }
        _ => (0..units).map(f).collect(),
    }
}
