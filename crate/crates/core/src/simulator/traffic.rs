//! eMBB resource grid and URLLC arrivals.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::constellation::check_order;
use crate::error::{Error, Result};

use super::rng::{stream, Tag};

/// Mini-slot duration in milliseconds.
pub const STTI_MS: f64 = 0.143;
/// Downlink resource elements.
pub const RESOURCE_ELEMENTS: usize = 1200;
/// OFDM symbols per resource element in one mini-slot.
pub const SYMBOLS_PER_RE: usize = 2;
pub const PACKET_BITS: usize = 96;

/// Poisson URLLC packet arrivals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrivalProcess {
    /// Packets per millisecond.
    pub lambda: f64,
    pub packet_bits: usize,
    /// URLLC block (segment) size `ζ` in symbols.
    pub segment_symbols: usize,
    pub stti_ms: f64,
}

impl ArrivalProcess {
    pub fn new(lambda: f64, segment_symbols: usize) -> Result<Self> {
        let p = ArrivalProcess {
            lambda,
            packet_bits: PACKET_BITS,
            segment_symbols,
            stti_ms: STTI_MS,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "arrival rate {} must be non-negative",
                self.lambda
            )));
        }
        if self.segment_symbols == 0 || self.packet_bits == 0 || self.stti_ms.is_nan() || self.stti_ms <= 0.0 {
            return Err(Error::InvalidConfig(
                "segment size, packet size and sTTI must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Mean packets per mini-slot.
    pub fn mean_per_stti(&self) -> f64 {
        self.lambda * self.stti_ms
    }

    /// Symbols of one packet at URLLC order `order`.
    pub fn packet_symbols(&self, order: usize) -> Result<usize> {
        check_order(order)?;
        let bits = order.trailing_zeros() as usize;
        if !self.packet_bits.is_multiple_of(bits) {
            return Err(Error::InvalidConfig(format!(
                "{} packet bits do not fill whole symbols of order {order}",
                self.packet_bits
            )));
        }
        Ok(self.packet_bits / bits)
    }

    /// Segments per packet at URLLC order `order`; `ζ` must divide the packet.
    pub fn segments_per_packet(&self, order: usize) -> Result<usize> {
        let symbols = self.packet_symbols(order)?;
        if symbols % self.segment_symbols != 0 {
            return Err(Error::InvalidConfig(format!(
                "segment size {} does not divide the {symbols}-symbol packet",
                self.segment_symbols
            )));
        }
        Ok(symbols / self.segment_symbols)
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let mean = self.mean_per_stti();
        if mean == 0.0 {
            return 0;
        }
        Poisson::new(mean).expect("positive mean").sample(rng) as usize
    }
}

/// Equal contiguous split of `res` resource elements among `users`.
pub fn equal_allocation(res: usize, users: usize) -> Vec<usize> {
    (0..users).map(|u| (u + 1) * res / users - u * res / users).collect()
}

/// Grid layout and traffic of one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficModel {
    pub resource_elements: usize,
    pub symbols_per_re: usize,
    /// Resource elements per eMBB user, in grid order.
    pub allocation: Vec<usize>,
    pub arrivals: ArrivalProcess,
    pub urllc_order: usize,
}

impl TrafficModel {
    pub fn new(allocation: Vec<usize>, arrivals: ArrivalProcess, urllc_order: usize) -> Result<Self> {
        let model = TrafficModel {
            resource_elements: RESOURCE_ELEMENTS,
            symbols_per_re: SYMBOLS_PER_RE,
            allocation,
            arrivals,
            urllc_order,
        };
        model.validate()?;
        Ok(model)
    }

    /// A single user owning the whole grid.
    pub fn single_user(arrivals: ArrivalProcess, urllc_order: usize) -> Result<Self> {
        Self::new(vec![RESOURCE_ELEMENTS], arrivals, urllc_order)
    }

    pub fn validate(&self) -> Result<()> {
        self.arrivals.validate()?;
        check_order(self.urllc_order)?;
        let used: usize = self.allocation.iter().sum();
        if used > self.resource_elements {
            return Err(Error::InvalidConfig(format!(
                "allocation uses {used} resource elements, only {} exist",
                self.resource_elements
            )));
        }
        if used < self.resource_elements {
            return Err(Error::InvalidConfig(format!(
                "allocation leaves {} resource elements unassigned",
                self.resource_elements - used
            )));
        }
        self.arrivals.segments_per_packet(self.urllc_order)?;
        if self.segment_capacity() == 0 {
            return Err(Error::InvalidConfig("segment size exceeds the grid".into()));
        }
        Ok(())
    }

    pub fn grid_symbols(&self) -> usize {
        self.resource_elements * self.symbols_per_re
    }

    /// Grid offset range owned by each user.
    pub fn user_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.allocation
            .iter()
            .map(|&re| {
                let r = start..start + re * self.symbols_per_re;
                start = r.end;
                r
            })
            .collect()
    }

    /// Non-overlapping segments that fit in one grid.
    pub fn segment_capacity(&self) -> usize {
        self.grid_symbols() / self.arrivals.segment_symbols
    }

    /// Whole packets that fit in one grid.
    pub fn packet_capacity(&self) -> usize {
        let spp = self.arrivals.segments_per_packet(self.urllc_order).unwrap_or(1);
        self.segment_capacity() / spp
    }
}

/// eMBB symbols and URLLC segments transmitted in one mini-slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    /// Uniform eMBB symbol per grid position for the given per-user orders.
    pub embb: Vec<usize>,
    /// URLLC segments, `ζ` symbols each, in delivery order.
    pub segments: Vec<Vec<usize>>,
    /// Packets that arrived during the previous mini-slot.
    pub arrived: usize,
    /// Packets that did not fit in the grid.
    pub dropped: usize,
}

/// Draws the eMBB grid of mini-slot `stti` and the URLLC traffic that
/// arrived during the mini-slot before it.
pub fn generate_slot(model: &TrafficModel, orders: &[usize], seed: u64, stti: u64) -> Result<Slot> {
    model.validate()?;
    if orders.len() != model.allocation.len() {
        return Err(Error::LengthMismatch {
            expected: model.allocation.len(),
            actual: orders.len(),
        });
    }
    for &m in orders {
        check_order(m)?;
    }
    let mut embb = vec![0; model.grid_symbols()];
    let mut rng = stream(seed, Tag::Embb, &[stti]);
    for (range, &m) in model.user_ranges().into_iter().zip(orders) {
        for s in &mut embb[range] {
            *s = rng.random_range(0..m);
        }
    }

    let arrived = model.arrivals.sample(&mut stream(seed, Tag::Arrivals, &[stti]));
    let sent = arrived.min(model.packet_capacity());
    let spp = model.arrivals.segments_per_packet(model.urllc_order)?;
    let zeta = model.arrivals.segment_symbols;
    let mut rng = stream(seed, Tag::Urllc, &[stti]);
    let segments = (0..sent * spp)
        .map(|_| (0..zeta).map(|_| rng.random_range(0..model.urllc_order)).collect())
        .collect();
    Ok(Slot {
        embb,
        segments,
        arrived,
        dropped: arrived - sent,
    })
}
