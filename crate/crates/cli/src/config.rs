//! Experiment configuration: a flat TOML file overlaid by flags and
//! `PUNCTURE_*` environment variables.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use puncture_core::constellation::check_order;
use puncture_core::simulator::{Execution, Scheme};
use puncture_core::Mapper;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// A URLLC/eMBB modulation order pair written `n-m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Pair {
    pub urllc: usize,
    pub embb: usize,
}

impl FromStr for Pair {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Config(format!("pair {s:?} is not of the form n-m"));
        let (n, m) = s.trim().split_once('-').ok_or_else(bad)?;
        Ok(Pair {
            urllc: n.trim().parse().map_err(|_| bad())?,
            embb: m.trim().parse().map_err(|_| bad())?,
        })
    }
}

impl TryFrom<String> for Pair {
    type Error = CliError;
    fn try_from(s: String) -> Result<Self, CliError> {
        s.parse()
    }
}

impl From<Pair> for String {
    fn from(p: Pair) -> String {
        p.to_string()
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.urllc, self.embb)
    }
}

/// A fixed mapper, or per-user selection from the URLLC target (cell only).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MapperPolicy {
    Fixed(Mapper),
    Adaptive,
}

impl MapperPolicy {
    pub fn fixed(self) -> Result<Mapper, CliError> {
        match self {
            MapperPolicy::Fixed(m) => Ok(m),
            MapperPolicy::Adaptive => Err(CliError::Config("mapper \"adaptive\" applies to cell mode only".into())),
        }
    }

    pub fn cell(self) -> Option<Mapper> {
        match self {
            MapperPolicy::Fixed(m) => Some(m),
            MapperPolicy::Adaptive => None,
        }
    }
}

impl FromStr for MapperPolicy {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        if s.trim().eq_ignore_ascii_case("adaptive") {
            return Ok(MapperPolicy::Adaptive);
        }
        Ok(MapperPolicy::Fixed(s.trim().parse()?))
    }
}

impl TryFrom<String> for MapperPolicy {
    type Error = CliError;
    fn try_from(s: String) -> Result<Self, CliError> {
        s.parse()
    }
}

impl From<MapperPolicy> for String {
    fn from(p: MapperPolicy) -> String {
        p.to_string()
    }
}

impl fmt::Display for MapperPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapperPolicy::Fixed(m) => f.write_str(m.as_str()),
            MapperPolicy::Adaptive => f.write_str("adaptive"),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// One user, one modulation pair, SNR axis in dB.
    #[default]
    Pair,
    /// Multi-user cell with adaptive modulation, power axis in dBm.
    Cell,
}

impl FromStr for Mode {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pair" => Ok(Mode::Pair),
            "cell" => Ok(Mode::Cell),
            other => Err(CliError::Config(format!("unknown mode {other:?}"))),
        }
    }
}

/// Everything a subcommand needs. Keys of the config file match the field
/// names; every key is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub mode: Mode,
    pub scheme: Scheme,
    /// Also run the baseline next to the proposed scheme in sweeps.
    pub compare_baseline: bool,
    pub mapper: Vec<MapperPolicy>,
    pub pairs: Vec<Pair>,
    pub lambda: Vec<f64>,
    pub zeta: Vec<usize>,
    /// Search windows `K` for sweeps.
    pub windows: usize,
    /// `K` values for `loss-vs-k` and `bench`.
    pub k_grid: Vec<usize>,
    /// SNR in dB (pair mode) or transmit power in dBm (cell mode).
    pub power_grid: Option<Vec<f64>>,
    /// Trial budget; its unit depends on the subcommand.
    pub trials: Option<u64>,
    pub targets: Vec<f64>,
    pub urllc_target: f64,
    pub loss_snr_db: f64,
    pub execution: Execution,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: None,
            mode: Mode::Pair,
            scheme: Scheme::Proposed,
            compare_baseline: true,
            mapper: vec![MapperPolicy::Fixed(Mapper::Urllc), MapperPolicy::Fixed(Mapper::Esrm)],
            pairs: vec![Pair { urllc: 2, embb: 4 }],
            lambda: vec![7.0],
            zeta: vec![24],
            windows: 1200,
            k_grid: vec![1, 75, 150, 300, 600, 1200],
            power_grid: None,
            trials: None,
            targets: vec![1e-3, 1e-2, 1e-1],
            urllc_target: 1e-2,
            loss_snr_db: 40.0,
            execution: Execution::Parallel,
            out: None,
        }
    }
}

/// Values given on the command line or through the environment.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub mode: Option<Mode>,
    pub scheme: Option<Scheme>,
    pub mapper: Option<Vec<MapperPolicy>>,
    pub pairs: Option<Vec<Pair>>,
    pub lambda: Option<Vec<f64>>,
    pub zeta: Option<Vec<usize>>,
    pub windows: Option<usize>,
    pub k_grid: Option<Vec<usize>>,
    pub power_grid: Option<Vec<f64>>,
    pub trials: Option<u64>,
    pub targets: Option<Vec<f64>>,
    pub execution: Option<Execution>,
    pub out: Option<PathBuf>,
}

/// Per-subcommand defaults for the budget and the power axis.
pub struct CommandDefaults {
    pub trials: u64,
    pub power_grid: Vec<f64>,
    pub needs_seed: bool,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: Overrides) {
        macro_rules! take {
            ($($f:ident),*) => {$(if let Some(v) = o.$f { self.$f = v; })*};
        }
        take!(mode, scheme, mapper, pairs, lambda, zeta, windows, k_grid, targets, execution);
        if o.seed.is_some() {
            self.seed = o.seed;
        }
        if o.power_grid.is_some() {
            self.power_grid = o.power_grid;
        }
        if o.trials.is_some() {
            self.trials = o.trials;
        }
        if o.out.is_some() {
            self.out = o.out;
        }
    }

    /// Fills the per-subcommand defaults and checks the result.
    pub fn resolve(mut self, defaults: CommandDefaults) -> Result<Self, CliError> {
        self.trials.get_or_insert(defaults.trials);
        self.power_grid.get_or_insert(defaults.power_grid);
        if defaults.needs_seed && self.seed.is_none() {
            return Err(CliError::Config(
                "a seed is required (--seed, PUNCTURE_SEED or `seed` in the config)".into(),
            ));
        }
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: &str| Err(CliError::Config(msg.into()));
        if self.mapper.is_empty() || self.pairs.is_empty() || self.lambda.is_empty() || self.zeta.is_empty() {
            return bad("mapper, pairs, lambda and zeta need at least one value");
        }
        if self.k_grid.is_empty() || self.k_grid.contains(&0) || self.windows == 0 {
            return bad("K values must be positive and the K grid non-empty");
        }
        if self
            .power_grid
            .as_ref()
            .is_some_and(|g| g.is_empty() || g.iter().any(|x| !x.is_finite()))
        {
            return bad("power grid must be non-empty and finite");
        }
        if self.trials == Some(0) {
            return bad("trials must be positive");
        }
        if self.lambda.iter().any(|l| !(*l > 0.0 && l.is_finite())) || self.zeta.contains(&0) {
            return bad("lambda and zeta must be positive");
        }
        if self.targets.is_empty() || self.targets.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return bad("reliability targets must lie in [0, 1]");
        }
        for p in &self.pairs {
            check_order(p.urllc)?;
            check_order(p.embb)?;
            if p.urllc > p.embb {
                return Err(CliError::Config(format!(
                    "pair {p}: the URLLC order must not exceed the eMBB order"
                )));
            }
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or_default()
    }

    pub fn trials(&self) -> u64 {
        self.trials.unwrap_or(1)
    }

    pub fn power_grid(&self) -> &[f64] {
        self.power_grid.as_deref().unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> CommandDefaults {
        CommandDefaults {
            trials: 10,
            power_grid: vec![0.0],
            needs_seed: true,
        }
    }

    #[test]
    fn parses_flat_file() {
        let cfg: ExperimentConfig = toml::from_str(
            r#"
            seed = 4
            mode = "cell"
            mapper = ["esrm", "adaptive"]
            pairs = ["2-16"]
            lambda = [3.5, 7.0]
            power_grid = [0, 10]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(4));
        assert_eq!(cfg.mode, Mode::Cell);
        assert_eq!(
            cfg.mapper,
            vec![MapperPolicy::Fixed(Mapper::Esrm), MapperPolicy::Adaptive]
        );
        assert_eq!(cfg.pairs, vec![Pair { urllc: 2, embb: 16 }]);
        assert_eq!(cfg.power_grid, Some(vec![0.0, 10.0]));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<ExperimentConfig>("sead = 1").is_err());
    }

    #[test]
    fn overrides_win() {
        let mut cfg = ExperimentConfig {
            seed: Some(1),
            ..Default::default()
        };
        cfg.apply(Overrides {
            seed: Some(9),
            lambda: Some(vec![3.5]),
            ..Default::default()
        });
        assert_eq!(cfg.seed, Some(9));
        assert_eq!(cfg.lambda, vec![3.5]);
        assert_eq!(cfg.zeta, vec![24]);
    }

    #[test]
    fn seed_is_mandatory() {
        assert!(ExperimentConfig::default().resolve(defaults()).is_err());
    }

    #[test]
    fn rejects_unsupported_orders() {
        let cfg = ExperimentConfig {
            seed: Some(1),
            pairs: vec![Pair { urllc: 2, embb: 8 }],
            ..Default::default()
        };
        assert!(cfg.resolve(defaults()).is_err());
    }

    #[test]
    fn shipped_configs_resolve() {
        for text in [
            include_str!("../../../configs/loss-vs-k.toml"),
            include_str!("../../../configs/ser-pair.toml"),
            include_str!("../../../configs/ser-cell.toml"),
            include_str!("../../../configs/reliability.toml"),
            include_str!("../../../configs/urllc.toml"),
            include_str!("../../../configs/bench.toml"),
        ] {
            let cfg: ExperimentConfig = toml::from_str(text).unwrap();
            cfg.resolve(defaults()).unwrap();
        }
    }

    #[test]
    fn pair_round_trips() {
        let p: Pair = "2-64".parse().unwrap();
        assert_eq!(p.to_string(), "2-64");
        assert!("24".parse::<Pair>().is_err());
    }
}
