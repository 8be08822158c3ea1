//! Analytic-versus-simulation checks at pinned seeds and budgets.

use puncture_core::analytic::{
    embb_loss, embb_ser, embb_ser_high_snr, expected_similarity, substitution_fraction, urllc_power_loss_db,
    LoadProfile, LossModel, SearchModel,
};
use puncture_core::constellation::channel_ser_rayleigh;
use puncture_core::similarity::{uniform_priors, Matching};
use puncture_core::simulator::{run_block_loss, run_pair, simulate_max_similarity, Execution, LossConfig, PairConfig};
use puncture_core::{Channel, EpsilonPolicy, Mapper, SimilarityAtlas, SimilarityMap, SnrPoint};

use crate::error::CliError;
use crate::output::{num, Table};

struct Check {
    name: &'static str,
    value: f64,
    expected: f64,
    tolerance: String,
    pass: bool,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn eta_identities() -> Result<Check, CliError> {
    let mut worst = 0.0f64;
    for (n, m, expect) in [(2, 2, 0.5), (2, 4, 0.5), (2, 16, 0.5), (2, 64, 0.5), (4, 4, 0.25)] {
        let eta = SimilarityMap::new(n, m)?.eta(&uniform_priors(n), &uniform_priors(m))?;
        worst = worst.max((eta - expect).abs());
    }
    Ok(Check {
        name: "eta_identities",
        value: worst,
        expected: 0.0,
        tolerance: "exact".into(),
        pass: worst == 0.0,
    })
}

fn expected_similarity_check(execution: Execution) -> Result<Check, CliError> {
    let map = SimilarityMap::new(2, 2)?;
    let u = expected_similarity(24, 0.0, 1200, 0.5)?;
    let (mean, _) = simulate_max_similarity(&map, Matching::Region, 24, 1176, 10_000, 2, execution)?;
    Ok(Check {
        name: "expected_similarity_zeta24_L1200",
        value: mean,
        expected: u,
        tolerance: "3% rel".into(),
        pass: rel(mean, u) < 0.03,
    })
}

fn embb_ser_check(execution: Execution) -> Result<Vec<Check>, CliError> {
    let atlas = SimilarityAtlas::new(EpsilonPolicy::default())?;
    let mut cfg = PairConfig::new(2, 16, Mapper::Esrm);
    cfg.snr_db = vec![10.0, 20.0, 30.0];
    cfg.sttis = 500;
    cfg.seed = 3;
    cfg.execution = execution;
    let profile = cfg.profile()?;
    let r = run_pair(&cfg)?;
    r.points
        .iter()
        .map(|p| {
            let a = embb_ser(
                &profile,
                &atlas,
                SnrPoint::from_db(p.snr_db)?,
                cfg.mapper,
                Channel::Rayleigh,
            )?;
            Ok(Check {
                name: "embb_ser_2-16_esrm",
                value: p.embb.rate(),
                expected: a,
                tolerance: "10% rel".into(),
                pass: rel(p.embb.rate(), a) < 0.10,
            })
        })
        .collect()
}

fn plateau_check(execution: Execution) -> Result<Check, CliError> {
    let atlas = SimilarityAtlas::new(EpsilonPolicy::default())?;
    let mut cfg = PairConfig::new(2, 4, Mapper::Urllc);
    cfg.snr_db = vec![45.0];
    cfg.sttis = 500;
    cfg.seed = 4;
    cfg.execution = execution;
    let limit = embb_ser_high_snr(&cfg.profile()?, &atlas, cfg.mapper)?;
    let sim = run_pair(&cfg)?.points[0].embb.rate();
    Ok(Check {
        name: "high_snr_plateau_2-4_urllc",
        value: sim,
        expected: limit,
        tolerance: "10% rel".into(),
        pass: rel(sim, limit) < 0.10,
    })
}

fn urllc_preservation(execution: Execution) -> Result<Vec<Check>, CliError> {
    let mut cfg = PairConfig::new(2, 4, Mapper::Urllc);
    cfg.snr_db = vec![0.0, 10.0, 20.0];
    cfg.sttis = 2000;
    cfg.seed = 6;
    cfg.execution = execution;
    run_pair(&cfg)?
        .points
        .iter()
        .map(|p| {
            let clean = channel_ser_rayleigh(2, SnrPoint::from_db(p.snr_db)?)?;
            Ok(Check {
                name: "urllc_mapper_preserves_urllc",
                value: p.urllc.rate(),
                expected: clean,
                tolerance: "95% interval".into(),
                pass: p.urllc.contains(clean),
            })
        })
        .collect()
}

fn power_loss_check() -> Result<Check, CliError> {
    let map = SimilarityMap::new(2, 4)?;
    let cfg = PairConfig::new(2, 4, Mapper::Srm);
    let profile = cfg.profile()?;
    let q = substitution_fraction(&map, Mapper::Srm, 24, &profile.search, profile.loads[0].punctured, 2400)?;
    let w = urllc_power_loss_db(&map, Mapper::Srm, q)?;
    Ok(Check {
        name: "srm_2-4_power_loss_db",
        value: w,
        expected: 2.5,
        tolerance: "±0.3 dB".into(),
        pass: (w - 2.5).abs() <= 0.3,
    })
}

fn loss_checks(execution: Execution) -> Result<Vec<Check>, CliError> {
    let atlas = SimilarityAtlas::new(EpsilonPolicy::default())?;
    let rows = run_block_loss(&LossConfig {
        pairs: vec![(2, 2), (2, 16)],
        mappers: vec![Mapper::Esrm],
        k_grid: vec![1, 1200],
        trials: 20_000,
        seed: 5,
        execution,
        ..LossConfig::default()
    })?;
    let eta = SimilarityMap::new(2, 2)?.eta(&uniform_priors(2), &uniform_priors(2))?;
    let mut checks = Vec::new();
    for r in &rows {
        let loss = r.lost.rate();
        if r.embb_order == 2 && r.k == 1 {
            checks.push(Check {
                name: "k1_2-2_loss_vs_mismatch",
                value: loss,
                expected: 1.0 - eta,
                tolerance: "±0.02".into(),
                pass: (loss - (1.0 - eta)).abs() <= 0.02,
            });
        }
        if r.embb_order == 16 && r.k == 1200 {
            let profile = LoadProfile::single(2, 16, 2400, 24.0, 24, SearchModel::Block { candidates: 1200 })?;
            let snr = SnrPoint::from_db(40.0)?;
            // Per-grid loss rescaled to the punctured block.
            let a = embb_loss(
                &profile,
                &atlas,
                snr,
                Mapper::Esrm,
                Channel::Rayleigh,
                LossModel::Generalized,
            )? * (2400.0 / 24.0);
            checks.push(Check {
                name: "k1200_2-16_esrm_loss",
                value: loss,
                expected: a,
                tolerance: "±0.02".into(),
                pass: (loss - a).abs() <= 0.02,
            });
        }
    }
    Ok(checks)
}

fn determinism() -> Result<Check, CliError> {
    let mut cfg = PairConfig::new(2, 16, Mapper::Esrm);
    cfg.sttis = 50;
    let a = run_pair(&cfg)?;
    cfg.execution = Execution::Sequential;
    let b = run_pair(&cfg)?;
    let same = a.points == b.points;
    Ok(Check {
        name: "parallel_equals_sequential",
        value: f64::from(u8::from(same)),
        expected: 1.0,
        tolerance: "exact".into(),
        pass: same,
    })
}

/// Runs every check; failures are listed individually in the table.
pub fn run(execution: Execution) -> Result<(Table, usize), CliError> {
    let mut checks = vec![eta_identities()?, expected_similarity_check(execution)?];
    checks.extend(embb_ser_check(execution)?);
    checks.push(plateau_check(execution)?);
    checks.extend(urllc_preservation(execution)?);
    checks.push(power_loss_check()?);
    checks.extend(loss_checks(execution)?);
    checks.push(determinism()?);

    let mut t = Table::new(vec!["check", "status", "value", "expected", "tolerance"]);
    let mut failed = 0;
    for c in checks {
        failed += usize::from(!c.pass);
        t.push(vec![
            c.name.into(),
            if c.pass { "pass" } else { "fail" }.into(),
            num(c.value),
            num(c.expected),
            c.tolerance,
        ]);
    }
    Ok((t, failed))
}
