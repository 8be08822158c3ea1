//! Experiment subcommands. Each builds a [`Table`] from core runs.

use puncture_core::analytic::{
    embb_loss, embb_ser, substitution_fraction, urllc_power_loss_db, urllc_ser, LoadProfile, LossModel, SearchModel,
};
use puncture_core::constellation::channel_ser_rayleigh;
use puncture_core::simulator::{
    analytic_embb_ser, analytic_urllc_ser, benchmark_search, run_block_loss, run_cell, run_pair, BenchConfig,
    CellConfig, CellReport, Estimate, LossConfig, PairConfig, PairReport, Scheme,
};
use puncture_core::{Channel, EpsilonPolicy, SimilarityAtlas, SnrPoint};

use crate::config::{ExperimentConfig, Mode};
use crate::error::CliError;
use crate::output::{num, Table};

const GRID: usize = 2400;

fn atlas() -> Result<SimilarityAtlas, CliError> {
    Ok(SimilarityAtlas::new(EpsilonPolicy::default())?)
}

fn schemes(cfg: &ExperimentConfig) -> Vec<Scheme> {
    if cfg.scheme == Scheme::Proposed && cfg.compare_baseline {
        vec![Scheme::Proposed, Scheme::Baseline]
    } else {
        vec![cfg.scheme]
    }
}

fn scheme_name(s: Scheme) -> &'static str {
    match s {
        Scheme::Proposed => "proposed",
        Scheme::Baseline => "baseline",
    }
}

fn ci(e: &Estimate) -> [String; 2] {
    let (lo, hi) = e.interval();
    [num(lo), num(hi)]
}

fn pair_config(cfg: &ExperimentConfig, pair: crate::config::Pair, mapper: puncture_core::Mapper) -> PairConfig {
    let mut p = PairConfig::new(pair.urllc, pair.embb, mapper);
    p.windows = cfg.windows;
    p.snr_db = cfg.power_grid().to_vec();
    p.sttis = cfg.trials();
    p.seed = cfg.seed();
    p.execution = cfg.execution;
    p
}

fn cell_config(cfg: &ExperimentConfig, mapper: Option<puncture_core::Mapper>, lambda: f64, zeta: usize) -> CellConfig {
    CellConfig {
        power_dbm: cfg.power_grid().to_vec(),
        mapper,
        urllc_target: cfg.urllc_target,
        windows: cfg.windows,
        lambda,
        zeta,
        coherence_windows: cfg.trials(),
        seed: cfg.seed(),
        targets: cfg.targets.clone(),
        execution: cfg.execution,
        ..CellConfig::default()
    }
}

/// SNR at which a decreasing curve first reaches `level`, by log-linear
/// interpolation.
fn crossing(x: &[f64], y: &[f64], level: f64) -> Option<f64> {
    (1..x.len()).find_map(|i| {
        let (a, b) = (y[i - 1], y[i]);
        if !(a >= level && b <= level && b > 0.0) {
            return None;
        }
        if a == b {
            return Some(x[i - 1]);
        }
        let f = (a.ln() - level.ln()) / (a.ln() - b.ln());
        Some(x[i - 1] + f * (x[i] - x[i - 1]))
    })
}

/// Horizontal distance in dB from each proposed point to the baseline curve
/// at the same error rate; infinite when the baseline never gets there.
fn gains(x: &[f64], proposed: &[f64], baseline: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(proposed)
        .map(|(&xi, &p)| {
            if p <= 0.0 {
                return f64::NAN;
            }
            crossing(x, baseline, p).map_or(f64::INFINITY, |xb| xb - xi)
        })
        .collect()
}

fn warn_pair(table: &mut Table, label: &str, r: &PairReport) {
    table.notes.extend(r.warnings.iter().map(|w| format!("{label}: {w}")));
    if r.fallbacks > 0 {
        table.notes.push(format!(
            "{label}: {} slots fell back to baseline placement",
            r.fallbacks
        ));
    }
}

fn warn_cell(table: &mut Table, label: &str, r: &CellReport) {
    table.notes.extend(r.warnings.iter().map(|w| format!("{label}: {w}")));
    if r.fallbacks > 0 {
        table.notes.push(format!(
            "{label}: {} slots fell back to baseline placement",
            r.fallbacks
        ));
    }
}

pub fn loss_vs_k(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let atlas = atlas()?;
    let mappers = cfg.mapper.iter().map(|m| m.fixed()).collect::<Result<Vec<_>, _>>()?;
    let snr = SnrPoint::from_db(cfg.loss_snr_db)?;
    let mut t = Table::new(vec![
        "k",
        "pair",
        "mapper",
        "zeta",
        "analytic_loss",
        "empirical_loss",
        "ci_lo",
        "ci_hi",
        "similarity",
    ]);
    for &zeta in &cfg.zeta {
        let rows = run_block_loss(&LossConfig {
            pairs: cfg.pairs.iter().map(|p| (p.urllc, p.embb)).collect(),
            mappers: mappers.clone(),
            k_grid: cfg.k_grid.clone(),
            zeta,
            grid: GRID,
            snr_db: cfg.loss_snr_db,
            trials: cfg.trials(),
            seed: cfg.seed(),
            execution: cfg.execution,
        })?;
        for r in rows {
            let mapper = r.mapper.effective(r.urllc_order, r.embb_order);
            let profile = LoadProfile::single(
                r.urllc_order,
                r.embb_order,
                GRID,
                zeta as f64,
                zeta,
                SearchModel::Block { candidates: r.k },
            )?;
            let analytic = embb_loss(&profile, &atlas, snr, mapper, Channel::Rayleigh, LossModel::Generalized)?
                * GRID as f64
                / zeta as f64;
            let [lo, hi] = ci(&r.lost);
            t.push(vec![
                r.k.to_string(),
                format!("{}-{}", r.urllc_order, r.embb_order),
                r.mapper.as_str().into(),
                zeta.to_string(),
                num(analytic),
                num(r.lost.rate()),
                lo,
                hi,
                num(r.similarity),
            ]);
        }
    }
    Ok(t)
}

pub fn ser_sweep(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let mut t = Table::new(vec![
        "mode",
        "pair",
        "mapper",
        "scheme",
        "lambda",
        "zeta",
        "power",
        "analytic_ser",
        "empirical_ser",
        "ci_lo",
        "ci_hi",
        "symbols",
        "gain_db",
    ]);
    let x = cfg.power_grid();
    match cfg.mode {
        Mode::Pair => {
            let atlas = atlas()?;
            for &pair in &cfg.pairs {
                for policy in &cfg.mapper {
                    let mapper = policy.fixed()?;
                    for &lambda in &cfg.lambda {
                        for &zeta in &cfg.zeta {
                            let mut curves = Vec::new();
                            for scheme in schemes(cfg) {
                                let mut p = pair_config(cfg, pair, mapper);
                                p.scheme = scheme;
                                p.lambda = lambda;
                                p.zeta = zeta;
                                let r = run_pair(&p)?;
                                warn_pair(
                                    &mut t,
                                    &format!("{pair} {mapper} {} λ={lambda} ζ={zeta}", scheme_name(scheme)),
                                    &r,
                                );
                                let profile = p.profile()?;
                                let analytic = r
                                    .points
                                    .iter()
                                    .map(|q| {
                                        embb_ser(
                                            &profile,
                                            &atlas,
                                            SnrPoint::from_db(q.snr_db)?,
                                            mapper,
                                            Channel::Rayleigh,
                                        )
                                    })
                                    .collect::<Result<Vec<_>, _>>()?;
                                let est: Vec<Estimate> = r.points.iter().map(|q| q.embb).collect();
                                curves.push((scheme, analytic, est));
                            }
                            emit_ser(
                                &mut t,
                                "pair",
                                &pair.to_string(),
                                mapper.as_str(),
                                lambda,
                                zeta,
                                x,
                                &curves,
                            );
                        }
                    }
                }
            }
        }
        Mode::Cell => {
            for policy in &cfg.mapper {
                for &lambda in &cfg.lambda {
                    for &zeta in &cfg.zeta {
                        let mut curves = Vec::new();
                        for scheme in schemes(cfg) {
                            let c = CellConfig {
                                scheme,
                                ..cell_config(cfg, policy.cell(), lambda, zeta)
                            };
                            let r = run_cell(&c)?;
                            warn_cell(
                                &mut t,
                                &format!("{policy} {} λ={lambda} ζ={zeta}", scheme_name(scheme)),
                                &r,
                            );
                            let analytic = r
                                .points
                                .iter()
                                .map(|p| analytic_embb_ser(&c, p))
                                .collect::<Result<Vec<_>, _>>()?;
                            let est: Vec<Estimate> = r.points.iter().map(|p| p.embb).collect();
                            curves.push((scheme, analytic, est));
                        }
                        emit_ser(&mut t, "cell", "cell", &policy.to_string(), lambda, zeta, x, &curves);
                    }
                }
            }
        }
    }
    Ok(t)
}

#[allow(clippy::too_many_arguments)]
fn emit_ser(
    t: &mut Table,
    mode: &str,
    pair: &str,
    mapper: &str,
    lambda: f64,
    zeta: usize,
    x: &[f64],
    curves: &[(Scheme, Vec<f64>, Vec<Estimate>)],
) {
    let rates = |i: usize| curves[i].2.iter().map(Estimate::rate).collect::<Vec<_>>();
    let gain = (curves.len() == 2).then(|| gains(x, &rates(0), &rates(1)));
    for (i, (scheme, analytic, est)) in curves.iter().enumerate() {
        for (j, e) in est.iter().enumerate() {
            let [lo, hi] = ci(e);
            let g = match (&gain, i) {
                (Some(g), 0) => num(g[j]),
                _ => String::new(),
            };
            t.push(vec![
                mode.into(),
                pair.into(),
                mapper.into(),
                scheme_name(*scheme).into(),
                num(lambda),
                zeta.to_string(),
                num(x[j]),
                num(analytic[j]),
                num(e.rate()),
                lo,
                hi,
                e.trials.to_string(),
                g,
            ]);
        }
    }
}

pub fn reliability(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let mut t = Table::new(vec![
        "mapper",
        "scheme",
        "lambda",
        "zeta",
        "power_dbm",
        "target",
        "user",
        "embb_order",
        "analytic_ser",
        "empirical_ser",
        "empirical_reliability",
    ]);
    if cfg.mode == Mode::Pair {
        t.notes
            .push("reliability is a cell experiment; mode = pair is ignored".into());
    }
    t.notes.push("analytic_ser is given for the all-users row only".into());
    for policy in &cfg.mapper {
        for &lambda in &cfg.lambda {
            for &zeta in &cfg.zeta {
                for scheme in schemes(cfg) {
                    let c = CellConfig {
                        scheme,
                        ..cell_config(cfg, policy.cell(), lambda, zeta)
                    };
                    let r = run_cell(&c)?;
                    warn_cell(
                        &mut t,
                        &format!("{policy} {} λ={lambda} ζ={zeta}", scheme_name(scheme)),
                        &r,
                    );
                    for p in &r.points {
                        let analytic = num(analytic_embb_ser(&c, p)?);
                        for (k, &(target, overall)) in p.reliability.iter().enumerate() {
                            let all =
                                std::iter::once(("all".to_string(), String::new(), analytic.clone(), p.embb, overall));
                            let each = (0..p.orders.len()).map(|u| {
                                (
                                    u.to_string(),
                                    p.orders[u].to_string(),
                                    String::new(),
                                    p.per_user[u],
                                    p.per_user_reliability[u][k],
                                )
                            });
                            for (user, order, a, ser, rel) in all.chain(each) {
                                t.push(vec![
                                    policy.to_string(),
                                    scheme_name(scheme).into(),
                                    num(lambda),
                                    zeta.to_string(),
                                    num(p.power_dbm),
                                    num(target),
                                    user,
                                    order,
                                    a,
                                    num(ser.rate()),
                                    num(rel),
                                ]);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(t)
}

pub fn urllc(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let mut t = Table::new(vec![
        "mode",
        "pair",
        "mapper",
        "scheme",
        "lambda",
        "zeta",
        "power",
        "analytic_ser",
        "empirical_ser",
        "ci_lo",
        "ci_hi",
        "clean_ser",
        "power_loss_db",
    ]);
    match cfg.mode {
        Mode::Pair => {
            let atlas = atlas()?;
            for &pair in &cfg.pairs {
                for policy in &cfg.mapper {
                    let mapper = policy.fixed()?;
                    let map = atlas.get(pair.urllc, pair.embb)?;
                    let used = mapper.effective(pair.urllc, pair.embb);
                    for &lambda in &cfg.lambda {
                        for &zeta in &cfg.zeta {
                            let mut p = pair_config(cfg, pair, mapper);
                            p.lambda = lambda;
                            p.zeta = zeta;
                            let r = run_pair(&p)?;
                            warn_pair(&mut t, &format!("{pair} {mapper} λ={lambda} ζ={zeta}"), &r);
                            let profile = p.profile()?;
                            let q = substitution_fraction(
                                map,
                                used,
                                zeta,
                                &profile.search,
                                profile.loads[0].punctured,
                                GRID,
                            )?;
                            let loss = urllc_power_loss_db(map, used, q)?;
                            for point in &r.points {
                                let snr = SnrPoint::from_db(point.snr_db)?;
                                let [lo, hi] = ci(&point.urllc);
                                t.push(vec![
                                    "pair".into(),
                                    pair.to_string(),
                                    mapper.as_str().into(),
                                    scheme_name(p.scheme).into(),
                                    num(lambda),
                                    zeta.to_string(),
                                    num(point.snr_db),
                                    num(urllc_ser(map, snr, used, q, Channel::Rayleigh)?),
                                    num(point.urllc.rate()),
                                    lo,
                                    hi,
                                    num(channel_ser_rayleigh(pair.urllc, snr)?),
                                    num(loss),
                                ]);
                            }
                        }
                    }
                }
            }
        }
        Mode::Cell => {
            for policy in &cfg.mapper {
                for &lambda in &cfg.lambda {
                    for &zeta in &cfg.zeta {
                        let c = CellConfig {
                            scheme: cfg.scheme,
                            ..cell_config(cfg, policy.cell(), lambda, zeta)
                        };
                        let r = run_cell(&c)?;
                        warn_cell(&mut t, &format!("{policy} λ={lambda} ζ={zeta}"), &r);
                        for p in &r.points {
                            let snr = SnrPoint::new(c.budget.mean_snr(p.power_dbm, c.urllc_distance))?;
                            let clean = channel_ser_rayleigh(c.urllc_order, snr)?;
                            let analytic = analytic_urllc_ser(&c, p)?;
                            let [lo, hi] = ci(&p.urllc);
                            t.push(vec![
                                "cell".into(),
                                "cell".into(),
                                policy.to_string(),
                                scheme_name(cfg.scheme).into(),
                                num(lambda),
                                zeta.to_string(),
                                num(p.power_dbm),
                                num(analytic),
                                num(p.urllc.rate()),
                                lo,
                                hi,
                                num(clean),
                                num(10.0 * (analytic / clean).log10().max(0.0)),
                            ]);
                        }
                        for p in &r.points {
                            for (target, rel) in &p.urllc_reliability {
                                t.notes.push(format!(
                                    "{policy} λ={lambda} ζ={zeta} {} dBm: URLLC packet reliability at {target} = {rel}",
                                    p.power_dbm
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(t)
}

pub fn bench(cfg: &ExperimentConfig) -> Result<Table, CliError> {
    let r = benchmark_search(&BenchConfig {
        k_grid: cfg.k_grid.clone(),
        zeta: cfg.zeta[0],
        repetitions: cfg.trials() as usize,
        seed: cfg.seed(),
        ..BenchConfig::default()
    })?;
    let mut t = Table::new(vec![
        "k",
        "median_us",
        "p99_us",
        "comparisons",
        "fit_slope",
        "fit_intercept",
        "r2",
    ]);
    for row in &r.rows {
        t.push(vec![
            row.k.to_string(),
            num(row.median_us),
            num(row.p99_us),
            row.comparisons.to_string(),
            num(r.slope_us),
            num(r.intercept_us),
            num(r.r2),
        ]);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gain_is_horizontal_gap() {
        let x = [0.0, 10.0, 20.0, 30.0];
        let prop = [1e-1, 1e-2, 1e-3, 1e-4];
        let base = [1e-1, 1e-1, 1e-2, 1e-2];
        let g = gains(&x, &prop, &base);
        assert_eq!(g[0], 0.0);
        assert!((g[1] - 10.0).abs() < 1e-9);
        assert!(g[2].is_infinite());
    }
}
