//! Sweeps over scenario families, elastic share totals and seeds; CSV output,
//! per-point summaries and the qualitative verdict.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ExperimentError};
use crate::experiments::run::{run_prepared, RunOptions, RunReport, Scheme};
use crate::experiments::setup::{prepare, Family, Prepared};
use crate::radio::RadioConfig;

pub const CSV_HEADER: [&str; 10] = [
    "family",
    "elastic_share_total",
    "scheme",
    "seed",
    "p_outage",
    "utility",
    "converged_frac",
    "rounds_mean",
    "ci_low",
    "ci_high",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub families: Vec<Family>,
    /// Total excess share of the elastic slices, in station units.
    pub elastic_share_grid: Vec<f64>,
    pub seeds: Vec<u64>,
    pub epochs: usize,
    pub users_per_slice: usize,
    pub min_rate_mbps: f64,
    pub p_max: f64,
    /// Monte-Carlo draws per dimensioned share.
    pub dimension_draws: usize,
    pub radio: RadioConfig,
    pub run: RunOptions,
    /// Worker threads (`None`: rayon default).
    pub jobs: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self::desk_scale()
    }
}

impl SweepConfig {
    /// 7 sites (21 sectors), 40 users per slice, 300 epochs, 5 seeds.
    pub fn desk_scale() -> Self {
        SweepConfig {
            families: Family::ALL.to_vec(),
            elastic_share_grid: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0],
            seeds: (1..=5).collect(),
            epochs: 300,
            users_per_slice: 40,
            min_rate_mbps: 0.2,
            p_max: 0.01,
            dimension_draws: 100_000,
            radio: RadioConfig::default(),
            run: RunOptions::default(),
            jobs: None,
        }
    }

    /// 19 sites (57 sectors) with the user population scaled alike.
    pub fn full_scale() -> Self {
        SweepConfig {
            elastic_share_grid: vec![2.0, 5.0, 8.0, 11.0, 14.0, 17.0, 19.0],
            users_per_slice: 110,
            radio: RadioConfig {
                sites: 19,
                ..RadioConfig::default()
            },
            ..Self::desk_scale()
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Setup(m.into()));
        if self.elastic_share_grid.is_empty() {
            return bad("empty elastic share grid");
        }
        if self.elastic_share_grid.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return bad("elastic shares must be finite and nonnegative");
        }
        if self.seeds.is_empty() || self.families.is_empty() {
            return bad("no seeds or no families");
        }
        if self.epochs == 0 || self.users_per_slice == 0 {
            return bad("epochs and users_per_slice must be positive");
        }
        if !(self.min_rate_mbps > 0.0) {
            return bad("min_rate_mbps must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub family: Family,
    pub elastic_total: f64,
    pub seed: u64,
    pub result: Result<RunReport, String>,
}

/// Seed-pooled numbers for one (family, elastic total) point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSummary {
    pub family: Family,
    pub elastic_total: f64,
    pub runs: usize,
    pub failures: usize,
    /// Pooled `P(outage)` per scheme, indexed like [`Scheme::ALL`].
    pub p_outage: Vec<f64>,
    pub outages: Vec<usize>,
    /// Mean over seeds of the per-run utility.
    pub utility: Vec<f64>,
    /// `(outages_share + ½) / (outages_greet + ½)`.
    pub share_ratio: f64,
    pub reservation_gap: f64,
    pub reservation_gap_ci: (f64, f64),
    pub social_gap: f64,
    pub converged_frac: f64,
    pub coverage_outage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub family: Family,
    pub greet_outage_ok: bool,
    pub greet_outage: Vec<f64>,
    pub share_ratio_ok: bool,
    pub share_ratios: Vec<f64>,
    pub spearman: f64,
    pub reservation_gap_ok: bool,
    pub reservation_gaps: Vec<f64>,
    pub social_gap_ok: bool,
    pub social_gaps: Vec<f64>,
    pub failures: usize,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    /// Stations whose guarantees were scaled down, per (family, seed).
    pub scaled: Vec<(Family, u64, Vec<usize>)>,
    pub setup_failures: Vec<(Family, u64, String)>,
}

/// Mean and 95% normal-approximation interval.
pub fn mean_ci(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, m, m);
    }
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    let h = 1.96 * (var / n).sqrt();
    (m, m - h, m + h)
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation (ties get average ranks).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return f64::NAN;
    }
    cov / (vx * vy).sqrt()
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<Report, Error> {
    cfg.validate()?;
    match cfg.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| ExperimentError::Setup(e.to_string()))?
            .install(|| sweep_inner(cfg)),
        None => sweep_inner(cfg),
    }
}

fn sweep_inner(cfg: &SweepConfig) -> Result<Report, Error> {
    let pairs: Vec<(Family, u64)> = cfg
        .families
        .iter()
        .flat_map(|&f| cfg.seeds.iter().map(move |&s| (f, s)))
        .collect();
    let gamma = cfg.min_rate_mbps * 1e6;
    let prepared: Vec<Result<Prepared, String>> = pairs
        .par_iter()
        .map(|&(f, seed)| {
            prepare(
                f,
                f.slices(cfg.users_per_slice, gamma),
                &cfg.radio,
                cfg.epochs,
                cfg.p_max,
                cfg.dimension_draws,
                seed,
            )
            .map_err(|e| e.to_string())
        })
        .collect();
    let jobs: Vec<(usize, f64)> = (0..pairs.len())
        .flat_map(|i| cfg.elastic_share_grid.iter().map(move |&x| (i, x)))
        .collect();
    let results: Vec<SweepRow> = jobs
        .par_iter()
        .map(|&(i, x)| {
            let (family, seed) = pairs[i];
            let result = match &prepared[i] {
                Ok(p) => run_prepared(p, x, &cfg.run).map_err(|e| e.to_string()),
                Err(e) => Err(format!("setup: {e}")),
            };
            SweepRow {
                family,
                elastic_total: x,
                seed,
                result,
            }
        })
        .collect();
    // Deterministic order: family, grid, seed.
    let mut rows = Vec::with_capacity(results.len());
    for &f in &cfg.families {
        for &x in &cfg.elastic_share_grid {
            for &s in &cfg.seeds {
                let r = results
                    .iter()
                    .find(|r| r.family == f && r.elastic_total == x && r.seed == s)
                    .expect("every job yields a row");
                rows.push(r.clone());
            }
        }
    }
    let mut scaled = Vec::new();
    let mut setup_failures = Vec::new();
    for (&(f, s), p) in pairs.iter().zip(&prepared) {
        match p {
            Ok(p) if !p.scaled_stations.is_empty() => scaled.push((f, s, p.scaled_stations.clone())),
            Ok(_) => {}
            Err(e) => setup_failures.push((f, s, e.clone())),
        }
    }
    Ok(Report {
        config: cfg.clone(),
        rows,
        scaled,
        setup_failures,
    })
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl Report {
    pub fn point(&self, family: Family, elastic_total: f64) -> PointSummary {
        let rows: Vec<&SweepRow> = self
            .rows
            .iter()
            .filter(|r| r.family == family && r.elastic_total == elastic_total)
            .collect();
        let ok: Vec<&RunReport> = rows.iter().filter_map(|r| r.result.as_ref().ok()).collect();
        let k = Scheme::ALL.len();
        let mut outages = vec![0usize; k];
        let mut demand = vec![0usize; k];
        let mut utility = vec![0.0; k];
        for r in &ok {
            for (i, m) in r.schemes.iter().enumerate() {
                outages[i] += m.outages;
                demand[i] += m.demand;
                utility[i] += m.utility() / ok.len() as f64;
            }
        }
        let p_outage = (0..k)
            .map(|i| if demand[i] == 0 { 0.0 } else { outages[i] as f64 / demand[i] as f64 })
            .collect();
        let gaps: Vec<f64> = ok
            .iter()
            .map(|r| r.scheme(Scheme::Greet).utility() - r.scheme(Scheme::Reservation).utility())
            .collect();
        let (gap, lo, hi) = mean_ci(&gaps);
        let social: Vec<f64> = ok.iter().map(|r| r.social_gap()).collect();
        let n = ok.len().max(1) as f64;
        PointSummary {
            family,
            elastic_total,
            runs: ok.len(),
            failures: rows.len() - ok.len(),
            share_ratio: (outages[2] as f64 + 0.5) / (outages[0] as f64 + 0.5),
            p_outage,
            outages,
            utility,
            reservation_gap: gap,
            reservation_gap_ci: (lo, hi),
            social_gap: mean_ci(&social).0,
            converged_frac: ok.iter().map(|r| r.converged_frac()).sum::<f64>() / n,
            coverage_outage: ok
                .iter()
                .map(|r| r.coverage_outages as f64 / r.user_epochs.max(1) as f64)
                .sum::<f64>()
                / n,
        }
    }

    pub fn points(&self, family: Family) -> Vec<PointSummary> {
        self.config.elastic_share_grid.iter().map(|&x| self.point(family, x)).collect()
    }

    /// Qualitative checks on the baseline family (or the first family swept).
    pub fn verdict(&self) -> Verdict {
        let family = if self.config.families.contains(&Family::Baseline) {
            Family::Baseline
        } else {
            self.config.families[0]
        };
        let pts = self.points(family);
        let failures = pts.iter().map(|p| p.failures).sum::<usize>();
        let greet_outage: Vec<f64> = pts.iter().map(|p| p.p_outage[0]).collect();
        let share_ratios: Vec<f64> = pts.iter().map(|p| p.share_ratio).collect();
        let rho = spearman(&self.config.elastic_share_grid, &share_ratios);
        let reservation_gaps: Vec<f64> = pts.iter().map(|p| p.reservation_gap).collect();
        let social_gaps: Vec<f64> = pts.iter().map(|p| p.social_gap).collect();
        let clean = failures == 0;
        Verdict {
            family,
            greet_outage_ok: clean && greet_outage.iter().all(|&p| p <= self.config.p_max),
            share_ratio_ok: clean && share_ratios.iter().all(|&r| r >= 1.0) && rho > 0.8,
            spearman: rho,
            reservation_gap_ok: clean && reservation_gaps.iter().all(|&g| g > 0.0),
            social_gap_ok: clean && social_gaps.iter().all(|&g| g.abs() <= 0.02),
            greet_outage,
            share_ratios,
            reservation_gaps,
            social_gaps,
            failures,
        }
    }

    /// Human-readable per-point table for every family.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<11} {:>6} {:>9} {:>9} {:>9} {:>9} {:>8} {:>11} {:>9} {:>6}",
            "family", "e_tot", "P_greet", "P_resv", "P_share", "P_so", "ratio", "U_g-U_resv", "so_gap", "conv"
        );
        for &f in &self.config.families {
            for p in self.points(f) {
                let _ = writeln!(
                    s,
                    "{:<11} {:>6.2} {:>9.5} {:>9.5} {:>9.5} {:>9.5} {:>8.2} {:>11.4} {:>9.5} {:>6.3}{}",
                    f.name(),
                    p.elastic_total,
                    p.p_outage[0],
                    p.p_outage[1],
                    p.p_outage[2],
                    p.p_outage[3],
                    p.share_ratio,
                    p.reservation_gap,
                    p.social_gap,
                    p.converged_frac,
                    if p.failures > 0 { format!("  ({} failed)", p.failures) } else { String::new() }
                );
            }
        }
        s
    }

    fn ok_runs(&self, family: Family, elastic_total: f64) -> Vec<&RunReport> {
        self.rows
            .iter()
            .filter(|r| r.family == family && r.elastic_total == elastic_total)
            .filter_map(|r| r.result.as_ref().ok())
            .collect()
    }

    /// One row per (family, point, seed, scheme). `ci_low`/`ci_high` hold the
    /// 95% interval of `p_outage` across the point's seeds. Failed runs keep
    /// their row with empty metric fields.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), ExperimentError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            let ok = self.ok_runs(r.family, r.elastic_total);
            for (i, &scheme) in Scheme::ALL.iter().enumerate() {
                let ps: Vec<f64> = ok.iter().map(|x| x.schemes[i].p_outage()).collect();
                let (_, lo, hi) = mean_ci(&ps);
                let (p, u, conv, rounds, ci) = match &r.result {
                    Ok(rep) => {
                        let m = &rep.schemes[i];
                        let greet = scheme == Scheme::Greet;
                        (
                            Some(m.p_outage()),
                            Some(m.utility()),
                            greet.then(|| rep.converged_frac()),
                            greet.then(|| rep.rounds_mean()),
                            Some((lo, hi)),
                        )
                    }
                    Err(_) => (None, None, None, None, None),
                };
                w.write_record([
                    r.family.name().to_string(),
                    r.elastic_total.to_string(),
                    scheme.name().to_string(),
                    r.seed.to_string(),
                    fmt_opt(p),
                    fmt_opt(u),
                    fmt_opt(conv),
                    fmt_opt(rounds),
                    fmt_opt(ci.map(|c| c.0)),
                    fmt_opt(ci.map(|c| c.1)),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Seed means, one row per (family, point, scheme) with `seed = all`.
    pub fn write_aggregate_csv<W: Write>(&self, out: W) -> Result<(), ExperimentError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for &f in &self.config.families {
            for &x in &self.config.elastic_share_grid {
                let ok = self.ok_runs(f, x);
                if ok.is_empty() {
                    continue;
                }
                for (i, &scheme) in Scheme::ALL.iter().enumerate() {
                    let ps: Vec<f64> = ok.iter().map(|r| r.schemes[i].p_outage()).collect();
                    let us: Vec<f64> = ok.iter().map(|r| r.schemes[i].utility()).collect();
                    let (pm, lo, hi) = mean_ci(&ps);
                    let greet = scheme == Scheme::Greet;
                    let conv = greet.then(|| mean_ci(&ok.iter().map(|r| r.converged_frac()).collect::<Vec<_>>()).0);
                    let rounds = greet.then(|| mean_ci(&ok.iter().map(|r| r.rounds_mean()).collect::<Vec<_>>()).0);
                    w.write_record([
                        f.name().to_string(),
                        x.to_string(),
                        scheme.name().to_string(),
                        "all".to_string(),
                        pm.to_string(),
                        mean_ci(&us).0.to_string(),
                        fmt_opt(conv),
                        fmt_opt(rounds),
                        lo.to_string(),
                        hi.to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Run summary: configuration, verdict, per-point table and caveats.
    pub fn summary(&self) -> String {
        let c = &self.config;
        let v = self.verdict();
        let mut s = String::new();
        let _ = writeln!(
            s,
            "sweep: {} sites, {} users/slice, {} epochs, seeds {:?}, P_max {}, γ {} Mbps",
            c.radio.sites, c.users_per_slice, c.epochs, c.seeds, c.p_max, c.min_rate_mbps
        );
        let _ = writeln!(
            s,
            "GREET: round-robin, {} round cap (last iterate kept); social optimum every {} epochs",
            c.run.greet_rounds, c.run.so_every
        );
        let _ = writeln!(s, "verdict ({}):", v.family);
        let _ = writeln!(s, "  GREET outage ≤ P_max at every point: {} {:?}", v.greet_outage_ok, v.greet_outage);
        let _ = writeln!(
            s,
            "  share-based/GREET outage ratio ≥ 1 and increasing: {} {:?} (Spearman {:.3})",
            v.share_ratio_ok, v.share_ratios, v.spearman
        );
        let _ = writeln!(s, "  GREET − reservation utility > 0: {} {:?}", v.reservation_gap_ok, v.reservation_gaps);
        let _ = writeln!(s, "  gap to social optimum ≤ 2%: {} {:?}", v.social_gap_ok, v.social_gaps);
        s.push_str(&self.table());
        for (f, seed, st) in &self.scaled {
            let _ = writeln!(s, "note: {f} seed {seed}: guarantees scaled down at stations {st:?}");
        }
        for (f, seed, e) in &self.setup_failures {
            let _ = writeln!(s, "setup failed: {f} seed {seed}: {e}");
        }
        for r in &self.rows {
            if let Err(e) = &r.result {
                let _ = writeln!(s, "run failed: {} e={} seed {}: {e}", r.family, r.elastic_total, r.seed);
            }
        }
        s
    }
}
