//! Dynamics traces: the sequence of bid states with convergence diagnostics.

use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::allocation::BidState;
use crate::game::contraction::ContractionReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    RoundRobin,
    Simultaneous,
    Asynchronous,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::RoundRobin => "round-robin",
            Mode::Simultaneous => "simultaneous",
            Mode::Asynchronous => "asynchronous",
        })
    }
}

#[derive(Debug, Clone)]
pub struct DynamicsTrace {
    pub mode: Mode,
    /// `states[0]` is the initial state; `states[n]` follows round (or event) `n`.
    pub states: Vec<BidState>,
    /// `step_norms[n − 1] = max_v Σ_b |l^v_b(n) − l^v_b(n − 1)|`.
    pub step_norms: Vec<f64>,
    pub converged: bool,
    /// Period (in rounds) of a detected cycle.
    pub cycle: Option<usize>,
    pub contraction: Option<ContractionReport>,
}

/// `max_v Σ_b |a^v_b − b^v_b|`.
pub fn step_norm(a: &BidState, b: &BidState) -> f64 {
    let (la, lb) = (a.local(), b.local());
    (0..la.rows())
        .map(|v| la.row(v).iter().zip(lb.row(v)).map(|(x, y)| (x - y).abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

impl DynamicsTrace {
    pub fn rounds(&self) -> usize {
        self.step_norms.len()
    }

    pub fn final_state(&self) -> &BidState {
        self.states.last().expect("trace holds the initial state")
    }

    /// Largest observed `stepnorm(n) / stepnorm(n − 1)` for `n ≥ 2`.
    pub fn max_contraction_ratio(&self) -> Option<f64> {
        self.step_norms
            .windows(2)
            .filter(|w| w[0] > 0.0)
            .map(|w| w[1] / w[0])
            .fold(None, |m, r| Some(m.map_or(r, |x: f64| x.max(r))))
    }

    /// Long-format CSV: `round, slice, bs, local_bid`.
    pub fn write_csv<W: Write>(&self, out: W, slice_ids: &[String], bs_ids: &[String]) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["round", "slice", "bs", "local_bid"])?;
        for (n, state) in self.states.iter().enumerate() {
            for (v, sid) in slice_ids.iter().enumerate() {
                for (b, bid) in bs_ids.iter().enumerate() {
                    w.write_record([
                        n.to_string(),
                        sid.clone(),
                        bid.clone(),
                        format!("{:.12e}", state.local_bid(v, b)),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// One-line run summary: `converged=… [cycle=true period=…] rounds=… mode=…`
    /// followed by the last step norm and the contraction certificate.
    pub fn summary(&self) -> String {
        let mut s = format!("converged={}", self.converged);
        if let Some(p) = self.cycle {
            s.push_str(&format!(" cycle=true period={p}"));
        }
        s.push_str(&format!(" rounds={} mode={}", self.rounds(), self.mode));
        if let Some(last) = self.step_norms.last() {
            s.push_str(&format!(" final_step={last:e}"));
        }
        if let Some(c) = &self.contraction {
            s.push_str(&format!(
                " xi={:.6} f_max={:.6} threshold={:.6} guaranteed={}",
                c.xi, c.f_max, c.threshold, c.guaranteed
            ));
        }
        s
    }
}
