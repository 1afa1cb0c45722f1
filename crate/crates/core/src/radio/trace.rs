//! Per-epoch association and achievable-rate traces, with CSV export/replay.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::RadioError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub epoch: usize,
    pub user: usize,
    pub sector: usize,
    /// Achievable rate, bits/s.
    pub c_u: f64,
}

/// `sector[e][u]` and `capacity[e][u]` for every epoch and user.
#[derive(Debug, Clone, PartialEq)]
pub struct RadioTrace {
    pub num_sectors: usize,
    pub sector: Vec<Vec<usize>>,
    pub capacity: Vec<Vec<f64>>,
}

impl RadioTrace {
    pub fn num_epochs(&self) -> usize {
        self.sector.len()
    }

    pub fn num_users(&self) -> usize {
        self.sector.first().map_or(0, Vec::len)
    }

    pub fn rows(&self) -> impl Iterator<Item = TraceRow> + '_ {
        self.sector.iter().enumerate().flat_map(move |(epoch, row)| {
            row.iter().enumerate().map(move |(user, &sector)| TraceRow {
                epoch,
                user,
                sector,
                c_u: self.capacity[epoch][user],
            })
        })
    }

    /// Rebuilds a trace; every `(epoch, user)` pair must appear exactly once.
    pub fn from_rows(rows: &[TraceRow], num_sectors: usize) -> Result<Self, RadioError> {
        let epochs = rows.iter().map(|r| r.epoch + 1).max().unwrap_or(0);
        let users = rows.iter().map(|r| r.user + 1).max().unwrap_or(0);
        let mut sector = vec![vec![usize::MAX; users]; epochs];
        let mut capacity = vec![vec![0.0; users]; epochs];
        for r in rows {
            if r.sector >= num_sectors {
                return Err(RadioError::Trace(format!("epoch {} user {}: sector {} out of range", r.epoch, r.user, r.sector)));
            }
            if !(r.c_u >= 0.0 && r.c_u.is_finite()) {
                return Err(RadioError::Trace(format!("epoch {} user {}: rate {}", r.epoch, r.user, r.c_u)));
            }
            if sector[r.epoch][r.user] != usize::MAX {
                return Err(RadioError::Trace(format!("duplicate row for epoch {} user {}", r.epoch, r.user)));
            }
            sector[r.epoch][r.user] = r.sector;
            capacity[r.epoch][r.user] = r.c_u;
        }
        for (e, row) in sector.iter().enumerate() {
            if let Some(u) = row.iter().position(|&s| s == usize::MAX) {
                return Err(RadioError::Trace(format!("missing row for epoch {e} user {u}")));
            }
        }
        Ok(RadioTrace {
            num_sectors,
            sector,
            capacity,
        })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), RadioError> {
        let mut w = csv::Writer::from_writer(out);
        for row in self.rows() {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R, num_sectors: usize) -> Result<Self, RadioError> {
        let mut r = csv::Reader::from_reader(input);
        let rows: Vec<TraceRow> = r.deserialize().collect::<Result<_, _>>()?;
        Self::from_rows(&rows, num_sectors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RadioTrace {
        RadioTrace {
            num_sectors: 3,
            sector: vec![vec![0, 2], vec![1, 2]],
            capacity: vec![vec![1.5e6, 0.0], vec![2.25e7, 3.0e6]],
        }
    }

    #[test]
    fn csv_round_trip() {
        let t = sample();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("epoch,user,sector,c_u\n"));
        assert_eq!(RadioTrace::read_csv(&buf[..], 3).unwrap(), t);
    }

    #[test]
    fn rejects_gaps_and_duplicates() {
        let mut rows: Vec<TraceRow> = sample().rows().collect();
        rows.pop();
        assert!(RadioTrace::from_rows(&rows, 3).is_err());
        let mut rows: Vec<TraceRow> = sample().rows().collect();
        rows.push(rows[0]);
        assert!(RadioTrace::from_rows(&rows, 3).is_err());
        let rows: Vec<TraceRow> = sample().rows().collect();
        assert!(RadioTrace::from_rows(&rows, 2).is_err());
    }
}
