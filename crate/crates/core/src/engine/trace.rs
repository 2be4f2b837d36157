use std::io::{self, Write};

use super::stats::PenaltyStats;

/// State recorded at the end of one round. Round 0 is the state right after initialization.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub current_cost: f64,
    pub best_so_far: f64,
    pub penalty: Option<PenaltyStats>,
    /// Messages sent by each agent during the round.
    pub messages: Option<Vec<u32>>,
    pub values: Option<Vec<usize>>,
}

impl RoundRecord {
    pub fn messages_total(&self) -> Option<u64> {
        self.messages.as_ref().map(|m| m.iter().map(|&c| u64::from(c)).sum())
    }
}

/// Per-round anytime cost series of a single run.
#[derive(Debug, Clone, PartialEq)]
pub struct AnytimeTrace {
    pub initial: RoundRecord,
    pub rounds: Vec<RoundRecord>,
}

pub const TRACE_CSV_HEADER: &str = "round,current_cost,best_so_far,penalty_mean,penalty_niqr,penalty_cv,msgs_total";

impl AnytimeTrace {
    pub fn final_best(&self) -> f64 {
        self.rounds.last().unwrap_or(&self.initial).best_so_far
    }

    pub fn best_so_far(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.best_so_far).collect()
    }

    pub fn current_costs(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.current_cost).collect()
    }

    /// Records from round 0 onwards.
    pub fn all_records(&self) -> impl Iterator<Item = &RoundRecord> {
        std::iter::once(&self.initial).chain(&self.rounds)
    }

    /// Per-round, per-agent sent message counts (rounds 1..), when collected.
    pub fn message_audit(&self) -> Option<Vec<&[u32]>> {
        self.rounds.iter().map(|r| r.messages.as_deref()).collect()
    }

    /// Joint assignment after each round (round 0 first), when collected.
    pub fn assignments(&self) -> Option<Vec<&[usize]>> {
        self.all_records().map(|r| r.values.as_deref()).collect()
    }

    pub fn write_csv(&self, mut w: impl Write, include_initial: bool) -> io::Result<()> {
        writeln!(w, "{TRACE_CSV_HEADER}")?;
        let skip = usize::from(!include_initial);
        for r in self.all_records().skip(skip) {
            write!(w, "{},{},{}", r.round, r.current_cost, r.best_so_far)?;
            match r.penalty {
                Some(p) => write!(w, ",{},{},{}", p.mean, p.normalized_iqr, p.cv)?,
                None => write!(w, ",,,")?,
            }
            match r.messages_total() {
                Some(m) => writeln!(w, ",{m}")?,
                None => writeln!(w, ",")?,
            }
        }
        Ok(())
    }
}
