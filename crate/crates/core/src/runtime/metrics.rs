use serde::Serialize;
use serde_json::{json, Value};

/// Bytes per row id and per value read through the windows.
pub const INDEX_BYTES: u64 = 8;
pub const VALUE_BYTES: u64 = 8;
pub const ENTRY_BYTES: u64 = INDEX_BYTES + VALUE_BYTES;

/// Logical messages per fetched interval: one get on each window.
pub const MESSAGES_PER_INTERVAL: u64 = 2;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PhaseTimes {
    pub communication_ms: f64,
    pub computation_ms: f64,
    pub other_ms: f64,
}

impl PhaseTimes {
    fn add(&mut self, o: &PhaseTimes) {
        self.communication_ms += o.communication_ms;
        self.computation_ms += o.computation_ms;
        self.other_ms += o.other_ms;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ProcessMetrics {
    pub rank: usize,
    pub bytes_fetched: u64,
    /// Bytes of the remote columns actually needed (a lower bound on `bytes_fetched`).
    pub bytes_required: u64,
    /// Remote read intervals issued (one-sided get pairs).
    pub intervals: u64,
    pub messages: u64,
    pub max_intervals_per_remote: u64,
    pub flops: u64,
    pub required_columns: u64,
    pub fetched_columns: u64,
    #[serde(skip)]
    pub times: PhaseTimes,
}

/// Per-process counters of one or more distributed multiplies.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunMetrics {
    pub processes: Vec<ProcessMetrics>,
    /// Bytes of every `A` operand read through windows, summed over multiplies.
    pub mem_a_bytes: u64,
    pub multiplies: u64,
}

impl RunMetrics {
    pub fn new(procs: usize) -> Self {
        RunMetrics {
            processes: (0..procs)
                .map(|rank| ProcessMetrics {
                    rank,
                    ..Default::default()
                })
                .collect(),
            mem_a_bytes: 0,
            multiplies: 0,
        }
    }

    pub fn procs(&self) -> usize {
        self.processes.len()
    }

    /// Adds another run's counters rank by rank.
    pub fn merge(&mut self, other: &RunMetrics) {
        if self.processes.len() < other.processes.len() {
            let start = self.processes.len();
            self.processes.extend((start..other.processes.len()).map(|rank| ProcessMetrics {
                rank,
                ..Default::default()
            }));
        }
        for (p, o) in self.processes.iter_mut().zip(&other.processes) {
            p.bytes_fetched += o.bytes_fetched;
            p.bytes_required += o.bytes_required;
            p.intervals += o.intervals;
            p.messages += o.messages;
            p.max_intervals_per_remote = p.max_intervals_per_remote.max(o.max_intervals_per_remote);
            p.flops += o.flops;
            p.required_columns += o.required_columns;
            p.fetched_columns += o.fetched_columns;
            p.times.add(&o.times);
        }
        self.mem_a_bytes += other.mem_a_bytes;
        self.multiplies += other.multiplies;
    }

    pub fn total_bytes(&self) -> u64 {
        self.processes.iter().map(|p| p.bytes_fetched).sum()
    }

    pub fn total_messages(&self) -> u64 {
        self.processes.iter().map(|p| p.messages).sum()
    }

    pub fn total_flops(&self) -> u64 {
        self.processes.iter().map(|p| p.flops).sum()
    }

    /// Remote volume over the largest possible remote volume, `(P - 1) * mem(A)`:
    /// 1.0 means every process read all of `A` it does not own.
    pub fn cv_over_mem_a(&self) -> f64 {
        cv_ratio(self.total_bytes(), self.mem_a_bytes, self.procs())
    }

    /// Report object. Timings are wall-clock and therefore excluded unless asked for.
    pub fn to_json(&self, include_timings: bool) -> Value {
        let processes: Vec<Value> = self
            .processes
            .iter()
            .map(|p| {
                let mut v = serde_json::to_value(p).expect("metrics serialize");
                if include_timings {
                    v["times"] = serde_json::to_value(p.times).expect("times serialize");
                }
                v
            })
            .collect();
        let mut aggregate = json!({
            "bytes_fetched": self.total_bytes(),
            "bytes_required": self.processes.iter().map(|p| p.bytes_required).sum::<u64>(),
            "messages": self.total_messages(),
            "intervals": self.processes.iter().map(|p| p.intervals).sum::<u64>(),
            "flops": self.total_flops(),
            "required_columns": self.processes.iter().map(|p| p.required_columns).sum::<u64>(),
            "fetched_columns": self.processes.iter().map(|p| p.fetched_columns).sum::<u64>(),
            "mem_a_bytes": self.mem_a_bytes,
            "cv_over_memA": self.cv_over_mem_a(),
            "multiplies": self.multiplies,
        });
        if include_timings {
            let mut t = PhaseTimes::default();
            for p in &self.processes {
                t.add(&p.times);
            }
            aggregate["times"] = serde_json::to_value(t).expect("times serialize");
        }
        json!({ "aggregate": aggregate, "processes": processes })
    }
}

pub(crate) fn cv_ratio(total_bytes: u64, mem_a_bytes: u64, procs: usize) -> f64 {
    if procs <= 1 || mem_a_bytes == 0 {
        0.0
    } else {
        total_bytes as f64 / ((procs as u64 - 1) * mem_a_bytes) as f64
    }
}
