//! Node and wall-clock budgets shared by the exhaustive searches.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

pub const DEFAULT_NODES: u64 = 100_000_000;
pub const DEFAULT_SECONDS: u64 = 600;

#[derive(Debug)]
pub struct Budget {
    pub max_nodes: u64,
    pub deadline: Option<Instant>,
    nodes: AtomicU64,
}

impl Budget {
    pub fn new(max_nodes: u64, time_limit: Option<Duration>) -> Self {
        Budget {
            max_nodes,
            deadline: time_limit.map(|d| Instant::now() + d),
            nodes: AtomicU64::new(0),
        }
    }

    pub fn unlimited() -> Self {
        Budget::new(u64::MAX, None)
    }

    /// Count one node; false once either limit is hit.
    pub fn tick(&self) -> bool {
        let used = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if used > self.max_nodes {
            return false;
        }
        if used.is_multiple_of(4096) {
            if let Some(d) = self.deadline {
                if Instant::now() > d {
                    return false;
                }
            }
        }
        true
    }

    pub fn used(&self) -> u64 {
        self.nodes.load(Ordering::Relaxed)
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(DEFAULT_NODES, Some(Duration::from_secs(DEFAULT_SECONDS)))
    }
}
