//! Exit-time stopping records.

use serde::Serialize;

use crate::path::semimartingale::SemimartingalePath;

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum StopKind {
    ExitRadius { r: f64 },
    Horizon,
    MinOf { parts: Vec<StoppingRecord> },
}

/// Where a path was stopped: the first grid index outside the ball, or the
/// horizon. No intra-step interpolation; the bias is O(dt).
#[derive(Debug, Clone, Serialize)]
pub struct StoppingRecord {
    pub index: usize,
    pub time: f64,
    pub kind: StopKind,
}

impl StoppingRecord {
    /// Combine two records as the minimum stopping time.
    pub fn min(self, other: StoppingRecord) -> StoppingRecord {
        let (index, time) = if self.index <= other.index {
            (self.index, self.time)
        } else {
            (other.index, other.time)
        };
        StoppingRecord {
            index,
            time,
            kind: StopKind::MinOf {
                parts: vec![self, other],
            },
        }
    }
}

/// First grid index with `|x| >= r`, else the horizon.
pub fn stop_at_exit(path: &SemimartingalePath, r: f64) -> StoppingRecord {
    assert!(r > 0.0, "exit radius must be positive");
    let x = path.x();
    let times = path.grid().times();
    for j in 0..x.len() {
        if x.euclidean_norm_at(j) >= r {
            return StoppingRecord {
                index: j,
                time: times[j],
                kind: StopKind::ExitRadius { r },
            };
        }
    }
    StoppingRecord {
        index: x.len() - 1,
        time: *times.last().expect("nonempty grid"),
        kind: StopKind::Horizon,
    }
}
