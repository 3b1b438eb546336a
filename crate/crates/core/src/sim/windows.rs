use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalCounts {
    pub crunched: u64,
    pub offered: u64,
}

impl IntervalCounts {
    pub fn ratio(&self) -> f64 {
        if self.offered == 0 {
            0.0
        } else {
            self.crunched as f64 / self.offered as f64
        }
    }
}

/// Half-open interval range `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrunchWindow {
    pub start: usize,
    pub end: usize,
}

impl CrunchWindow {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Maximal runs of intervals whose crunched ratio exceeds `threshold`.
pub fn detect_crunch_windows(trace: &[IntervalCounts], threshold: f64) -> Vec<CrunchWindow> {
    let mut out = Vec::new();
    let mut open: Option<usize> = None;
    for (i, c) in trace.iter().enumerate() {
        match (c.ratio() > threshold, open) {
            (true, None) => open = Some(i),
            (false, Some(start)) => {
                out.push(CrunchWindow { start, end: i });
                open = None;
            }
            _ => {}
        }
    }
    if let Some(start) = open {
        out.push(CrunchWindow { start, end: trace.len() });
    }
    out
}

/// Peak ratio and total time above `threshold` for a per-interval trace.
pub fn crunch_profile(trace: &[IntervalCounts], threshold: f64, interval_s: f64) -> (f64, f64) {
    let peak = trace.iter().map(IntervalCounts::ratio).fold(0.0, f64::max);
    let above = trace.iter().filter(|c| c.ratio() > threshold).count();
    (peak, above as f64 * interval_s)
}
