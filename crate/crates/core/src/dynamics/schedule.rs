use serde::{Deserialize, Serialize};

/// Stroboscopic recording times: every `dense_stride`-th period below
/// `dense_periods`, then `per_decade` log-spaced times snapped down to
/// multiples of `snap`. The final period is always recorded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingSchedule {
    pub dense_periods: u64,
    pub dense_stride: u64,
    pub per_decade: u32,
    pub snap: u64,
}

impl Default for SamplingSchedule {
    fn default() -> Self {
        SamplingSchedule {
            dense_periods: 10_000,
            dense_stride: 1,
            per_decade: 64,
            snap: 1,
        }
    }
}

impl SamplingSchedule {
    /// Record every period up to and including `n_periods`.
    pub fn every_period() -> Self {
        SamplingSchedule {
            dense_periods: u64::MAX,
            dense_stride: 1,
            per_decade: 0,
            snap: 1,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.dense_stride == 0 {
            return Err("dense_stride must be at least 1".into());
        }
        if self.snap == 0 {
            return Err("snap must be at least 1".into());
        }
        Ok(())
    }

    /// Sorted, deduplicated recording times in `[0, n_periods]`.
    pub fn times(&self, n_periods: u64) -> Vec<u64> {
        let stride = self.dense_stride.max(1);
        let snap = self.snap.max(1);
        let dense_end = self.dense_periods.min(n_periods.saturating_add(1));
        let mut out: Vec<u64> = (0..dense_end).step_by(stride as usize).collect();
        if self.per_decade > 0 && dense_end <= n_periods {
            let start = (dense_end.max(1)) as f64;
            let ratio = 10f64.powf(1.0 / self.per_decade as f64);
            let mut k = 0i32;
            loop {
                let t = (start * ratio.powi(k)).round() as u64;
                let t = t / snap * snap;
                if t > n_periods {
                    break;
                }
                if t >= dense_end && out.last().is_none_or(|&last| t > last) {
                    out.push(t);
                }
                k += 1;
            }
        }
        if out.last() != Some(&n_periods) {
            out.push(n_periods);
        }
        out
    }
}
