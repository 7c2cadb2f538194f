//! Splits a cooldown into rest, fluctuation, transition and levitated regions.

use serde::{Deserialize, Serialize};

use super::CooldownSeries;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// Largest deviation from the running rest mean still counted as rest (Hz).
    pub fluctuation: f64,
    /// Smallest consecutive jump counted as a step, exclusive (Hz).
    pub step: f64,
    /// Rolling standard deviation below which the tail is levitated (Hz).
    pub stability_std: f64,
    pub window: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            fluctuation: 20e6,
            step: 30e6,
            stability_std: 5e6,
            window: 5,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.fluctuation > 0.0 && self.step > 0.0 && self.stability_std > 0.0) {
            return Err(Error::param("segmentation thresholds must be positive"));
        }
        if self.window < 2 {
            return Err(Error::param("rolling window must be at least 2 samples"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Rest,
    Fluctuation,
    Transition,
    Levitated,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::Rest, Region::Fluctuation, Region::Transition, Region::Levitated];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub region: Region,
    /// Record range `[start, end)` in the series.
    pub start: usize,
    pub end: usize,
    pub t_high: Option<f64>,
    pub t_low: Option<f64>,
    pub mean_df: Option<f64>,
    /// Largest |Δf| jump onto any sample of the segment.
    pub max_step: Option<f64>,
}

impl Segment {
    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, index: usize) -> bool {
        (self.start..self.end).contains(&index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSegmentation {
    /// Always four, in `Region::ALL` order.
    pub segments: Vec<Segment>,
    pub thresholds: Thresholds,
}

impl RegionSegmentation {
    pub fn segment(&self, region: Region) -> &Segment {
        &self.segments[Region::ALL.iter().position(|&r| r == region).unwrap()]
    }

    /// Start indices of the fluctuation, transition and levitated segments.
    pub fn boundaries(&self) -> [usize; 3] {
        [self.segments[1].start, self.segments[2].start, self.segments[3].start]
    }
}

fn std_dev(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (x.len() - 1) as f64).sqrt()
}

/// Greedy high-to-low temperature scan.
///
/// Rest is the longest prefix whose samples stay within `fluctuation` of the
/// mean of the samples before them. A step is a jump larger than `step`
/// between consecutive samples; transition runs from the first step up to the
/// levitated tail, which is the longest stable suffix after the last step
/// (sample standard deviation over every `window` below `stability_std`).
/// Whatever lies between rest and the first step is fluctuation. Values
/// exactly at a threshold stay in the earlier region. Gaps in the series are
/// skipped and absorbed by the segment they fall in.
pub fn classify_regions(series: &CooldownSeries, thresholds: &Thresholds) -> Result<RegionSegmentation> {
    thresholds.validate()?;
    let valid = series.valid();
    let d: Vec<f64> = valid.iter().map(|v| v.1).collect();
    let m = d.len();
    let w = thresholds.window;
    if m < 4 * w {
        return Err(Error::NoData(format!("{m} usable samples; segmentation needs at least {}", 4 * w)));
    }

    let mut rest_end = 1;
    let mut sum = d[0];
    while rest_end < m && (d[rest_end] - sum / rest_end as f64).abs() <= thresholds.fluctuation {
        sum += d[rest_end];
        rest_end += 1;
    }

    let steps: Vec<usize> = (rest_end.max(1)..m)
        .filter(|&i| (d[i] - d[i - 1]).abs() > thresholds.step)
        .collect();

    let window_std: Vec<f64> = (0..=m - w).map(|j| std_dev(&d[j..j + w])).collect();
    let stable = |s: usize| -> bool {
        if m - s >= w {
            window_std[s..=m - w].iter().all(|&v| v < thresholds.stability_std)
        } else {
            std_dev(&d[s..]) < thresholds.stability_std
        }
    };
    let floor = steps.last().map_or(rest_end, |&i| i + 1);
    let mut lev_start = m;
    while lev_start > floor && stable(lev_start - 1) {
        lev_start -= 1;
    }
    let transition_start = steps.first().copied().unwrap_or(lev_start);

    let cuts = [0, rest_end, transition_start, lev_start, m];
    let to_record = |b: usize| match b {
        0 => 0,
        b if b == m => series.records.len(),
        b => valid[b].0,
    };
    let segments = Region::ALL
        .iter()
        .enumerate()
        .map(|(k, &region)| {
            let (a, b) = (cuts[k], cuts[k + 1]);
            let (start, end) = (to_record(a), to_record(b));
            let vals = &d[a..b];
            let mean_df = (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64);
            let max_step = (a.max(1)..b).map(|i| (d[i] - d[i - 1]).abs()).reduce(f64::max);
            Segment {
                region,
                start,
                end,
                t_high: (a < b).then(|| series.records[valid[a].0].temperature),
                t_low: (a < b).then(|| series.records[valid[b - 1].0].temperature),
                mean_df,
                max_step,
            }
        })
        .collect();
    Ok(RegionSegmentation {
        segments,
        thresholds: *thresholds,
    })
}
