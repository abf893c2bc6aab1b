use serde::{Deserialize, Serialize};

use super::PathSpline;
use crate::vehicle::VehicleParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilitySegment {
    pub s_start: f64,
    pub s_end: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub kappa_max: f64,
    pub segments: Vec<FeasibilitySegment>,
}

impl FeasibilityReport {
    pub fn all_feasible(&self) -> bool {
        self.segments.iter().all(|s| s.feasible)
    }
}

/// Marks runs of samples whose curvature exceeds what the steering allows.
///
/// Segments break halfway between the last sample of one run and the first
/// sample of the next, so every sample lies strictly inside its own segment
/// and the segments tile `[0, total_length]`.
pub fn check_feasibility(spline: &PathSpline, params: &VehicleParams) -> FeasibilityReport {
    let kappa_max = params.kappa_max();
    let samples = spline.samples();
    let mut segments = Vec::new();
    let mut start = 0.0;
    let mut current = samples[0].curvature.abs() <= kappa_max;
    for w in samples.windows(2) {
        let ok = w[1].curvature.abs() <= kappa_max;
        if ok != current {
            let boundary = 0.5 * (w[0].s + w[1].s);
            segments.push(FeasibilitySegment {
                s_start: start,
                s_end: boundary,
                feasible: current,
            });
            start = boundary;
            current = ok;
        }
    }
    segments.push(FeasibilitySegment {
        s_start: start,
        s_end: spline.total_length(),
        feasible: current,
    });
    FeasibilityReport {
        kappa_max,
        segments,
    }
}
