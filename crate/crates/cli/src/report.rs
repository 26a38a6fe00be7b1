//! Run summary written to `report.json`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub type Window = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub version: String,
    pub model: String,
    pub kernel: KernelSummary,
    pub t_max: f64,
    pub steps: usize,
    pub xi_method: String,
    /// Damping-basis index whose `ξ` is reported as the coherence factor `f`.
    pub coherence_index: usize,
    pub coherence_eigenvalue: [f64; 2],
    pub verdicts: Verdicts,
    /// Runs of grid points with `f·f′ > 0`.
    pub product_windows: Vec<Window>,
    pub sigma: Option<Vec<PairSummary>>,
    pub blp: Option<BlpSummary>,
    pub divisibility: Option<DivisibilitySummary>,
    pub rates: Option<RateSummary>,
    pub cp_condition: Option<CpSummary>,
    pub oracle: OracleSummary,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSummary {
    pub name: String,
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    pub backflow: Option<String>,
    pub divisibility: Option<String>,
    pub cp_condition: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub pair: String,
    pub positive_windows: Vec<Window>,
    pub max_sigma: f64,
    pub positive_integral: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlpSummary {
    pub lower_bound: f64,
    pub pairs: usize,
    pub best_pair: usize,
    pub max_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisibilitySummary {
    pub dt: f64,
    pub tolerance: f64,
    pub violation_windows: Vec<Window>,
    pub min_eigenvalue: Option<f64>,
    pub min_choi_eigenvalue: Option<f64>,
    pub singular_points: usize,
    pub half_step_disagreements: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub tolerance: f64,
    pub negative_windows: Vec<Window>,
    pub min_rate: Option<f64>,
    pub masked_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpSummary {
    pub tolerance: f64,
    pub min_eigenvalue: f64,
    pub violation_windows: Vec<Window>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct OracleSummary {
    /// Sup-norm distance to the closed-form solution, where one exists.
    pub closed_form_residual: Option<f64>,
    /// Sup-norm distance between the spectral and Volterra states.
    pub volterra_residual: Option<f64>,
    pub volterra_error_estimate: Option<f64>,
}

impl RunReport {
    /// Every window in the report.
    pub fn all_windows(&self) -> Vec<Window> {
        let mut out = self.product_windows.clone();
        for p in self.sigma.iter().flatten() {
            out.extend(&p.positive_windows);
        }
        if let Some(d) = &self.divisibility {
            out.extend(&d.violation_windows);
        }
        if let Some(r) = &self.rates {
            out.extend(&r.negative_windows);
        }
        if let Some(c) = &self.cp_condition {
            out.extend(&c.violation_windows);
        }
        out
    }
}
