//! Pseudo-arclength continuation in `mu`, with bifurcation detection from
//! the stability index and symmetry-guided branch switching.
//!
//! States are compared in the combined norm `||dpsi||_W^2 + w_mu dmu^2`.
//! The phase condition during a step is anchored to the predecessor, so
//! consecutive points are phase-aligned and the secant carries no gauge
//! drift.

mod detect;
mod step;
mod switch;
mod trace;

use serde::{Deserialize, Serialize};

use crate::eigen::{EigenSettings, StabilityInfo};
use crate::glop::ExtendedState;
use crate::grid::OrderField;
use crate::newton::{LinearTolerance, NewtonSettings};
use crate::symmetry::IsotropyLabel;

pub use detect::{classify, detect_bifurcation, locate_crossing};
pub use step::{arclength_step, parameter_tangent, tangent, Corrected, Tangent};
pub use switch::{switch_branch, SwitchGuess};
pub use trace::{point_from_solution, trace_branch, Start};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContinuationSettings {
    pub ds: f64,
    pub ds_min: f64,
    pub ds_max: f64,
    /// Step growth factor after a fast corrector.
    pub grow: f64,
    /// Corrector iteration count that still counts as fast.
    pub fast_iterations: usize,
    pub mu_min: f64,
    pub mu_max: f64,
    pub max_points: usize,
    /// Weight of `mu` in the combined norm.
    pub w_mu: f64,
    pub newton: NewtonSettings,
    pub eigen: EigenSettings,
    /// Number of deflated eigenvalues tracked per point.
    pub eigen_count: usize,
    pub isotropy_tol: f64,
    /// A converged point with rms amplitude below this ends the branch.
    pub trivial_rms: f64,
    /// Failed steps from a state with rms below this end the branch on the
    /// trivial state instead of failing.
    pub collapse_rms: f64,
    pub detect: bool,
    /// Localization stops once the critical eigenvalue is this small.
    pub locate_tol: f64,
    pub locate_max_probes: usize,
    /// Stop this many points after `mu` passes through an extremum.
    pub stop_after_extremum: Option<usize>,
    /// Largest allowed distance of a corrected point from its predictor,
    /// relative to `ds`.
    pub max_deviation: f64,
}

impl Default for ContinuationSettings {
    fn default() -> Self {
        Self {
            ds: 0.05,
            ds_min: 1e-4,
            ds_max: 0.25,
            grow: 1.3,
            fast_iterations: 3,
            mu_min: f64::NEG_INFINITY,
            mu_max: f64::INFINITY,
            max_points: 400,
            w_mu: 1.0,
            newton: NewtonSettings {
                max_iter: 10,
                linear_tol: LinearTolerance::Fixed(1e-10),
                ..NewtonSettings::default()
            },
            eigen: EigenSettings::default(),
            eigen_count: 8,
            isotropy_tol: crate::symmetry::ISOTROPY_TOL,
            trivial_rms: 1e-4,
            collapse_rms: 0.15,
            detect: true,
            locate_tol: 1e-6,
            locate_max_probes: 40,
            stop_after_extremum: None,
            max_deviation: 2.0,
        }
    }
}

impl ContinuationSettings {
    pub fn window(mut self, mu_min: f64, mu_max: f64) -> Self {
        self.mu_min = mu_min;
        self.mu_max = mu_max;
        self
    }

    pub fn validate(&self) -> crate::Result<()> {
        let ok = self.ds > 0.0
            && self.ds_min > 0.0
            && self.ds_min <= self.ds
            && self.ds <= self.ds_max
            && self.grow >= 1.0
            && self.w_mu > 0.0
            && self.mu_min < self.mu_max
            && self.eigen_count > 0
            && self.locate_tol > 0.0;
        if !ok {
            return Err(crate::Error::InvalidArgument("inconsistent continuation settings".into()));
        }
        self.newton.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoint {
    pub state: ExtendedState,
    pub residual_norm: f64,
    pub newton_iterations: usize,
    pub energy: f64,
    pub stability: StabilityInfo,
    pub isotropy: IsotropyLabel,
    pub arclength: f64,
    pub total_vorticity: Option<i64>,
}

impl BranchPoint {
    pub fn mu(&self) -> f64 {
        self.state.mu
    }

    pub fn psi(&self) -> &OrderField {
        &self.state.psi
    }

    pub fn n_unstable(&self) -> usize {
        self.stability.n_unstable
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BifurcationKind {
    Turning,
    SimplePitchfork,
    /// Crossing of an eigenvalue pair from a two-dimensional representation.
    Double,
}

impl BifurcationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BifurcationKind::Turning => "turning",
            BifurcationKind::SimplePitchfork => "pitchfork",
            BifurcationKind::Double => "double",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationPoint {
    pub id: usize,
    pub mu: f64,
    pub arclength: f64,
    pub state: ExtendedState,
    pub multiplicity: usize,
    pub kind: BifurcationKind,
    /// Eigenvalue(s) at the located state.
    pub critical_values: Vec<f64>,
    pub critical_fields: Vec<OrderField>,
    pub isotropy: IsotropyLabel,
    pub n_unstable_before: usize,
    pub n_unstable_after: usize,
    /// `|<phi, d_mu F>| / ||d_mu F||`, large at folds.
    pub fold_indicator: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BranchEnd {
    WindowExit,
    /// Collapsed onto `psi = 0`; `mu` is extrapolated to zero amplitude.
    Trivial { mu: f64 },
    StepFailure(String),
    MaxPoints,
    AfterExtremum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub label: String,
    pub parent: Option<usize>,
    pub points: Vec<BranchPoint>,
    pub bifurcations: Vec<BifurcationPoint>,
    pub end: BranchEnd,
    /// Bifurcations that were detected but could not be located.
    pub warnings: Vec<String>,
}

impl Branch {
    /// Local extrema of `mu` along the branch, refined by a parabola
    /// through the three points around each discrete extremum.
    pub fn mu_extrema(&self) -> Vec<(f64, usize)> {
        let p = &self.points;
        let mut out = Vec::new();
        for k in 1..p.len().saturating_sub(1) {
            let (a, b, c) = (p[k - 1].mu(), p[k].mu(), p[k + 1].mu());
            if (b - a) * (c - b) < 0.0 {
                let (sa, sb, sc) = (p[k - 1].arclength, p[k].arclength, p[k + 1].arclength);
                out.push((parabola_vertex((sa, a), (sb, b), (sc, c)), k));
            }
        }
        out
    }
}

/// Ordinate of the vertex of the parabola through three points.
pub fn parabola_vertex(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    let d1 = (b.1 - a.1) / (b.0 - a.0);
    let d2 = (c.1 - b.1) / (c.0 - b.0);
    let curv = (d2 - d1) / (c.0 - a.0);
    if curv == 0.0 || !curv.is_finite() {
        return b.1;
    }
    // Newton form p(s) = a + d1 (s - sa) + curv (s - sa)(s - sb)
    let s_star = 0.5 * (a.0 + b.0) - d1 / (2.0 * curv);
    a.1 + d1 * (s_star - a.0) + curv * (s_star - a.0) * (s_star - b.0)
}
