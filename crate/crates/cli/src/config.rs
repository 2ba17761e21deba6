use std::path::PathBuf;

use glv_core::continuation::ContinuationSettings;
use glv_core::{EigenSettings, NewtonSettings};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Solve,
    Trace,
    Diagram,
    Eigen,
    Verify,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Solve => "solve",
            Mode::Trace => "trace",
            Mode::Diagram => "diagram",
            Mode::Eigen => "eigen",
            Mode::Verify => "verify",
        }
    }
}

/// Initial guess for Newton or the start of a branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GuessSpec {
    Constant {
        #[serde(default = "one")]
        re: f64,
        #[serde(default)]
        im: f64,
    },
    /// Product of vortex profiles; each center is `[x, y, winding]`.
    Vortices {
        centers: Vec<(f64, f64, i32)>,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// A field CSV written by an earlier run.
    File { path: PathBuf },
    /// Leave bifurcation `bifurcation` of branch `branch` stored in the run
    /// directory `run`, along switching direction `choice`.
    Switch {
        run: PathBuf,
        branch: String,
        bifurcation: usize,
        #[serde(default)]
        choice: usize,
    },
}

fn one() -> f64 {
    1.0
}

impl Default for GuessSpec {
    fn default() -> Self {
        GuessSpec::Constant { re: 1.0, im: 0.0 }
    }
}

/// Extra branch traced in diagram mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartSpec {
    pub label: String,
    pub guess: GuessSpec,
    pub mu: f64,
    /// Sign of the first step in `mu`; zero traces both directions.
    #[serde(default)]
    pub direction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub d: f64,
    /// Grid parameter; `None` picks 64 for `d <= 3` and the `h = 0.05` grid
    /// otherwise.
    pub n: Option<usize>,
    pub mu: f64,
    pub mu_window: (f64, f64),
    /// Sign of the first continuation step.
    pub direction: f64,
    pub guess: GuessSpec,
    pub label: String,
    /// Newton settings for solve and eigen modes.
    pub newton: NewtonSettings,
    pub continuation: ContinuationSettings,
    /// Trace both signs of every switching direction in diagram mode.
    pub both_signs: bool,
    /// Eigenvalues reported in eigen mode.
    pub eigen_count: usize,
    /// Levels of branch switching in diagram mode.
    pub switch_depth: usize,
    /// Switching amplitude relative to the norm of the bifurcating state.
    pub switch_fraction: f64,
    /// Points traced after the first extremum of `mu` on switched branches.
    pub stop_after_extremum: Option<usize>,
    pub extra_starts: Vec<StartSpec>,
    pub write_patterns: bool,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            d: 3.0,
            n: None,
            mu: 0.0,
            mu_window: (0.0, 2.0),
            direction: 1.0,
            guess: GuessSpec::default(),
            label: "A".into(),
            newton: NewtonSettings::default(),
            continuation: ContinuationSettings::default(),
            both_signs: false,
            eigen_count: 8,
            switch_depth: 1,
            switch_fraction: 0.05,
            stop_after_extremum: Some(1),
            extra_starts: Vec::new(),
            write_patterns: true,
            seed: EigenSettings::default().seed,
            out: PathBuf::from("glv-out"),
        }
    }
}

impl RunConfig {
    pub fn grid_n(&self) -> usize {
        self.n.unwrap_or_else(|| {
            if self.d <= 3.0 {
                64
            } else {
                let n = (self.d / 0.05).round() as usize;
                n + n % 2
            }
        })
    }

    /// Continuation settings with the window and seed of this config.
    pub fn settings(&self) -> ContinuationSettings {
        let mut s = self.continuation.clone().window(self.mu_window.0, self.mu_window.1);
        s.eigen.seed = self.seed;
        s
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(format!("d must be positive, got {}", self.d));
        }
        let n = self.grid_n();
        if n < 2 || !n.is_multiple_of(2) {
            return Err(format!("N must be even and at least 2, got {n}"));
        }
        if !self.mu.is_finite() {
            return Err("mu must be finite".into());
        }
        let (lo, hi) = self.mu_window;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(format!("mu_window must be an increasing finite pair, got ({lo}, {hi})"));
        }
        if self.direction == 0.0 || !self.direction.is_finite() {
            return Err("direction must be nonzero".into());
        }
        if !(self.switch_fraction > 0.0 && self.switch_fraction < 1.0) {
            return Err("switch_fraction must lie in (0, 1)".into());
        }
        if self.eigen_count == 0 {
            return Err("eigen_count must be positive".into());
        }
        if let GuessSpec::Vortices { centers, amplitude } = &self.guess {
            if centers.is_empty() && *amplitude == 0.0 {
                return Err("vortex guess is identically zero".into());
            }
        }
        for s in &self.extra_starts {
            if s.label.is_empty() || !s.mu.is_finite() {
                return Err(format!("extra start {:?} needs a label and a finite mu", s.label));
            }
        }
        if self.label.is_empty() || self.label.contains(['/', '\\']) {
            return Err("label must be a non-empty file-name fragment".into());
        }
        self.newton.validate().map_err(|e| e.to_string())?;
        self.settings().validate().map_err(|e| e.to_string())
    }
}
