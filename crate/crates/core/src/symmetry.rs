//! The symmetry group `T x D4` acting on order fields.
//!
//! `rho` rotates by a quarter turn, `(rho psi)_{i,j} = psi_{j,-i}`, and
//! `sigma` is the reflection `x -> -x` combined with complex conjugation,
//! which keeps the vector potential invariant. A dihedral element is stored
//! as `sigma^s rho^r` and acts by applying `rho^r` first.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::LinkField;
use crate::glop::residual;
use crate::grid::{inner_complex, OrderField};

/// `sigma^reflect rho^rot`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct D4 {
    pub reflect: bool,
    pub rot: u8,
}

impl D4 {
    pub const IDENTITY: D4 = D4 { reflect: false, rot: 0 };
    pub const RHO: D4 = D4 { reflect: false, rot: 1 };
    pub const RHO2: D4 = D4 { reflect: false, rot: 2 };
    pub const SIGMA: D4 = D4 { reflect: true, rot: 0 };
    pub const SIGMA_RHO: D4 = D4 { reflect: true, rot: 1 };

    pub fn new(reflect: bool, rot: u8) -> Self {
        Self { reflect, rot: rot % 4 }
    }

    pub fn all() -> [D4; 8] {
        let mut out = [D4::IDENTITY; 8];
        for (k, g) in out.iter_mut().enumerate() {
            *g = D4::new(k >= 4, (k % 4) as u8);
        }
        out
    }

    /// `self * other`, acting as `act(self) . act(other)`.
    pub fn compose(self, other: D4) -> D4 {
        // rho^b sigma^c = sigma^c rho^((-1)^c b)
        let b = if other.reflect { (4 - self.rot) % 4 } else { self.rot };
        D4::new(self.reflect ^ other.reflect, b + other.rot)
    }

    pub fn inverse(self) -> D4 {
        if self.reflect {
            self
        } else {
            D4::new(false, 4 - self.rot)
        }
    }

    /// Whether the action conjugates.
    pub fn is_antiunitary(self) -> bool {
        self.reflect
    }

    /// Source node of `(g psi)_{i,j}`.
    fn source(self, i: i64, j: i64) -> (i64, i64) {
        let (i, j) = if self.reflect { (-i, j) } else { (i, j) };
        let (mut a, mut b) = (i, j);
        for _ in 0..self.rot {
            (a, b) = (b, -a);
        }
        (a, b)
    }
}

impl fmt::Display for D4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.reflect, self.rot) {
            (false, 0) => write!(f, "e"),
            (false, 1) => write!(f, "rho"),
            (false, r) => write!(f, "rho^{r}"),
            (true, 0) => write!(f, "sigma"),
            (true, 1) => write!(f, "sigma rho"),
            (true, r) => write!(f, "sigma rho^{r}"),
        }
    }
}

/// A dihedral element followed by a global phase `e^{i eta}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    pub dihedral: D4,
    pub phase: f64,
}

impl GroupElement {
    pub fn dihedral(g: D4) -> Self {
        Self { dihedral: g, phase: 0.0 }
    }

    pub fn phase(eta: f64) -> Self {
        Self { dihedral: D4::IDENTITY, phase: eta }
    }
}

impl From<D4> for GroupElement {
    fn from(g: D4) -> Self {
        Self::dihedral(g)
    }
}

/// `g psi`, an exact permutation with optional conjugation and phase.
pub fn act(g: impl Into<GroupElement>, psi: &OrderField) -> OrderField {
    let g = g.into();
    let grid = *psi.grid();
    let rot = Complex64::from_polar(1.0, g.phase);
    let d = g.dihedral;
    let mut out = OrderField::zeros(grid);
    for (p, o) in out.values_mut().iter_mut().enumerate() {
        let (i, j) = grid.coords(p);
        let (a, b) = d.source(i, j);
        let z = psi.values()[grid.index(a, b)];
        *o = rot * if d.reflect { z.conj() } else { z };
    }
    out
}

/// Conjugacy classes of subgroups of D4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IsotropyLabel {
    D4,
    C4,
    Rho2Sigma,
    Rho2SigmaRho,
    Sigma,
    SigmaRho,
    Rho2,
    Trivial,
}

impl IsotropyLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            IsotropyLabel::D4 => "D4",
            IsotropyLabel::C4 => "<rho>",
            IsotropyLabel::Rho2Sigma => "<rho^2,sigma>",
            IsotropyLabel::Rho2SigmaRho => "<rho^2,sigma*rho>",
            IsotropyLabel::Sigma => "<sigma>",
            IsotropyLabel::SigmaRho => "<sigma*rho>",
            IsotropyLabel::Rho2 => "<rho^2>",
            IsotropyLabel::Trivial => "1",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.as_str() == s)
    }

    pub const ALL: [IsotropyLabel; 8] = [
        IsotropyLabel::D4,
        IsotropyLabel::C4,
        IsotropyLabel::Rho2Sigma,
        IsotropyLabel::Rho2SigmaRho,
        IsotropyLabel::Sigma,
        IsotropyLabel::SigmaRho,
        IsotropyLabel::Rho2,
        IsotropyLabel::Trivial,
    ];
}

impl fmt::Display for IsotropyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A subgroup of D4 as an explicit element list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    pub elements: Vec<D4>,
    pub label: IsotropyLabel,
}

impl Subgroup {
    fn of(label: IsotropyLabel, elements: &[D4]) -> Self {
        Self { elements: elements.to_vec(), label }
    }

    pub fn full() -> Self {
        Self::of(IsotropyLabel::D4, &D4::all())
    }

    pub fn sigma() -> Self {
        Self::of(IsotropyLabel::Sigma, &[D4::IDENTITY, D4::SIGMA])
    }

    pub fn sigma_rho() -> Self {
        Self::of(IsotropyLabel::SigmaRho, &[D4::IDENTITY, D4::SIGMA_RHO])
    }

    pub fn rho2_sigma() -> Self {
        Self::of(IsotropyLabel::Rho2Sigma, &[D4::IDENTITY, D4::RHO2, D4::SIGMA, D4::new(true, 2)])
    }

    /// All ten subgroups, largest first.
    pub fn all() -> Vec<Subgroup> {
        use IsotropyLabel::{Rho2, Rho2Sigma, Rho2SigmaRho, Sigma, SigmaRho, Trivial, C4};
        let e = D4::IDENTITY;
        let r = |k| D4::new(false, k);
        let s = |k| D4::new(true, k);
        vec![
            Self::full(),
            Self::of(C4, &[e, r(1), r(2), r(3)]),
            Self::of(Rho2Sigma, &[e, r(2), s(0), s(2)]),
            Self::of(Rho2SigmaRho, &[e, r(2), s(1), s(3)]),
            Self::of(Sigma, &[e, s(0)]),
            Self::of(Sigma, &[e, s(2)]),
            Self::of(SigmaRho, &[e, s(1)]),
            Self::of(SigmaRho, &[e, s(3)]),
            Self::of(Rho2, &[e, r(2)]),
            Self::of(Trivial, &[e]),
        ]
    }

    pub fn contains(&self, g: D4) -> bool {
        self.elements.contains(&g)
    }
}

/// `min_chi ||g psi - e^{i chi} psi|| / ||psi||` and the minimizing phase.
pub fn invariance_defect(g: D4, psi: &OrderField) -> Result<(f64, f64)> {
    let norm = psi.norm();
    if !(norm > 0.0) {
        return Err(Error::TrivialState);
    }
    let gpsi = act(g, psi);
    let chi = inner_complex(psi, &gpsi)?.arg();
    let diff = gpsi.add_scaled(-Complex64::from_polar(1.0, chi), psi)?;
    Ok((diff.norm() / norm, chi))
}

/// Default relative tolerance of [`isotropy`].
pub const ISOTROPY_TOL: f64 = 1e-6;

/// Largest subgroup whose elements fix `psi` modulo a global phase.
pub fn isotropy(psi: &OrderField, tol: f64) -> Result<IsotropyLabel> {
    let mut passes = [false; 8];
    for (k, g) in D4::all().into_iter().enumerate() {
        passes[k] = invariance_defect(g, psi)?.0 <= tol;
    }
    let ok = |g: D4| passes[usize::from(g.reflect) * 4 + usize::from(g.rot)];
    Ok(Subgroup::all()
        .into_iter()
        .find(|h| h.elements.iter().all(|g| ok(*g)))
        .map(|h| h.label)
        .unwrap_or(IsotropyLabel::Trivial))
}

/// Phases `omega_g` with `g psi = omega_g psi` for an `H`-symmetric `base`.
fn twist_from(base: &OrderField, h: &Subgroup) -> Result<Vec<Complex64>> {
    h.elements
        .iter()
        .map(|g| {
            let c = inner_complex(base, &act(*g, base))?;
            Ok(if c.norm() > 0.0 { c / c.norm() } else { Complex64::new(1.0, 0.0) })
        })
        .collect()
}

/// `(1/|H|) sum_g conj(omega_g) g phi` for twist phases `omega`.
fn twisted_average(phi: &OrderField, h: &Subgroup, omega: &[Complex64]) -> Result<OrderField> {
    let mut acc = OrderField::zeros(*phi.grid());
    let inv = 1.0 / h.elements.len() as f64;
    for (g, w) in h.elements.iter().zip(omega) {
        acc = acc.add_scaled(w.conj() * inv, &act(*g, phi))?;
    }
    Ok(acc)
}

/// Group average of `psi` over `H`, invariant modulo phase.
///
/// Rotation phases are snapped to the roots of unity allowed by `H`, and the
/// global phase of `psi` is first turned so that one reflection in `H` fixes
/// it. The twist phases then form a cocycle and the average is an exact,
/// idempotent projector.
pub fn project_fixed_space(psi: &OrderField, h: &Subgroup) -> Result<OrderField> {
    let has = |g: D4| h.contains(g);
    let snap = |z: Complex64, order: f64| {
        let step = std::f64::consts::TAU / order;
        Complex64::from_polar(1.0, (z.arg() / step).round() * step)
    };
    let pairing = |g: D4| inner_complex(psi, &act(g, psi));
    let omega_rho = if has(D4::RHO) { Some(snap(pairing(D4::RHO)?, 4.0)) } else { None };
    let omega_rho2 = match omega_rho {
        Some(w) => Some(w * w),
        None if has(D4::RHO2) => Some(snap(pairing(D4::RHO2)?, 2.0)),
        None => None,
    };
    let rot_phase = |k: u8| match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        2 => omega_rho2.expect("rho^2 in H"),
        k => omega_rho.expect("rho in H").powu(u32::from(k)),
    };
    let reflection = h.elements.iter().copied().find(|g| g.reflect);
    let mut aligned = psi.clone();
    if let Some(s) = reflection {
        let beta = pairing(s)?.arg();
        aligned = psi.scale(Complex64::from_polar(1.0, 0.5 * beta));
    }
    let omega: Vec<Complex64> = h
        .elements
        .iter()
        .map(|g| match (g.reflect, reflection) {
            (false, _) => rot_phase(g.rot),
            // g = s r with r = s g a rotation; omega_s = 1 after alignment
            (true, Some(s)) => rot_phase(s.compose(*g).rot).conj(),
            (true, None) => unreachable!(),
        })
        .collect();
    twisted_average(&aligned, h, &omega)
}

/// Projection of a perturbation `phi` onto the directions that keep the
/// `H`-symmetry of `base` (with the phases `base` carries).
pub fn project_along(phi: &OrderField, h: &Subgroup, base: &OrderField) -> Result<OrderField> {
    let omega = twist_from(base, h)?;
    twisted_average(phi, h, &omega)
}

/// `||g F(psi) - F(g psi)|| / max(1, ||F(psi)||)`.
pub fn equivariance_residual(g: impl Into<GroupElement>, psi: &OrderField, links: &LinkField) -> Result<f64> {
    let g = g.into();
    let f = residual(psi, links)?;
    let lhs = act(g, &f);
    let rhs = residual(&act(g, psi), links)?;
    Ok(lhs.sub(&rhs)?.norm() / f.norm().max(1.0))
}
