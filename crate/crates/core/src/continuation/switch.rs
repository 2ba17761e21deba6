use num_complex::Complex64;

use super::{BifurcationKind, BifurcationPoint};
use crate::error::{Error, Result};
use crate::grid::OrderField;
use crate::symmetry::{project_along, IsotropyLabel, Subgroup};

/// Relative size below which a symmetry projection is treated as empty.
const PROJECTION_FLOOR: f64 = 1e-6;

/// A unit direction along which to leave a bifurcation point.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchGuess {
    pub direction: OrderField,
    /// Reflection subgroup selected for a double crossing.
    pub subgroup: Option<IsotropyLabel>,
    pub sign: f64,
}

fn unit(v: &OrderField) -> OrderField {
    v.scale(Complex64::new(1.0 / v.norm(), 0.0))
}

/// Candidate directions for the branches emanating from `bif`.
///
/// Simple crossings give `+-phi`. Double crossings give, for each of the
/// reflection subgroups `<sigma>` and `<sigma*rho>`, the largest projection
/// of the critical eigenspace onto the directions that keep that
/// reflection, with both signs.
pub fn switch_branch(bif: &BifurcationPoint) -> Result<Vec<SwitchGuess>> {
    let signs = [1.0, -1.0];
    match bif.kind {
        BifurcationKind::Turning => {
            Err(Error::Continuation(format!("point {} is a fold; there is no branch to switch to", bif.id)))
        }
        BifurcationKind::SimplePitchfork => {
            let phi = bif
                .critical_fields
                .first()
                .ok_or_else(|| Error::Continuation("no critical field".into()))?;
            Ok(signs
                .iter()
                .map(|&s| SwitchGuess { direction: unit(phi).scale(Complex64::new(s, 0.0)), subgroup: None, sign: s })
                .collect())
        }
        BifurcationKind::Double => {
            let mut out = Vec::new();
            for h in [Subgroup::sigma(), Subgroup::sigma_rho()] {
                let mut best: Option<OrderField> = None;
                for phi in &bif.critical_fields {
                    let p = project_along(phi, &h, &bif.state.psi)?;
                    let n = p.norm();
                    if n > PROJECTION_FLOOR * phi.norm() && best.as_ref().is_none_or(|b| n > b.norm()) {
                        best = Some(p);
                    }
                }
                if let Some(p) = best {
                    for &s in &signs {
                        out.push(SwitchGuess {
                            direction: unit(&p).scale(Complex64::new(s, 0.0)),
                            subgroup: Some(h.label),
                            sign: s,
                        });
                    }
                }
            }
            if out.is_empty() {
                return Err(Error::Continuation(format!(
                    "critical space at point {} has no reflection-invariant direction",
                    bif.id
                )));
            }
            Ok(out)
        }
    }
}
