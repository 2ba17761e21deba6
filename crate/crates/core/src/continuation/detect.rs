use super::step::{arclength_step, tangent, Corrected, Tangent};
use super::{BifurcationKind, BifurcationPoint, BranchPoint, ContinuationSettings};
use crate::eigen::{cluster_around, stability, StabilityInfo};
use crate::error::{Error, Result};
use crate::glop::{residual_dmu, ExtendedState};
use crate::grid::{inner_real, OrderField};
use crate::symmetry::isotropy;

/// Above this `|<phi, d_mu F>| / ||d_mu F||` a crossing is a fold.
pub const FOLD_INDICATOR: f64 = 1e-3;

/// Fold indicator and kind of a crossing with the given critical fields.
pub fn classify(state: &ExtendedState, critical: &[OrderField]) -> Result<(f64, BifurcationKind)> {
    let dmu = residual_dmu(&state.psi, &state.links())?;
    let scale = dmu.norm().max(f64::MIN_POSITIVE);
    let mut ind = 0.0f64;
    for phi in critical {
        ind = ind.max(inner_real(phi, &dmu)?.abs() / (scale * phi.norm().max(f64::MIN_POSITIVE)));
    }
    let kind = if ind > FOLD_INDICATOR {
        BifurcationKind::Turning
    } else if critical.len() >= 2 {
        BifurcationKind::Double
    } else {
        BifurcationKind::SimplePitchfork
    };
    Ok((ind, kind))
}

fn eigen_count(settings: &ContinuationSettings, k: usize) -> usize {
    settings.eigen_count.max(k + 3)
}

/// Finds the arclength `s` in `(0, delta)` along `t` from `a` where the
/// `k`-th deflated eigenvalue vanishes. Regula falsi with the Illinois
/// modification, starting from the endpoint values `ga`, `gb`.
#[allow(clippy::too_many_arguments)]
pub fn locate_crossing(
    a: &ExtendedState,
    t: &Tangent,
    delta: f64,
    k: usize,
    ga: f64,
    gb: f64,
    warm: &[OrderField],
    settings: &ContinuationSettings,
) -> Result<(f64, Corrected, StabilityInfo)> {
    if !(ga * gb < 0.0) {
        return Err(Error::Continuation(format!("eigenvalue {k} does not change sign ({ga:.3e}, {gb:.3e})")));
    }
    let m = eigen_count(settings, k);
    let (mut s0, mut g0, mut s1, mut g1) = (0.0, ga, delta, gb);
    let mut side = 0i8;
    let mut best: Option<(f64, Corrected, StabilityInfo)> = None;
    let mut warm: Vec<OrderField> = warm.to_vec();
    for _ in 0..settings.locate_max_probes {
        let s = (s0 * g1 - s1 * g0) / (g1 - g0);
        let s = if s > s0.min(s1) && s < s0.max(s1) { s } else { 0.5 * (s0 + s1) };
        let c = arclength_step(a, t, s, settings, None)?;
        let links = c.state.links();
        let info = stability(&c.state.psi, &links, m, &settings.eigen, &warm, None)?;
        let g = *info
            .eigenvalues
            .get(k)
            .ok_or_else(|| Error::Continuation(format!("eigenvalue {k} not resolved at probe")))?;
        warm = info.eigenfields.clone();
        let done = g.abs() <= settings.locate_tol || (s1 - s0).abs() <= 1e-13 * delta.max(1.0);
        best = Some((s, c, info));
        if done {
            break;
        }
        if g * g1 < 0.0 {
            s0 = s1;
            g0 = g1;
            s1 = s;
            g1 = g;
            side = 0;
        } else {
            s1 = s;
            g1 = g;
            if side == -1 {
                g0 *= 0.5;
            }
            side = -1;
        }
    }
    best.ok_or_else(|| Error::Continuation("no localization probe".into()))
}

/// Locates every crossing of the stability index between consecutive points.
pub fn detect_bifurcation(
    a: &BranchPoint,
    b: &BranchPoint,
    settings: &ContinuationSettings,
    next_id: usize,
) -> Result<Vec<BifurcationPoint>> {
    let (na, nb) = (a.n_unstable(), b.n_unstable());
    if na == nb {
        return Ok(Vec::new());
    }
    let t = tangent(&a.state, &b.state, settings.w_mu)?;
    let aligned = super::step::phase_align(&b.state.psi, &a.state.psi)?;
    let delta = inner_real(&t.psi, &aligned.sub(&a.state.psi)?)? + settings.w_mu * t.mu * (b.mu() - a.mu());
    let (lo, hi) = (na.min(nb), na.max(nb));
    let mut out = Vec::new();
    let mut k = lo;
    while k < hi {
        let value_at = |p: &BranchPoint| -> Result<f64> {
            match p.stability.eigenvalues.get(k) {
                Some(v) => Ok(*v),
                None => {
                    let info = stability(
                        p.psi(),
                        &p.state.links(),
                        eigen_count(settings, k),
                        &settings.eigen,
                        &p.stability.eigenfields,
                        None,
                    )?;
                    Ok(info.eigenvalues[k])
                }
            }
        };
        let (ga, gb) = (value_at(a)?, value_at(b)?);
        let (s, c, info) = locate_crossing(&a.state, &t, delta, k, ga, gb, &a.stability.eigenfields, settings)?;
        let cluster = cluster_around(&info.eigenvalues, info.eigenvalues[k]);
        let cluster: Vec<usize> = if cluster.is_empty() { vec![k] } else { cluster };
        let fields: Vec<OrderField> = cluster.iter().map(|&i| info.eigenfields[i].clone()).collect();
        let (fold_indicator, kind) = classify(&c.state, &fields)?;
        out.push(BifurcationPoint {
            id: next_id + out.len(),
            mu: c.state.mu,
            arclength: a.arclength + s,
            isotropy: isotropy(&c.state.psi, settings.isotropy_tol)?,
            multiplicity: cluster.len(),
            kind,
            critical_values: cluster.iter().map(|&i| info.eigenvalues[i]).collect(),
            critical_fields: fields,
            state: c.state,
            n_unstable_before: na,
            n_unstable_after: nb,
            fold_indicator,
        });
        let last = cluster.iter().copied().max().unwrap_or(k);
        k = last.max(k) + 1;
    }
    Ok(out)
}
