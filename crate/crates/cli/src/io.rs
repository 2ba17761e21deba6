//! File formats: branch tables, complex field dumps, graymap patterns.
//!
//! Floats are written with 17 significant digits so that reading a file back
//! reproduces every value exactly.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use glv_core::continuation::{BifurcationPoint, Branch};
use glv_core::{Grid, OrderField};
use num_complex::Complex64;

pub const BRANCH_HEADER: &str = "arclength,mu,energy,eta,norm_psi,n_unstable,isotropy_label,total_vorticity";

pub fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `contents` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = path.file_name().ok_or_else(|| anyhow!("{} has no file name", path.display()))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming onto {}", path.display()))?;
    Ok(())
}

/// One row per branch point, in the column order of [`BRANCH_HEADER`].
pub fn branch_csv(branch: &Branch) -> String {
    let mut s = String::from(BRANCH_HEADER);
    s.push('\n');
    for p in &branch.points {
        let vort = p.total_vorticity.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            fmt_f(p.arclength),
            fmt_f(p.mu()),
            fmt_f(p.energy),
            fmt_f(p.state.eta),
            fmt_f(p.psi().norm()),
            p.n_unstable(),
            p.isotropy,
            vort
        );
    }
    s
}

pub fn write_branch(branch: &Branch, path: &Path) -> Result<()> {
    write_atomic(path, branch_csv(branch).as_bytes())
}

pub const BIFURCATION_HEADER: &str =
    "branch,id,mu,arclength,multiplicity,kind,isotropy,n_unstable_before,n_unstable_after,fold_indicator,critical_values";

pub fn bifurcation_rows(branch: &Branch) -> String {
    let mut s = String::new();
    for b in &branch.bifurcations {
        let vals: Vec<String> = b.critical_values.iter().map(|v| fmt_f(*v)).collect();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            branch.label,
            b.id,
            fmt_f(b.mu),
            fmt_f(b.arclength),
            b.multiplicity,
            b.kind.as_str(),
            b.isotropy,
            b.n_unstable_before,
            b.n_unstable_after,
            fmt_f(b.fold_indicator),
            vals.join(";")
        );
    }
    s
}

/// Complex field dump with a metadata comment line.
pub fn field_csv(psi: &OrderField, mu: f64) -> String {
    let g = psi.grid();
    let mut s = format!("# d={:?} n={} mu={:?}\ni,j,re,im\n", g.d(), g.n(), mu);
    for (p, z) in psi.values().iter().enumerate() {
        let (i, j) = g.coords(p);
        let _ = writeln!(s, "{i},{j},{},{}", fmt_f(z.re), fmt_f(z.im));
    }
    s
}

pub fn write_field(psi: &OrderField, mu: f64, path: &Path) -> Result<()> {
    write_atomic(path, field_csv(psi, mu).as_bytes())
}

/// Reads a field dump; returns the field and the stored `mu`.
pub fn read_field(path: &Path) -> Result<(OrderField, f64)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    let meta = lines.next().ok_or_else(|| anyhow!("{} is empty", path.display()))?;
    let get = |key: &str| -> Result<&str> {
        meta.split_whitespace()
            .find_map(|t| t.strip_prefix(key))
            .ok_or_else(|| anyhow!("missing {key} in {meta:?}"))
    };
    let d: f64 = get("d=")?.parse()?;
    let n: usize = get("n=")?.parse()?;
    let mu: f64 = get("mu=")?.parse()?;
    if lines.next() != Some("i,j,re,im") {
        bail!("{} is not a field dump", path.display());
    }
    let grid = Grid::new(d, n)?;
    let mut values = vec![Complex64::new(f64::NAN, f64::NAN); grid.len()];
    let mut seen = 0usize;
    for l in lines.filter(|l| !l.is_empty()) {
        let c: Vec<&str> = l.split(',').collect();
        if c.len() != 4 {
            bail!("malformed row {l:?}");
        }
        let (i, j): (i64, i64) = (c[0].parse()?, c[1].parse()?);
        grid.check_index(i)?;
        grid.check_index(j)?;
        values[grid.index(i, j)] = Complex64::new(c[2].parse()?, c[3].parse()?);
        seen += 1;
    }
    if seen != grid.len() {
        bail!("{} has {seen} nodes, expected {}", path.display(), grid.len());
    }
    Ok((OrderField::from_values(grid, values)?, mu))
}

fn pgm(psi: &OrderField, level: impl Fn(Complex64) -> f64) -> String {
    let g = psi.grid();
    let half = g.half();
    let side = g.side();
    let mut s = format!("P2\n{side} {side}\n255\n");
    for j in (-half..=half).rev() {
        let row: Vec<String> = (-half..=half)
            .map(|i| {
                let v = level(psi.at(i, j)).clamp(0.0, 1.0);
                ((v * 255.0).round() as u8).to_string()
            })
            .collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

/// Writes `<prefix>_amp.pgm` (|psi|^2, 1 is white), `<prefix>_phase.pgm`
/// (arg psi from -pi to pi) and `<prefix>.csv`.
pub fn write_pattern(psi: &OrderField, mu: f64, prefix: &Path) -> Result<Vec<PathBuf>> {
    let with = |suffix: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    let amp = with("_amp.pgm");
    let phase = with("_phase.pgm");
    let csv = with(".csv");
    write_atomic(&amp, pgm(psi, |z| z.norm_sqr()).as_bytes())?;
    let tau = std::f64::consts::TAU;
    write_atomic(&phase, pgm(psi, |z| (z.arg() + 0.5 * tau) / tau).as_bytes())?;
    write_field(psi, mu, &csv)?;
    Ok(vec![amp, phase, csv])
}

/// Metadata of a stored bifurcation point.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StoredBifurcation {
    pub id: usize,
    pub mu: f64,
    pub eta: f64,
    pub arclength: f64,
    pub multiplicity: usize,
    pub kind: glv_core::continuation::BifurcationKind,
    pub isotropy: String,
    pub n_unstable_before: usize,
    pub n_unstable_after: usize,
    pub fold_indicator: f64,
    pub critical_values: Vec<f64>,
}

fn bif_stem(dir: &Path, branch: &str, id: usize) -> PathBuf {
    dir.join(format!("bif_{branch}_{id}"))
}

/// Stores the state and critical fields of `b` so a later run can switch.
pub fn write_bifurcation(dir: &Path, branch: &str, b: &BifurcationPoint) -> Result<()> {
    let stem = bif_stem(dir, branch, b.id);
    let meta = StoredBifurcation {
        id: b.id,
        mu: b.mu,
        eta: b.state.eta,
        arclength: b.arclength,
        multiplicity: b.multiplicity,
        kind: b.kind,
        isotropy: b.isotropy.to_string(),
        n_unstable_before: b.n_unstable_before,
        n_unstable_after: b.n_unstable_after,
        fold_indicator: b.fold_indicator,
        critical_values: b.critical_values.clone(),
    };
    write_atomic(&stem.with_extension("json"), serde_json::to_string_pretty(&meta)?.as_bytes())?;
    write_field(&b.state.psi, b.mu, &PathBuf::from(format!("{}_state.csv", stem.display())))?;
    for (k, phi) in b.critical_fields.iter().enumerate() {
        write_field(phi, b.mu, &PathBuf::from(format!("{}_phi{k}.csv", stem.display())))?;
    }
    Ok(())
}

pub fn read_bifurcation(dir: &Path, branch: &str, id: usize) -> Result<BifurcationPoint> {
    let stem = bif_stem(dir, branch, id);
    let meta_path = stem.with_extension("json");
    let meta: StoredBifurcation = serde_json::from_str(
        &fs::read_to_string(&meta_path).with_context(|| format!("reading {}", meta_path.display()))?,
    )?;
    let (psi, mu) = read_field(&PathBuf::from(format!("{}_state.csv", stem.display())))?;
    let mut fields = Vec::new();
    for k in 0..meta.multiplicity {
        fields.push(read_field(&PathBuf::from(format!("{}_phi{k}.csv", stem.display())))?.0);
    }
    let isotropy = glv_core::IsotropyLabel::parse(&meta.isotropy)
        .ok_or_else(|| anyhow!("unknown isotropy label {:?}", meta.isotropy))?;
    Ok(BifurcationPoint {
        id: meta.id,
        mu,
        arclength: meta.arclength,
        state: glv_core::ExtendedState { psi, eta: meta.eta, mu },
        multiplicity: meta.multiplicity,
        kind: meta.kind,
        critical_values: meta.critical_values,
        critical_fields: fields,
        isotropy,
        n_unstable_before: meta.n_unstable_before,
        n_unstable_after: meta.n_unstable_after,
        fold_indicator: meta.fold_indicator,
    })
}
