//! Localized modes of a finite line defect: N sites (p, 0), p = 0..N−1, of mass r.
//!
//! The solvability condition det[I − (1−r)ω²G(ω)] = 0 is solved branch by branch
//! on the eigenvalues ν(ω) of ω²G(ω). G is symmetric Toeplitz and therefore
//! centrosymmetric, so it splits exactly into a symmetric and a skew block; each
//! block's sorted eigenvalues decrease monotonically in ω.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{edge_correction, DEFAULT_K_MAX};
use crate::error::{Error, Result};
use crate::greens::{greens_auto, greens_row_recurrence, GreensIndex};
use crate::specfun::digamma;
use crate::FrequencyPoint;

pub const MAX_DEFECTS: usize = 64;
/// Lower end of the root search, √8 + OFFSET.
pub const EDGE_OFFSET: f64 = 1e-6;
pub const BISECT_WIDTH: f64 = 1e-10;
const DEGENERATE_GAP: f64 = 1e-8;
pub const RESIDUAL_TOL: f64 = 1e-8;

/// N defect sites of mass ratio r ∈ (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefectConfig {
    n_defects: usize,
    mass_ratio: f64,
}

impl DefectConfig {
    pub fn new(n_defects: usize, mass_ratio: f64) -> Result<Self> {
        if !(1..=MAX_DEFECTS).contains(&n_defects) {
            return Err(Error::InvalidParameter(format!(
                "number of defects must be in 1..={MAX_DEFECTS}, got {n_defects}"
            )));
        }
        if !(mass_ratio > 0.0 && mass_ratio < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "mass ratio must lie in (0, 1), got {mass_ratio}"
            )));
        }
        Ok(Self { n_defects, mass_ratio })
    }

    pub fn n_defects(&self) -> usize {
        self.n_defects
    }

    pub fn mass_ratio(&self) -> f64 {
        self.mass_ratio
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    Symmetric,
    SkewSymmetric,
}

/// Toeplitz generator g(0,0,j; ω), j = 0..N−1.
#[derive(Debug, Clone, PartialEq)]
pub struct GreensMatrix {
    pub size: usize,
    pub entries: Vec<f64>,
    pub omega: FrequencyPoint,
}

impl GreensMatrix {
    pub fn full(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.size, self.size, |i, j| self.entries[i.abs_diff(j)])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSolution {
    pub omega: f64,
    pub eigenvector: Vec<f64>,
    pub symmetry: Symmetry,
    pub branch_index: usize,
    pub residual: f64,
    #[serde(default)]
    pub degenerate: bool,
}

/// Displacements over [−W₁, N−1+W₁] × [−W₂, W₂]; `values[row][col]` with
/// row = n₂ + W₂ and col = n₁ + W₁.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldGrid {
    pub window: (usize, usize),
    pub n_defects: usize,
    pub values: Vec<Vec<f64>>,
}

impl FieldGrid {
    pub fn get(&self, n1: i64, n2: i64) -> Option<f64> {
        let (w1, w2) = (self.window.0 as i64, self.window.1 as i64);
        let row = usize::try_from(n2 + w2).ok()?;
        let col = usize::try_from(n1 + w1).ok()?;
        self.values.get(row)?.get(col).copied()
    }

    pub fn n1_range(&self) -> std::ops::RangeInclusive<i64> {
        let w1 = self.window.0 as i64;
        -w1..=(self.n_defects as i64 - 1 + w1)
    }

    pub fn n2_range(&self) -> std::ops::RangeInclusive<i64> {
        let w2 = self.window.1 as i64;
        -w2..=w2
    }
}

/// Toeplitz generator via the row recurrence, falling back to direct evaluation.
pub fn assemble_greens_matrix(n_defects: usize, f: FrequencyPoint) -> Result<GreensMatrix> {
    if n_defects == 0 {
        return Err(Error::InvalidParameter("empty defect".into()));
    }
    let entries = match greens_row_recurrence(n_defects - 1, f) {
        Ok(row) => row,
        Err(Error::Instability { .. }) => (0..n_defects)
            .into_par_iter()
            .map(|j| greens_auto(GreensIndex::new(j as i64, 0), f))
            .collect::<Result<Vec<_>>>()?,
        Err(e) => return Err(e),
    };
    Ok(GreensMatrix {
        size: n_defects,
        entries,
        omega: f,
    })
}

/// det[I − (1−r)ω²G(ω)].
pub fn solvability_determinant(cfg: &DefectConfig, f: FrequencyPoint) -> Result<f64> {
    let g = assemble_greens_matrix(cfg.n_defects, f)?;
    let n = cfg.n_defects;
    let scale = (1.0 - cfg.mass_ratio) * f.omega2();
    let a = DMatrix::identity(n, n) - g.full() * scale;
    Ok(a.determinant())
}

/// Orthonormal bases of the symmetric (JU = U) and skew (JU = −U) subspaces.
fn parity_bases(n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let h = n / 2;
    let ns = n - h;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut qs = DMatrix::zeros(n, ns);
    let mut qa = DMatrix::zeros(n, h);
    for i in 0..h {
        qs[(i, i)] = s;
        qs[(n - 1 - i, i)] = s;
        qa[(i, i)] = s;
        qa[(n - 1 - i, i)] = -s;
    }
    if n % 2 == 1 {
        qs[(h, h)] = 1.0;
    }
    (qs, qa)
}

struct ClassSpectrum {
    nu: Vec<f64>,
    vectors: DMatrix<f64>,
}

// Eigenvalues of ω² QᵀGQ, ascending, with eigenvectors in the full space.
fn class_spectrum(gfull: &DMatrix<f64>, q: &DMatrix<f64>, omega2: f64) -> ClassSpectrum {
    if q.ncols() == 0 {
        return ClassSpectrum {
            nu: vec![],
            vectors: DMatrix::zeros(q.nrows(), 0),
        };
    }
    let block = q.transpose() * gfull * q * omega2;
    let block = (&block + block.transpose()) * 0.5;
    let eig = SymmetricEigen::new(block);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let nu = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let cols: Vec<DVector<f64>> = order.iter().map(|&i| q * eig.eigenvectors.column(i)).collect();
    ClassSpectrum {
        nu,
        vectors: DMatrix::from_columns(&cols),
    }
}

fn spectra(
    n: usize,
    bases: &(DMatrix<f64>, DMatrix<f64>),
    f: FrequencyPoint,
) -> Result<(ClassSpectrum, ClassSpectrum, DMatrix<f64>)> {
    let g = assemble_greens_matrix(n, f)?.full();
    let s = class_spectrum(&g, &bases.0, f.omega2());
    let a = class_spectrum(&g, &bases.1, f.omega2());
    Ok((s, a, g))
}

fn class_nu(
    n: usize,
    bases: &(DMatrix<f64>, DMatrix<f64>),
    f: FrequencyPoint,
    class: Symmetry,
    i: usize,
) -> Result<f64> {
    let (s, a, _) = spectra(n, bases, f)?;
    Ok(match class {
        Symmetry::Symmetric => s.nu[i],
        Symmetry::SkewSymmetric => a.nu[i],
    })
}

fn normalize_sign(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= norm;
    }
    if let Some(&first) = v.iter().find(|x| x.abs() > 1e-6) {
        if first < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    }
}

/// Search interval for mode frequencies, (√8 + 1e-6, √(8/r)).
pub fn search_interval(r: f64) -> (f64, f64) {
    (8f64.sqrt() + EDGE_OFFSET, (8.0 / r).sqrt())
}

/// All localized modes of the configuration, ascending in ω.
pub fn find_modes(cfg: &DefectConfig) -> Result<Vec<ModeSolution>> {
    let n = cfg.n_defects;
    let r = cfg.mass_ratio;
    let bases = parity_bases(n);
    let (lo, hi) = search_interval(r);

    // coarse scan, geometric in ω² − 8 so the edge region is resolved
    let w2_lo = lo * lo;
    let w2_hi = hi * hi;
    let n_scan = 48;
    let grid: Vec<f64> = (0..=n_scan)
        .map(|i| {
            let x = i as f64 / n_scan as f64;
            let w2 = 8.0 + (w2_lo - 8.0) * ((w2_hi - 8.0) / (w2_lo - 8.0)).powf(x);
            if i == n_scan {
                hi
            } else if i == 0 {
                lo
            } else {
                w2.sqrt()
            }
        })
        .collect();
    let scan: Vec<(Vec<f64>, Vec<f64>)> = grid
        .par_iter()
        .map(|&w| {
            let f = FrequencyPoint::new(w)?;
            let (s, a, _) = spectra(n, &bases, f)?;
            Ok((s.nu, a.nu))
        })
        .collect::<Result<Vec<_>>>()?;

    let h = |nu: f64| (1.0 - r) * nu - 1.0;
    let mut jobs = Vec::new();
    for (class, count) in [(Symmetry::Symmetric, n - n / 2), (Symmetry::SkewSymmetric, n / 2)] {
        for i in 0..count {
            let val = |k: usize| match class {
                Symmetry::Symmetric => h(scan[k].0[i]),
                Symmetry::SkewSymmetric => h(scan[k].1[i]),
            };
            if val(0) <= 0.0 {
                continue; // branch never reaches r at the edge
            }
            if val(n_scan) >= 0.0 {
                return Err(Error::Bracket {
                    branch: i + 1,
                    detail: format!("{class:?} block still above threshold at omega = {hi}"),
                });
            }
            let k = (0..n_scan)
                .find(|&k| val(k) > 0.0 && val(k + 1) <= 0.0)
                .ok_or(Error::Bracket {
                    branch: i + 1,
                    detail: "no sign change on the scan grid".into(),
                })?;
            jobs.push((class, i, grid[k], grid[k + 1], val(k), val(k + 1)));
        }
    }

    let roots: Vec<ModeSolution> = jobs
        .par_iter()
        .map(|&(class, i, a, b, fa, fb)| refine_root(cfg, &bases, class, i, (a, fa), (b, fb)))
        .collect::<Result<Vec<_>>>()?;

    let mut roots = roots;
    roots.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    let count = roots.len();
    for k in 0..count {
        roots[k].branch_index = n - count + k + 1;
        if k + 1 < count && roots[k + 1].omega - roots[k].omega < DEGENERATE_GAP {
            roots[k].degenerate = true;
            roots[k + 1].degenerate = true;
        }
    }
    Ok(roots)
}

fn refine_root(
    cfg: &DefectConfig,
    bases: &(DMatrix<f64>, DMatrix<f64>),
    class: Symmetry,
    i: usize,
    (mut a, mut fa): (f64, f64),
    (mut b, mut fb): (f64, f64),
) -> Result<ModeSolution> {
    let n = cfg.n_defects;
    let r = cfg.mass_ratio;
    let eval = |w: f64| -> Result<f64> { Ok((1.0 - r) * class_nu(n, bases, FrequencyPoint::new(w)?, class, i)? - 1.0) };
    while b - a > BISECT_WIDTH {
        let m = 0.5 * (a + b);
        let fm = eval(m)?;
        if fm > 0.0 {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    // secant polish inside the bracket
    let mut w = a - fa * (b - a) / (fb - fa);
    for _ in 0..4 {
        let fw = eval(w)?;
        if fw.abs() < 1e-14 {
            break;
        }
        if fw > 0.0 {
            a = w;
            fa = fw;
        } else {
            b = w;
            fb = fw;
        }
        if fb == fa {
            break;
        }
        w = a - fa * (b - a) / (fb - fa);
    }
    let f = FrequencyPoint::new(w)?;
    let (s, k, g) = spectra(n, bases, f)?;
    let spec = match class {
        Symmetry::Symmetric => s,
        Symmetry::SkewSymmetric => k,
    };
    let mut u: Vec<f64> = spec.vectors.column(i).iter().copied().collect();
    normalize_sign(&mut u);
    let uv = DVector::from_vec(u.clone());
    let res = &uv - &g * &uv * ((1.0 - r) * f.omega2());
    let residual = res.amax();
    if residual > RESIDUAL_TOL {
        return Err(Error::Bracket {
            branch: i + 1,
            detail: format!("residual {residual:e} after refinement"),
        });
    }
    Ok(ModeSolution {
        omega: w,
        eigenvector: u,
        symmetry: class,
        branch_index: 0,
        residual,
        degenerate: false,
    })
}

/// Branch values r_{N,i}(ω) on a frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchTable {
    pub n_defects: usize,
    pub omegas: Vec<f64>,
    /// `values[g][i]` is r_{N,i+1} at `omegas[g]`, absent where the root leaves (0, 1).
    pub values: Vec<Vec<Option<f64>>>,
    pub symmetry: Vec<Vec<Option<Symmetry>>>,
}

/// Roots r ∈ (0,1) of det[I − (1−r)ω²G] = 0 at each grid frequency: r_i = 1 − 1/ν_i.
pub fn r_of_omega_branches(n_defects: usize, omega_grid: &[FrequencyPoint]) -> Result<BranchTable> {
    if !(1..=MAX_DEFECTS).contains(&n_defects) {
        return Err(Error::InvalidParameter(format!("N = {n_defects} out of range")));
    }
    let bases = parity_bases(n_defects);
    type Row = (Vec<Option<f64>>, Vec<Option<Symmetry>>);
    let rows: Vec<Row> = omega_grid
        .par_iter()
        .map(|&f| {
            let (s, a, _) = spectra(n_defects, &bases, f)?;
            let mut all: Vec<(f64, Symmetry)> =
                s.nu.iter()
                    .map(|&v| (v, Symmetry::Symmetric))
                    .chain(a.nu.iter().map(|&v| (v, Symmetry::SkewSymmetric)))
                    .collect();
            all.sort_by(|x, y| x.0.total_cmp(&y.0));
            let roots: Vec<(f64, Symmetry)> = all
                .into_iter()
                .filter(|&(v, _)| v > 1.0)
                .map(|(v, c)| (1.0 - 1.0 / v, c))
                .collect();
            let mut vals = vec![None; n_defects];
            let mut cls = vec![None; n_defects];
            let off = n_defects - roots.len();
            for (k, (rv, c)) in roots.into_iter().enumerate() {
                vals[off + k] = Some(rv);
                cls[off + k] = Some(c);
            }
            Ok((vals, cls))
        })
        .collect::<Result<Vec<_>>>()?;
    let (values, symmetry) = rows.into_iter().unzip();
    Ok(BranchTable {
        n_defects,
        omegas: omega_grid.iter().map(|f| f.omega()).collect(),
        values,
        symmetry,
    })
}

/// β_m in g(m,0) ≈ (−1)^m/(4π)[−log(1−4/α²) + β_m] as α → 2.
pub fn edge_beta(m: usize) -> f64 {
    let g = crate::scalar::EULER_GAMMA;
    let psi = digamma((1.0 + m as f64) / 2.0).expect("positive argument");
    let c = if m == 0 {
        0.0
    } else {
        edge_correction::<f64>(m as u32, 0, DEFAULT_K_MAX).value
    };
    -2.0 * g - 2.0 * psi + c
}

/// lim_{ω²→8⁺} r_{N,branch}(ω).
///
/// At the edge ω²G = (2/π) D[−L·11ᵀ + B]D + o(1) with D = diag((−1)^p),
/// B_ij = β_|i−j| and L → −∞. The rank-one singular part sends the top branch to 1;
/// the others converge to 1 − 1/ν with ν the eigenvalues of (2/π)B restricted to 1⊥.
pub fn branch_band_edge_limit(n_defects: usize, branch: usize) -> Result<f64> {
    if !(1..=MAX_DEFECTS).contains(&n_defects) || !(1..=n_defects).contains(&branch) {
        return Err(Error::InvalidParameter(format!(
            "branch {branch} invalid for N = {n_defects}"
        )));
    }
    if branch == n_defects {
        return Ok(1.0);
    }
    let n = n_defects;
    let beta: Vec<f64> = (0..n).map(edge_beta).collect();
    let b = DMatrix::from_fn(n, n, |i, j| beta[i.abs_diff(j)]);
    // Helmert basis of the complement of the ones vector
    let w = DMatrix::from_fn(n, n - 1, |i, k| {
        let kk = (k + 1) as f64;
        let norm = (kk * (kk + 1.0)).sqrt();
        if i <= k {
            1.0 / norm
        } else if i == k + 1 {
            -kk / norm
        } else {
            0.0
        }
    });
    let c = w.transpose() * b * &w * (2.0 / std::f64::consts::PI);
    let c = (&c + c.transpose()) * 0.5;
    let mut nu: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
    nu.sort_by(f64::total_cmp);
    let v = nu[branch - 1];
    if !(v > 0.0) {
        return Err(Error::Extrapolation(format!("edge eigenvalue {v} is not positive")));
    }
    Ok(1.0 - 1.0 / v)
}

/// The closed form printed for the second triplet branch limit, 7/8 − (8 − 4π)⁻¹.
/// It exceeds 1 and disagrees with the computed limit; kept for side-by-side reports.
pub fn printed_triplet_second_limit() -> f64 {
    7.0 / 8.0 - 1.0 / (8.0 - 4.0 * std::f64::consts::PI)
}

fn check_mode(cfg: &DefectConfig, mode: &ModeSolution) -> Result<FrequencyPoint> {
    if mode.eigenvector.len() != cfg.n_defects {
        return Err(Error::InvalidParameter("eigenvector length does not match N".into()));
    }
    if !(mode.residual <= RESIDUAL_TOL) {
        return Err(Error::InvalidParameter(format!(
            "mode residual {:e} exceeds {RESIDUAL_TOL:e}",
            mode.residual
        )));
    }
    FrequencyPoint::new(mode.omega)
}

/// u_n = (1−r)ω² Σ_p u_{p,0} g(n₁ − p, n₂) over the window.
pub fn reconstruct_field(cfg: &DefectConfig, mode: &ModeSolution, window: (usize, usize)) -> Result<FieldGrid> {
    let f = check_mode(cfg, mode)?;
    let n = cfg.n_defects as i64;
    let (w1, w2) = (window.0 as i64, window.1 as i64);
    let mut wanted: Vec<(u32, u32)> = Vec::new();
    for n2 in 0..=w2 {
        for d in 0..=(n - 1 + w1) {
            wanted.push(GreensIndex::new(d, n2).canonical());
        }
    }
    wanted.sort_unstable();
    wanted.dedup();
    let vals = wanted
        .par_iter()
        .map(|&(a, b)| greens_auto(GreensIndex::new(a as i64, b as i64), f))
        .collect::<Result<Vec<_>>>()?;
    let cache: HashMap<(u32, u32), f64> = wanted.into_iter().zip(vals).collect();
    let scale = (1.0 - cfg.mass_ratio) * f.omega2();
    let values = (-w2..=w2)
        .map(|n2| {
            (-w1..=(n - 1 + w1))
                .map(|n1| {
                    scale
                        * mode
                            .eigenvector
                            .iter()
                            .enumerate()
                            .map(|(p, &u)| u * cache[&GreensIndex::new(n1 - p as i64, n2).canonical()])
                            .sum::<f64>()
                })
                .collect()
        })
        .collect();
    Ok(FieldGrid {
        window,
        n_defects: cfg.n_defects,
        values,
    })
}

/// Net force F = Σ_p (u_{p−1,0} + u_{p+1,0} + 2u_{p,1}) exerted by the inclusion.
pub fn total_force(cfg: &DefectConfig, mode: &ModeSolution) -> Result<f64> {
    let grid = reconstruct_field(cfg, mode, (1, 1))?;
    let n = cfg.n_defects as i64;
    let mut total = 0.0;
    for p in 0..n {
        let at = |a, b| grid.get(a, b).expect("inside window");
        total += at(p - 1, 0) + at(p + 1, 0) + 2.0 * at(p, 1);
    }
    Ok(total)
}

/// Eigenfrequencies of an isolated chain of N masses r*: ω_j² = (4 − 2cos(jπ/(N+1)))/r*.
pub fn isolated_chain_frequencies(n_defects: usize, r_star: f64) -> Result<Vec<f64>> {
    if !(r_star > 0.0) {
        return Err(Error::InvalidParameter(format!("r* must be positive, got {r_star}")));
    }
    Ok(chain_levels(n_defects)
        .into_iter()
        .map(|l| (l / r_star).sqrt())
        .collect())
}

/// Mass ratios r* at which the isolated chain resonates at ω, ascending.
pub fn isolated_chain_mass_ratios(n_defects: usize, omega: f64) -> Vec<f64> {
    chain_levels(n_defects)
        .into_iter()
        .map(|l| l / (omega * omega))
        .collect()
}

fn chain_levels(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|j| 4.0 - 2.0 * (j as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::elliptic_k;
    use std::f64::consts::PI;

    fn cfg(n: usize, r: f64) -> DefectConfig {
        DefectConfig::new(n, r).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(DefectConfig::new(0, 0.5).is_err());
        assert!(DefectConfig::new(65, 0.5).is_err());
        assert!(DefectConfig::new(2, 1.0).is_err());
        assert!(DefectConfig::new(2, 0.0).is_err());
    }

    #[test]
    fn matrix_entries_closed_forms() {
        let f = FrequencyPoint::from_omega2(10.0).unwrap();
        let k = elliptic_k(4.0 / 9.0).unwrap();
        let g = assemble_greens_matrix(3, f).unwrap();
        assert!((g.entries[0] - k / (3.0 * PI)).abs() < 1e-14);
        assert!((g.entries[1] - (0.25 - k / (2.0 * PI))).abs() < 1e-14);
        let e = crate::specfun::elliptic_e(4.0 / 9.0).unwrap();
        assert!((g.entries[2] - (g.entries[0] - 1.5 + 3.0 / PI * e)).abs() < 1e-14);
        let full = g.full();
        assert_eq!(full, full.transpose());
        // centrosymmetric
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(full[(i, j)], full[(2 - i, 2 - j)]);
            }
        }
    }

    #[test]
    fn determinant_behaviour() {
        let f = FrequencyPoint::from_omega2(10.0).unwrap();
        let near_one = solvability_determinant(&cfg(3, 1.0 - 1e-12), f).unwrap();
        assert!((near_one - 1.0).abs() < 1e-10);
        let d1 = solvability_determinant(&cfg(1, 0.8), FrequencyPoint::new(2.83).unwrap()).unwrap();
        let d2 = solvability_determinant(&cfg(1, 0.8), FrequencyPoint::new(2.832).unwrap()).unwrap();
        assert!(d1 * d2 < 0.0);
        let between = solvability_determinant(&cfg(2, 0.49), FrequencyPoint::new(3.1).unwrap()).unwrap();
        assert!(between.abs() > 1e-3);
    }

    #[test]
    fn single_defect_mode() {
        let modes = find_modes(&cfg(1, 0.8)).unwrap();
        assert_eq!(modes.len(), 1);
        // frozen from an independent scipy solve of (1−r)ω²g(0,0) = 1
        assert!((modes[0].omega - 2.83063).abs() < 1e-5);
        assert_eq!(modes[0].eigenvector, vec![1.0]);
    }

    #[test]
    fn pair_and_triplet_modes() {
        let pair = find_modes(&cfg(2, 0.49)).unwrap();
        let w: Vec<f64> = pair.iter().map(|m| m.omega).collect();
        assert!(
            (w[0] - 2.837322).abs() < 1e-5 && (w[1] - 3.350851).abs() < 1e-5,
            "{w:?}"
        );
        assert_eq!(pair[0].symmetry, Symmetry::Symmetric);
        assert_eq!(pair[1].symmetry, Symmetry::SkewSymmetric);

        let trip = find_modes(&cfg(3, 0.4)).unwrap();
        let w: Vec<f64> = trip.iter().map(|m| m.omega).collect();
        for (got, want) in w.iter().zip([2.834441, 3.337615, 3.774484]) {
            assert!((got - want).abs() < 1e-5, "{w:?}");
        }
        let classes: Vec<Symmetry> = trip.iter().map(|m| m.symmetry).collect();
        assert_eq!(
            classes,
            [Symmetry::Symmetric, Symmetry::SkewSymmetric, Symmetry::Symmetric]
        );
        for m in trip.iter().chain(pair.iter()) {
            assert!(m.residual <= RESIDUAL_TOL);
            let norm: f64 = m.eigenvector.iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            let n = m.eigenvector.len();
            let sgn = if m.symmetry == Symmetry::Symmetric { 1.0 } else { -1.0 };
            for p in 0..n {
                assert!((m.eigenvector[n - 1 - p] - sgn * m.eigenvector[p]).abs() < 1e-8);
            }
        }
        assert_eq!(trip.iter().map(|m| m.branch_index).collect::<Vec<_>>(), [1, 2, 3]);
    }

    #[test]
    fn missing_low_branches_shift_labels() {
        // r above the lowest pair branch limit (1/2): only the skew mode survives
        let modes = find_modes(&cfg(2, 0.6)).unwrap();
        assert_eq!(modes.len(), 1);
        assert_eq!(modes[0].symmetry, Symmetry::SkewSymmetric);
        assert_eq!(modes[0].branch_index, 2);
    }

    #[test]
    fn single_branch_closed_form() {
        // r_{1,1} = 1 + π(2/ω² − 1/2)/K(16/(ω²−4)²)
        let grid: Vec<FrequencyPoint> = [8.5, 10.0, 20.0, 100.0]
            .iter()
            .map(|&w2| FrequencyPoint::from_omega2(w2).unwrap())
            .collect();
        let t = r_of_omega_branches(1, &grid).unwrap();
        for (g, f) in grid.iter().enumerate() {
            let w2 = f.omega2();
            let want = 1.0 + PI * (2.0 / w2 - 0.5) / elliptic_k(16.0 / (w2 - 4.0).powi(2)).unwrap();
            assert!((t.values[g][0].unwrap() - want).abs() < 1e-12);
        }
        assert!((t.values[3][0].unwrap() * 100.0 - 4.0).abs() < 0.1);
    }

    #[test]
    fn pair_branches_closed_form() {
        // r_{2,1/2} = 1 − 1/(ω²(g₀ ± g₁)) with the lower one symmetric
        let f = FrequencyPoint::from_omega2(10.0).unwrap();
        let t = r_of_omega_branches(2, &[f]).unwrap();
        let k = elliptic_k(4.0 / 9.0).unwrap();
        let (g0, g1) = (k / (3.0 * PI), 0.25 - k / (2.0 * PI));
        let lo = 1.0 - 1.0 / (10.0 * (g0 + g1));
        let hi = 1.0 - 1.0 / (10.0 * (g0 - g1));
        assert!((t.values[0][0].unwrap() - lo).abs() < 1e-12);
        assert!((t.values[0][1].unwrap() - hi).abs() < 1e-12);
        assert_eq!(t.symmetry[0][0], Some(Symmetry::Symmetric));
    }

    #[test]
    fn edge_limits_exact() {
        assert!((branch_band_edge_limit(1, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!((branch_band_edge_limit(2, 1).unwrap() - 0.5).abs() < 1e-9);
        assert!((branch_band_edge_limit(3, 1).unwrap() - (1.0 - 3.0 * PI / 16.0)).abs() < 1e-8);
        let skew = 1.0 - PI / (8.0 * (PI - 2.0));
        assert!((branch_band_edge_limit(3, 2).unwrap() - skew).abs() < 1e-9);
        assert!(printed_triplet_second_limit() > 1.0);
        assert!(branch_band_edge_limit(3, 4).is_err());
    }

    #[test]
    fn edge_limits_agree_with_near_edge_sweep() {
        // finite branches creep toward the limit like 1/|log ε|; fit r = r* + A/|log ε|
        let eps = [1e-6, 1e-9];
        let vals: Vec<Vec<f64>> = eps
            .iter()
            .map(|&e| {
                let f = FrequencyPoint::from_omega2(8.0 + e).unwrap();
                r_of_omega_branches(3, &[f]).unwrap().values[0]
                    .iter()
                    .map(|v| v.unwrap())
                    .collect()
            })
            .collect();
        let s: Vec<f64> = eps.iter().map(|e| 1.0 / e.ln().abs()).collect();
        let lim = branch_band_edge_limit(3, 1).unwrap();
        let extrap = vals[1][0] - s[1] * (vals[0][0] - vals[1][0]) / (s[0] - s[1]);
        assert!((extrap - lim).abs() < 5e-3, "{extrap} vs {lim}");
        // the decoupled skew branch converges fast
        assert!((vals[1][1] - branch_band_edge_limit(3, 2).unwrap()).abs() < 1e-4);
    }

    #[test]
    fn isolated_chain() {
        let w = isolated_chain_frequencies(1, 0.25).unwrap();
        assert!((w[0] - 4.0).abs() < 1e-14);
        let r = isolated_chain_mass_ratios(3, 30.0);
        let want = [4.0 - 2f64.sqrt(), 4.0, 4.0 + 2f64.sqrt()];
        for (a, b) in r.iter().zip(want) {
            assert!((a * 900.0 - b).abs() < 1e-12);
        }
        assert!(isolated_chain_frequencies(2, 0.0).is_err());
    }

    #[test]
    fn fields_and_forces() {
        let c2 = cfg(2, 0.49);
        let modes = find_modes(&c2).unwrap();
        for m in &modes {
            let grid = reconstruct_field(&c2, m, (4, 4)).unwrap();
            for (p, &u) in m.eigenvector.iter().enumerate() {
                assert!((grid.get(p as i64, 0).unwrap() - u).abs() < 1e-7);
            }
            for n2 in 1..=4 {
                for n1 in grid.n1_range() {
                    assert_eq!(grid.get(n1, n2), grid.get(n1, -n2));
                }
            }
            if m.symmetry == Symmetry::SkewSymmetric {
                for q in -4..=4 {
                    assert!((grid.get(0, q).unwrap() + grid.get(1, q).unwrap()).abs() < 1e-12);
                }
                assert!(total_force(&c2, m).unwrap().abs() < 1e-8);
            }
        }
        let single = cfg(1, 0.8);
        let m = &find_modes(&single).unwrap()[0];
        assert!(total_force(&single, m).unwrap().abs() > 1e-3);
        let mut bad = m.clone();
        bad.residual = 1.0;
        assert!(reconstruct_field(&single, &bad, (1, 1)).is_err());
    }
}
