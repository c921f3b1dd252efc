//! Brute-force cross-checks, independent of the Green's function machinery:
//! a truncated lattice eigensolve and a tensor-product quadrature of g.

use nalgebra::{DMatrix, SymmetricEigen};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greens::GreensIndex;
use crate::modes::{DefectConfig, ModeSolution, Symmetry};
use crate::FrequencyPoint;

pub const MIN_HALF_WIDTH: usize = 15;
/// Chebyshev radius around the defect used for the localization score.
pub const SCORE_RADIUS: i64 = 5;
pub const LOCALIZED_SCORE: f64 = 0.9;
/// Pairing gate between oracle and solver frequencies.
pub const MATCH_GATE: f64 = 5e-2;
const MIN_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Fixed,
}

/// Square patch n₁ ∈ [−L, N−1+L], n₂ ∈ [−L, L] with clamped exterior.
/// The mass ratio may be 1 here to model the intact lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedLattice {
    half_width: usize,
    boundary: Boundary,
    n_defects: usize,
    mass_ratio: f64,
}

impl TruncatedLattice {
    pub fn new(half_width: usize, n_defects: usize, mass_ratio: f64) -> Result<Self> {
        if half_width < MIN_HALF_WIDTH {
            return Err(Error::InvalidParameter(format!(
                "half width must be at least {MIN_HALF_WIDTH}, got {half_width}"
            )));
        }
        if n_defects == 0 || !(mass_ratio > 0.0 && mass_ratio <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "need N >= 1 and 0 < r <= 1, got N = {n_defects}, r = {mass_ratio}"
            )));
        }
        Ok(Self {
            half_width,
            boundary: Boundary::Fixed,
            n_defects,
            mass_ratio,
        })
    }

    pub fn from_defect(cfg: &DefectConfig, half_width: usize) -> Result<Self> {
        Self::new(half_width, cfg.n_defects(), cfg.mass_ratio())
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn n_defects(&self) -> usize {
        self.n_defects
    }

    pub fn mass_ratio(&self) -> f64 {
        self.mass_ratio
    }

    fn dims(&self) -> (usize, usize) {
        (self.n_defects + 2 * self.half_width, 2 * self.half_width + 1)
    }

    // (n1, n2) of flat index i; columns are n1
    fn site(&self, i: usize) -> (i64, i64) {
        let (nx, _) = self.dims();
        let l = self.half_width as i64;
        ((i % nx) as i64 - l, (i / nx) as i64 - l)
    }

    fn is_defect(&self, n1: i64, n2: i64) -> bool {
        n2 == 0 && n1 >= 0 && n1 < self.n_defects as i64
    }

    // y = M^{-1/2} K M^{-1/2} x with K = 4I − adjacency
    fn apply(&self, scale: &[f64], x: &[f64], y: &mut [f64]) {
        let (nx, ny) = self.dims();
        for j in 0..ny {
            for i in 0..nx {
                let k = j * nx + i;
                let mut acc = 4.0 * scale[k] * x[k];
                if i > 0 {
                    acc -= scale[k - 1] * x[k - 1];
                }
                if i + 1 < nx {
                    acc -= scale[k + 1] * x[k + 1];
                }
                if j > 0 {
                    acc -= scale[k - nx] * x[k - nx];
                }
                if j + 1 < ny {
                    acc -= scale[k + nx] * x[k + nx];
                }
                y[k] = scale[k] * acc;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedMode {
    pub omega: f64,
    /// Fraction of mass-weighted energy within Chebyshev distance 5 of the defect.
    pub score: f64,
    /// Reflection parity about the defect midpoint, when clear.
    pub parity: Option<Symmetry>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Eigenfrequencies of K u = ω² M u inside `omega_window`, from a Lanczos run with
/// full reorthogonalization. Localized modes sit above the intact band, so they are
/// the extreme eigenvalues and converge first.
pub fn truncated_spectrum(lat: &TruncatedLattice, omega_window: (f64, f64)) -> Result<Vec<TruncatedMode>> {
    let (lo, hi) = omega_window;
    if !(lo >= 8f64.sqrt() && hi > lo) {
        return Err(Error::InvalidParameter(format!(
            "window ({lo}, {hi}) must lie in the stop band above sqrt(8)"
        )));
    }
    let (nx, ny) = lat.dims();
    let n = nx * ny;
    let scale: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = lat.site(i);
            if lat.is_defect(a, b) {
                1.0 / lat.mass_ratio.sqrt()
            } else {
                1.0
            }
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(0x1a77_1ce5);
    let mut q0: Vec<f64> = (0..n)
        .map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
        .collect();
    let nrm = dot(&q0, &q0).sqrt();
    q0.iter_mut().for_each(|x| *x /= nrm);

    let max_steps = n.min(1500);
    let mut basis: Vec<Vec<f64>> = vec![q0];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let lo2 = lo * lo;
    let mut last_count = usize::MAX;
    let mut stable = 0;

    loop {
        let k = basis.len() - 1;
        lat.apply(&scale, &basis[k], &mut w);
        let a = dot(&w, &basis[k]);
        alphas.push(a);
        // full reorthogonalization, twice for safety
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = dot(&w, &w).sqrt();
        let steps = alphas.len();
        let exhausted = b < 1e-12 || steps >= max_steps;

        if steps >= 20 && (steps.is_multiple_of(10) || exhausted) {
            let t = DMatrix::from_fn(steps, steps, |i, j| {
                if i == j {
                    alphas[i]
                } else if i.abs_diff(j) == 1 {
                    betas[i.min(j)]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let wanted: Vec<usize> = (0..steps).filter(|&i| eig.eigenvalues[i] >= lo2).collect();
            let converged = wanted.iter().all(|&i| {
                let bound = (b * eig.eigenvectors[(steps - 1, i)]).abs();
                bound <= 1e-10 * eig.eigenvalues[i].abs().max(1.0)
            });
            if converged && wanted.len() == last_count {
                stable += 1;
            } else {
                stable = 0;
            }
            last_count = wanted.len();
            // near-edge modes emerge late from the bulk Ritz values, hence the long stable window
            if (converged && stable >= 10 && steps >= MIN_STEPS.min(n)) || exhausted {
                if !converged {
                    return Err(Error::NonConvergence {
                        func: "truncated_spectrum",
                        terms: steps,
                    });
                }
                let mut out = Vec::new();
                for &i in &wanted {
                    let theta = eig.eigenvalues[i];
                    let omega = theta.sqrt();
                    if omega > hi {
                        continue;
                    }
                    let mut x = vec![0.0; n];
                    for (j, q) in basis.iter().take(steps).enumerate() {
                        let c = eig.eigenvectors[(j, i)];
                        x.iter_mut().zip(q).for_each(|(v, y)| *v += c * y);
                    }
                    out.push(TruncatedMode {
                        omega,
                        score: localization_score(lat, &x),
                        parity: parity(lat, &x),
                    });
                }
                out.sort_by(|a, b| a.omega.total_cmp(&b.omega));
                return Ok(out);
            }
        }
        if exhausted {
            return Err(Error::NonConvergence {
                func: "truncated_spectrum",
                terms: steps,
            });
        }
        betas.push(b);
        let next: Vec<f64> = w.iter().map(|x| x / b).collect();
        basis.push(next);
    }
}

fn localization_score(lat: &TruncatedLattice, x: &[f64]) -> f64 {
    let last = lat.n_defects as i64 - 1;
    let mut near = 0.0;
    let mut total = 0.0;
    for (i, &v) in x.iter().enumerate() {
        let (a, b) = lat.site(i);
        let d1 = (-a).max(a - last).max(0);
        let e = v * v;
        total += e;
        if d1.max(b.abs()) <= SCORE_RADIUS {
            near += e;
        }
    }
    near / total
}

fn parity(lat: &TruncatedLattice, x: &[f64]) -> Option<Symmetry> {
    let (nx, _) = lat.dims();
    // n1 → N−1−n1 maps column i to nx−1−i
    let mut overlap = 0.0;
    let mut total = 0.0;
    for (k, &v) in x.iter().enumerate() {
        let (row, col) = (k / nx, k % nx);
        overlap += v * x[row * nx + (nx - 1 - col)];
        total += v * v;
    }
    let c = overlap / total;
    if c > 0.99 {
        Some(Symmetry::Symmetric)
    } else if c < -0.99 {
        Some(Symmetry::SkewSymmetric)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeMatch {
    pub solver_omega: f64,
    pub oracle_omega: Option<f64>,
    pub deviation: Option<f64>,
}

/// Nearest-neighbour pairing within `MATCH_GATE`.
pub fn match_modes(modes: &[ModeSolution], oracle: &[TruncatedMode]) -> Vec<ModeMatch> {
    modes
        .iter()
        .map(|m| {
            let best = oracle
                .iter()
                .map(|o| o.omega)
                .min_by(|a, b| (a - m.omega).abs().total_cmp(&(b - m.omega).abs()))
                .filter(|w| (w - m.omega).abs() <= MATCH_GATE);
            ModeMatch {
                solver_omega: m.omega,
                oracle_omega: best,
                deviation: best.map(|w| (w - m.omega).abs()),
            }
        })
        .collect()
}

// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration.
fn gauss_legendre(p: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; p];
    let mut w = vec![0.0; p];
    for i in 0..p.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (p as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..p {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = p as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[p - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[p - 1 - i] = w[i];
    }
    (x, w)
}

/// g(m, n₂; ω) = π⁻² ∫₀^π∫₀^π cos(mξ)cos(n₂η)/(2α + 2cos ξ + 2cos η) dξ dη by a
/// composite tensor Gauss–Legendre rule, doubling panels until two levels agree to 1e-11.
pub fn greens_quadrature_reference(idx: GreensIndex, f: FrequencyPoint) -> Result<f64> {
    if !f.in_stop_band() {
        return Err(Error::InvalidParameter("frequency must lie in the stop band".into()));
    }
    const TOL: f64 = 1e-11;
    let (m, n2) = idx.canonical();
    let (m, n2) = (m as f64, n2 as f64);
    let two_alpha = 2.0 * f.alpha();
    let (gx, gw) = gauss_legendre(24);
    let pi = std::f64::consts::PI;
    let level = |panels: usize| -> f64 {
        let h = pi / panels as f64;
        let mut nodes = Vec::with_capacity(panels * gx.len());
        for p in 0..panels {
            let c = (p as f64 + 0.5) * h;
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push((c + 0.5 * h * x, 0.5 * h * w));
            }
        }
        let cx: Vec<(f64, f64, f64)> = nodes.iter().map(|&(t, w)| (2.0 * t.cos(), (m * t).cos(), w)).collect();
        let cy: Vec<(f64, f64, f64)> = nodes.iter().map(|&(t, w)| (2.0 * t.cos(), (n2 * t).cos(), w)).collect();
        let mut sum = 0.0;
        for &(a, ca, wa) in &cx {
            let mut inner = 0.0;
            for &(b, cb, wb) in &cy {
                inner += wb * cb / (two_alpha + a + b);
            }
            sum += wa * ca * inner;
        }
        sum / (pi * pi)
    };
    let mut panels = 1;
    let mut prev = level(panels);
    while panels < 512 {
        panels *= 2;
        let cur = level(panels);
        if (cur - prev).abs() <= TOL {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Tolerance {
        func: "greens_quadrature_reference",
        tol: TOL,
        estimate: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::{greens_auto, greens_single_integral};
    use crate::modes::find_modes;
    use crate::specfun::elliptic_k;

    #[test]
    fn gauss_legendre_exactness() {
        let (x, w) = gauss_legendre(24);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let i46: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(46)).sum();
        assert!((i46 - 2.0 / 47.0).abs() < 1e-14);
    }

    #[test]
    fn quadrature_reference_values() {
        let f = FrequencyPoint::from_omega2(10.0).unwrap();
        let g = greens_quadrature_reference(GreensIndex::new(0, 0), f).unwrap();
        assert!((g - elliptic_k(4.0 / 9.0).unwrap() / (3.0 * std::f64::consts::PI)).abs() < 1e-10);
        let f12 = FrequencyPoint::from_omega2(12.0).unwrap();
        let idx = GreensIndex::new(2, 1);
        assert!((greens_quadrature_reference(idx, f12).unwrap() - greens_auto(idx, f12).unwrap()).abs() < 1e-9);
        let f85 = FrequencyPoint::from_omega2(8.5).unwrap();
        let idx = GreensIndex::new(0, 5);
        let want = greens_single_integral(idx, f85, 1e-13).unwrap();
        assert!((greens_quadrature_reference(idx, f85).unwrap() - want).abs() < 1e-8);
    }

    #[test]
    fn lattice_validation() {
        assert!(TruncatedLattice::new(10, 1, 0.8).is_err());
        assert!(TruncatedLattice::new(20, 1, 1.2).is_err());
        assert!(TruncatedLattice::new(20, 1, 1.0).is_ok());
        assert!(truncated_spectrum(&TruncatedLattice::new(15, 1, 0.8).unwrap(), (2.0, 3.0)).is_err());
    }

    #[test]
    fn single_defect_oracle() {
        let lat = TruncatedLattice::new(20, 1, 0.8).unwrap();
        let modes = truncated_spectrum(&lat, (8f64.sqrt() + 1e-6, 10.0)).unwrap();
        // the mode decays slowly this close to the edge, so the score stays modest
        assert_eq!(modes.len(), 1, "{modes:?}");
        assert!((modes[0].omega - 2.83).abs() < 1e-2);
        assert!(modes[0].score > 0.5 && modes[0].parity == Some(Symmetry::Symmetric));
    }

    #[test]
    fn intact_lattice_has_no_localized_modes() {
        let lat = TruncatedLattice::new(15, 1, 1.0).unwrap();
        let modes = truncated_spectrum(&lat, (8f64.sqrt(), 10.0)).unwrap();
        assert!(modes.iter().all(|m| m.score <= LOCALIZED_SCORE));
    }

    #[test]
    fn triplet_matches_solver() {
        let cfg = DefectConfig::new(3, 0.4).unwrap();
        let lat = TruncatedLattice::from_defect(&cfg, 20).unwrap();
        let oracle = truncated_spectrum(&lat, (8f64.sqrt() + 1e-6, (8.0f64 / 0.4).sqrt())).unwrap();
        let solver = find_modes(&cfg).unwrap();
        for (m, pair) in solver.iter().zip(match_modes(&solver, &oracle)) {
            let dev = pair.deviation.unwrap_or_else(|| panic!("{pair:?} {oracle:?}"));
            assert!(dev < 1e-2, "{pair:?}");
            let o = oracle.iter().find(|o| Some(o.omega) == pair.oracle_omega).unwrap();
            assert_eq!(o.parity, Some(m.symmetry));
        }
    }
}
