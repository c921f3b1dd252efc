//! Infinite line defect of mass r along n₂ = 0 and the string-on-foundation
//! envelope that links it to long finite defects.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::modes::{find_modes, reconstruct_field, DefectConfig, ModeSolution, Symmetry};
use crate::scalar::Real;

/// Ω_β(κ, iω) = 1 + 2sin²(κ/2) − βω²/2.
pub fn omega_beta<T: Real>(beta: T, kappa: T, omega: T) -> T {
    let s = (kappa * T::c(0.5)).sin();
    T::one() + T::c(2.0) * s * s - beta * omega * omega * T::c(0.5)
}

/// Root of λ² − 2Ω₁λ + 1 = 0, tagged by case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransverseLambda<T> {
    /// |Ω₁| > 1: real, |λ| < 1, localized across the defect.
    Decaying(T),
    /// Ω₁ = ±1.
    Unit(T),
    /// |Ω₁| < 1: unimodular, propagates transversally.
    Oscillating(Complex<T>),
}

impl<T: Real> TransverseLambda<T> {
    pub fn modulus(&self) -> T {
        match *self {
            Self::Decaying(l) | Self::Unit(l) => l.abs(),
            Self::Oscillating(z) => z.norm(),
        }
    }
}

pub fn transverse_lambda<T: Real>(kappa: T, omega: T) -> TransverseLambda<T> {
    let o = omega_beta(T::one(), kappa, omega);
    let one = T::one();
    if o.abs() > one {
        // Ω − sign(Ω)√(Ω²−1) written as 1/(Ω + sign(Ω)√(Ω²−1)) to avoid cancellation
        let root = ((o - one) * (o + one)).sqrt();
        TransverseLambda::Decaying(one / (o + o.signum() * root))
    } else if o.abs() == one {
        TransverseLambda::Unit(o)
    } else {
        TransverseLambda::Oscillating(Complex::new(o, ((one - o) * (one + o)).sqrt()))
    }
}

/// ω⁽¹⁾(κ) = 2|sin(κ/2)|.
pub fn omega1<T: Real>(kappa: T) -> T {
    T::c(2.0) * (kappa * T::c(0.5)).sin().abs()
}

/// ω⁽²⁾(κ) = 2√(1 + sin²(κ/2)).
pub fn omega2<T: Real>(kappa: T) -> T {
    let s = (kappa * T::c(0.5)).sin();
    T::c(2.0) * (T::one() + s * s).sqrt()
}

/// ¼r(r−2)ω⁴ + (1+2s²)ω² − 4s²(1+s²), s = sin(κ/2).
pub fn biquadratic_residual<T: Real>(kappa: T, r: T, omega: T) -> T {
    let s2 = (kappa * T::c(0.5)).sin().powi(2);
    let w2 = omega * omega;
    T::c(0.25) * r * (r - T::c(2.0)) * w2 * w2 + (T::one() + T::c(2.0) * s2) * w2 - T::c(4.0) * s2 * (T::one() + s2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionSample<T> {
    pub kappa: T,
    pub omega_minus: T,
    pub lambda: T,
    pub omega1: T,
    pub omega2: T,
}

fn check_r<T: Real>(r: T) -> Result<()> {
    if r > T::zero() && r < T::one() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "mass ratio must lie in (0, 1), got {r}"
        )))
    }
}

// ω² for both roots of the biquadratic; (2/(r(2−r)))[1 + 2s² ± √(1 + 4(1−r)²s²(1+s²))]
fn omega_squared_pair<T: Real>(kappa: T, r: T) -> (T, T) {
    let s2 = (kappa * T::c(0.5)).sin().powi(2);
    let one = T::one();
    let two = T::c(2.0);
    let pre = two / (r * (two - r));
    let base = one + two * s2;
    let rad = (one + T::c(4.0) * (one - r).powi(2) * s2 * (one + s2)).sqrt();
    // the small root loses everything to cancellation; use the product of roots
    let big = pre * (base + rad);
    let product = T::c(16.0) * s2 * (one + s2) / (r * (two - r));
    (big, product / big)
}

/// The symmetric defect-mode dispersion branch ω⁽⁻⁾(κ) with its checks.
pub fn dispersion_omega_minus<T: Real>(kappa: T, r: T) -> Result<DispersionSample<T>> {
    check_r(r)?;
    let (w2, _) = omega_squared_pair(kappa, r);
    let omega_minus = w2.sqrt();
    let lambda = omega_beta(r, kappa, omega_minus);
    let sample = DispersionSample {
        kappa,
        omega_minus,
        lambda,
        omega1: omega1(kappa),
        omega2: omega2(kappa),
    };
    let sr = r.sqrt();
    if !(sample.omega1 / sr < omega_minus && omega_minus < sample.omega2 / sr) {
        return Err(Error::Invariant(format!("band inequalities fail at kappa = {kappa}")));
    }
    if !(omega_minus > sample.omega2) {
        return Err(Error::Invariant(format!("omega_minus below omega2 at kappa = {kappa}")));
    }
    if !(lambda.abs() < T::one()) {
        return Err(Error::Invariant(format!("|lambda| = {} is not below 1", lambda.abs())));
    }
    let tol = T::c(1e-10).max(T::epsilon() * T::c(64.0) * w2 * w2);
    let res = biquadratic_residual(kappa, r, omega_minus);
    if !(res.abs() <= tol) {
        return Err(Error::Invariant(format!(
            "biquadratic residual {res} at kappa = {kappa}"
        )));
    }
    Ok(sample)
}

/// Uniform sweep of ω⁽⁻⁾ over κ ∈ [0, π].
pub fn dispersion_sweep<T: Real>(r: T, samples: usize) -> Result<Vec<DispersionSample<T>>> {
    if samples < 2 {
        return Err(Error::InvalidParameter("at least two kappa samples are needed".into()));
    }
    let step = T::PI() / T::from_usize_lossy(samples - 1);
    (0..samples)
        .map(|i| {
            let kappa = if i == samples - 1 {
                T::PI()
            } else {
                step * T::from_usize_lossy(i)
            };
            dispersion_omega_minus(kappa, r)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaPlusRejection<T> {
    pub rejected: bool,
    pub omega_plus: T,
    /// r^{-1/2}ω⁽¹⁾(κ), which ω⁽⁺⁾ must exceed to be admissible.
    pub lower_bound: T,
    pub witness: &'static str,
}

/// The second biquadratic root ω⁽⁺⁾ violates the lower band inequality.
pub fn reject_omega_plus<T: Real>(kappa: T, r: T) -> Result<OmegaPlusRejection<T>> {
    check_r(r)?;
    let (_, small) = omega_squared_pair(kappa, r);
    let omega_plus = small.max(T::zero()).sqrt();
    let lower_bound = omega1(kappa) / r.sqrt();
    let zero = omega_plus == T::zero();
    Ok(OmegaPlusRejection {
        rejected: zero || omega_plus < lower_bound,
        omega_plus,
        lower_bound,
        witness: if zero {
            "zero frequency: omega_plus = 0 is not a vibration mode"
        } else {
            "omega_plus < r^(-1/2) omega1(kappa)"
        },
    })
}

/// (in-phase at κ = 0, out-of-phase at κ = π).
pub fn standing_wave_frequencies<T: Real>(r: T) -> Result<(T, T)> {
    check_r(r)?;
    let two = T::c(2.0);
    let pre = two / (r * (two - r));
    let in_phase = (two * pre).sqrt();
    let out = (pre * (T::c(3.0) + (T::one() + T::c(8.0) * (T::one() - r).powi(2)).sqrt())).sqrt();
    Ok((in_phase, out))
}

/// Skew-symmetric problem about n₂ = 0: displacements vanish on the defect, and the
/// only decaying or bounded solution of the intact half-plane is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrivialSolution;

impl TrivialSolution {
    pub const STATEMENT: &'static str =
        "skew-symmetric modes of the infinite defect vanish identically; only the symmetric branch omega_minus exists";
}

pub fn skew_symmetric_waveguide_solution() -> TrivialSolution {
    TrivialSolution
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeModel<T> {
    pub lambda_est: T,
    pub mode_number_q: u32,
    pub n_defects: usize,
    pub r: T,
    pub omega: T,
    /// u(η) at η = 0..N−1, unit norm.
    pub profile: Vec<T>,
}

/// Homogenized profile u(η) = u₀ sin(√(rω² − 2(1−λ))η) with the estimated λ.
pub fn envelope<T: Real>(n_defects: usize, r: T, omega: T, q: u32) -> Result<EnvelopeModel<T>> {
    check_r(r)?;
    if n_defects < 5 {
        return Err(Error::InvalidParameter(format!(
            "envelope needs N >= 5, got {n_defects}"
        )));
    }
    if q.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("mode number q must be odd, got {q}")));
    }
    let span = T::from_usize_lossy(n_defects - 1);
    let k = T::from_u32(q).unwrap() * T::PI() / span;
    let rw2 = r * omega * omega;
    let lambda_est = T::one() + T::c(0.5) * (k * k - rw2);
    let radicand = rw2 - T::c(2.0) * (T::one() - lambda_est);
    if !(radicand > T::zero()) {
        return Err(domain("envelope", format!("nonpositive radicand {radicand}")));
    }
    if !(lambda_est.abs() < T::one()) {
        return Err(domain(
            "envelope",
            format!("|lambda_est| = {} is not below 1", lambda_est.abs()),
        ));
    }
    // the radicand is (qπ/(N−1))²; reducing qη mod 2(N−1) makes the endpoint zeros exact
    let period = 2 * (n_defects - 1) as u64;
    let mut profile: Vec<T> = (0..n_defects as u64)
        .map(|eta| {
            let j = (q as u64 * eta) % period;
            if j == 0 || j == period / 2 {
                T::zero()
            } else {
                (T::PI() * T::from_u64(j).unwrap() / span).sin()
            }
        })
        .collect();
    let norm = profile.iter().fold(T::zero(), |a, &x| a + x * x).sqrt();
    for x in profile.iter_mut() {
        *x = *x / norm;
    }
    Ok(EnvelopeModel {
        lambda_est,
        mode_number_q: q,
        n_defects,
        r,
        omega,
        profile,
    })
}

/// Mean of u_{n₁,1}/u_{n₁,0} over the defect sites.
pub fn mean_transverse_ratio(cfg: &DefectConfig, mode: &ModeSolution) -> Result<f64> {
    let grid = reconstruct_field(cfg, mode, (0, 1))?;
    let n = cfg.n_defects();
    let mut sum = 0.0;
    for p in 0..n as i64 {
        let u0 = grid.get(p, 0).expect("inside window");
        if u0 == 0.0 {
            return Err(Error::InvalidParameter(format!("mode vanishes at defect site {p}")));
        }
        sum += grid.get(p, 1).expect("inside window") / u0;
    }
    Ok(sum / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketEntry {
    pub omega: f64,
    pub branch_index: usize,
    pub symmetry: Symmetry,
    pub contained: bool,
    pub distance_to_lower: f64,
    pub distance_to_upper: f64,
}

/// Modes per unit frequency in the outer quarters and the middle half of the band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeClustering {
    pub lower_quarter: f64,
    pub middle_half: f64,
    pub upper_quarter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketReport {
    pub n_defects: usize,
    pub r: f64,
    pub band: [f64; 2],
    pub modes: Vec<BracketEntry>,
    pub contained: bool,
    pub clustering: EdgeClustering,
    pub warnings: Vec<String>,
}

/// Compare the finite defect's frequencies with the infinite defect's pass band.
pub fn finite_vs_infinite_bracket(n_defects: usize, r: f64) -> Result<BracketReport> {
    if n_defects < 2 {
        return Err(Error::InvalidParameter("bracket needs N >= 2".into()));
    }
    let cfg = DefectConfig::new(n_defects, r)?;
    let modes = find_modes(&cfg)?;
    bracket_from_modes(&cfg, &modes)
}

/// As `finite_vs_infinite_bracket`, reusing modes that were already computed.
pub fn bracket_from_modes(cfg: &DefectConfig, modes: &[ModeSolution]) -> Result<BracketReport> {
    let r = cfg.mass_ratio();
    let (lo, hi) = standing_wave_frequencies(r)?;
    let entries: Vec<BracketEntry> = modes
        .iter()
        .map(|m| BracketEntry {
            omega: m.omega,
            branch_index: m.branch_index,
            symmetry: m.symmetry,
            contained: m.omega >= lo && m.omega <= hi,
            distance_to_lower: m.omega - lo,
            distance_to_upper: hi - m.omega,
        })
        .collect();
    let width = hi - lo;
    let count = |a: f64, b: f64| entries.iter().filter(|e| e.omega >= a && e.omega < b).count() as f64;
    let q1 = lo + 0.25 * width;
    let q3 = lo + 0.75 * width;
    let clustering = EdgeClustering {
        lower_quarter: count(lo, q1) / (0.25 * width),
        middle_half: count(q1, q3) / (0.5 * width),
        upper_quarter: (count(q3, hi) + entries.iter().filter(|e| e.omega == hi).count() as f64) / (0.25 * width),
    };
    let warnings = entries
        .iter()
        .filter(|e| !e.contained)
        .map(|e| format!("omega = {} lies outside [{lo}, {hi}]", e.omega))
        .collect();
    Ok(BracketReport {
        n_defects: cfg.n_defects(),
        r,
        band: [lo, hi],
        contained: entries.iter().all(|e| e.contained),
        modes: entries,
        clustering,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn omega_beta_trivial() {
        assert_eq!(omega_beta(1.0, 0.0, 0.0), 1.0);
        assert!((omega_beta(1.0, PI, 0.0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn lambda_cases() {
        assert_eq!(transverse_lambda(0.0, 0.0), TransverseLambda::Unit(1.0));
        match transverse_lambda(0.3f64, 3.5) {
            TransverseLambda::Decaying(l) => assert!(l.abs() < 1.0 && l < 0.0),
            other => panic!("{other:?}"),
        }
        let osc = transverse_lambda(1.0f64, 1.2);
        assert!(matches!(osc, TransverseLambda::Oscillating(_)));
        assert!((osc.modulus() - 1.0).abs() < 1e-15);
        // the decaying root solves the quadratic
        if let TransverseLambda::Decaying(l) = transverse_lambda(0.7f64, 5.0) {
            let o = omega_beta(1.0f64, 0.7, 5.0);
            assert!((l * l - 2.0 * o * l + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn standing_waves_quarter_mass() {
        let (a, b) = standing_wave_frequencies(0.25f64).unwrap();
        assert!((a - 3.0237).abs() < 5e-5 && (b - 4.9432).abs() < 5e-5, "{a} {b}");
        let d0 = dispersion_omega_minus(0.0, 0.25).unwrap();
        let dp = dispersion_omega_minus(PI, 0.25).unwrap();
        assert!((d0.omega_minus - a).abs() < 1e-12 && (dp.omega_minus - b).abs() < 1e-12);
        let (a1, b1) = standing_wave_frequencies(1.0f64 - 1e-9).unwrap();
        assert!((a1 - 2.0).abs() < 1e-6 && (b1 - 8f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn lambda_equals_omega_r_on_branch() {
        for r in [0.05f64, 0.25, 0.5, 0.75] {
            for s in dispersion_sweep(r, 200).unwrap() {
                match transverse_lambda(s.kappa, s.omega_minus) {
                    TransverseLambda::Decaying(l) => assert!((l - s.lambda).abs() < 1e-10),
                    other => panic!("{other:?}"),
                }
                assert!(biquadratic_residual(s.kappa, r, s.omega_minus).abs() <= 1e-10);
                assert!(reject_omega_plus(s.kappa, r).unwrap().rejected);
            }
        }
    }

    #[test]
    fn small_mass_limit() {
        let r = 1e-4;
        let k = 1.1;
        let s = dispersion_omega_minus(k, r).unwrap();
        let lead = (2.0 / r) * (1.0 + 2.0 * (k / 2.0f64).sin().powi(2));
        assert!((s.omega_minus.powi(2) / lead - 1.0).abs() < 1e-2);
    }

    #[test]
    fn omega_plus_rejected() {
        let rej = reject_omega_plus(PI / 2.0, 0.25).unwrap();
        assert!(rej.rejected && rej.omega_plus < rej.lower_bound && rej.omega_plus > 0.0);
        let zero = reject_omega_plus(0.0, 0.25).unwrap();
        assert_eq!(zero.omega_plus, 0.0);
        assert!(zero.rejected && zero.witness.contains("zero"));
        assert!(reject_omega_plus(0.3, 1.5).is_err());
    }

    #[test]
    fn dispersion_even_and_monotone() {
        let mut prev = 0.0;
        for i in 0..=64 {
            let k = PI * i as f64 / 64.0;
            let a = dispersion_omega_minus(k, 0.5).unwrap().omega_minus;
            let b = dispersion_omega_minus(-k, 0.5).unwrap().omega_minus;
            assert_eq!(a, b);
            assert!(a >= prev);
            prev = a;
        }
    }

    #[test]
    fn envelope_estimate() {
        let e = envelope(20, 0.25f64, 3.0374, 1).unwrap();
        assert!((e.lambda_est - (-0.1396)).abs() < 5e-4, "{}", e.lambda_est);
        assert_eq!(e.profile[0], 0.0);
        assert_eq!(e.profile[19], 0.0);
        let norm: f64 = e.profile.iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-14);
        assert!(envelope(20, 0.25, 3.0374, 2).is_err());
        assert!(envelope(4, 0.25, 3.0374, 1).is_err());
        let e3 = envelope::<f64>(20, 0.25, 3.5, 3).unwrap();
        assert_eq!(e3.profile[19], 0.0);
    }

    #[test]
    fn skew_marker() {
        assert_eq!(skew_symmetric_waveguide_solution(), TrivialSolution);
        assert!(TrivialSolution::STATEMENT.contains("symmetric branch"));
    }

    #[test]
    fn pair_bracket() {
        let rep = finite_vs_infinite_bracket(2, 0.49).unwrap();
        assert_eq!(rep.modes.len(), 2);
        assert!(rep.contained && rep.warnings.is_empty());
        assert!(finite_vs_infinite_bracket(1, 0.49).is_err());
    }
}
