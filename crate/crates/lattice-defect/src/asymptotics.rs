//! Far-field and band-edge approximations of the Green's function and mode fields.
//!
//! Every approximation comes back as an [`Estimate`]: the value plus a crude
//! error magnitude (the size of the first neglected correction) so callers can
//! decide whether to trust it.

use crate::error::{domain, Error, Result};
use crate::greens::{FrequencyPoint, GreensIndex};
use crate::modes::{DefectConfig, ModeSolution};
use crate::scalar::{Real, EULER_GAMMA};
use crate::specfun::digamma;

pub use crate::quadrature::Estimate;

/// Upper end of the α window where the band-edge forms are offered.
pub const EDGE_ALPHA_MAX: f64 = 2.2;

/// Default truncation of the continuation double series.
pub const DEFAULT_J_MAX: usize = 40;
pub const DEFAULT_K_MAX: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarFieldParams<T> {
    pub c: T,
    pub decay_base: T,
}

impl<T: Real> FarFieldParams<T> {
    pub fn new(f: FrequencyPoint<T>) -> Result<Self> {
        if !f.in_stop_band() {
            return Err(domain("far field", "frequency outside the stop band"));
        }
        let c = f.omega2() * T::c(0.5) - T::c(3.0);
        Ok(Self {
            c,
            decay_base: (c * c - T::one()).sqrt() - c,
        })
    }

    fn root(&self) -> T {
        (self.c * self.c - T::one()).sqrt()
    }
}

/// Which ray a band-edge form follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ray {
    /// Along a lattice bond line (index (k, 0)).
    Bond,
    /// Along a diagonal (index (k, k)).
    Diag,
}

/// Far-field Green's function along the defect line.
pub fn greens_far_parallel<T: Real>(m: i64, f: FrequencyPoint<T>) -> Result<Estimate<T>> {
    if m == 0 {
        return Err(domain("greens_far_parallel", "m must be nonzero"));
    }
    let p = FarFieldParams::new(f)?;
    let mabs = T::from_u64(m.unsigned_abs()).unwrap();
    let root = p.root();
    let value = p.decay_base.powi(m.unsigned_abs() as i32) / ((T::c(8.0) * T::PI() * root).sqrt() * mabs.sqrt());
    // next order is O(1/(m√(c²−1))), which dominates near the band edge
    let four_m = T::c(4.0) * mabs;
    Ok(Estimate {
        value,
        error: value.abs() * ((T::one() + p.c) / four_m + T::one() / (four_m * root)),
    })
}

/// Far-field Green's function perpendicular to the defect line, observed in
/// column `p_prime`, row `n2`, from a source at `p`.
pub fn greens_far_perpendicular<T: Real>(p_prime: i64, n2: i64, p: i64, f: FrequencyPoint<T>) -> Result<Estimate<T>> {
    if n2 == 0 {
        return Err(domain("greens_far_perpendicular", "n2 must be nonzero"));
    }
    let base = greens_far_parallel(n2, f)?;
    let fp = FarFieldParams::new(f)?;
    let d = p_prime - p;
    let dt = T::from_i64(d).unwrap();
    let n2t = T::from_u64(n2.unsigned_abs()).unwrap();
    let sign = if d % 2 == 0 { T::one() } else { -T::one() };
    let gauss = (-(dt * dt) * fp.root() / (T::c(2.0) * n2t)).exp();
    Ok(Estimate {
        value: sign * gauss * base.value,
        error: gauss * base.error,
    })
}

/// Coefficients v_k = (k−1)! 𝔉(m, n, k) / ((a)_k)², a = (1+m+n)/2, for k = 1..=k_max
/// (index 0 unused). 𝔉 obeys an exact three-term recurrence; in scaled form it
/// stays O(1) where 𝔉 itself grows factorially.
pub fn scaled_tail_coefficients<T: Real>(m: u32, n: u32, k_max: usize) -> Vec<T> {
    let s = T::from_u32(m + n).unwrap();
    let a = (T::one() + s) * T::c(0.5);
    let dm = T::from_i64(m as i64 - n as i64).unwrap();
    let d2 = dm * dm * T::c(0.25);
    let (mt, nt) = (T::from_u32(m).unwrap(), T::from_u32(n).unwrap());
    let mut v = vec![T::zero(); k_max + 1];
    if k_max == 0 {
        return v;
    }
    v[1] = -d2 / (a * a);
    let one = T::one();
    let two = T::c(2.0);
    for q in 1..k_max {
        let qt = T::from_usize_lossy(q);
        let prev = if q >= 2 { v[q - 1] } else { T::zero() };
        let aq1 = a + qt - one;
        let aq = a + qt;
        let big_a = qt * (two * qt - one + s) - d2;
        let big_b = (qt - one) * (qt - one) * (qt - one + mt) * (qt - one + nt);
        v[q + 1] = qt * (big_a * aq1 * aq1 * v[q] - big_b * prev) / ((qt + one) * aq * aq * aq1 * aq1);
    }
    v
}

// Σ_{k>j} v_k (k−j−1)!/(k−1)! with a fitted power-law tail past k_max.
fn lagged_sum<T: Real>(v: &[T], j: usize) -> (T, T) {
    let k_max = v.len() - 1;
    if k_max <= j {
        return (T::zero(), T::zero());
    }
    let mut w = T::one(); // (k−j−1)!/(k−1)! at k = j+1
    for i in 1..=j {
        w = w / T::from_usize_lossy(i);
    }
    let mut sum = T::zero();
    let mut last = T::zero();
    for (k, &vk) in v.iter().enumerate().skip(j + 1) {
        if k > j + 1 {
            w = w * T::from_usize_lossy(k - j - 1) / T::from_usize_lossy(k - 1);
        }
        let t = vk * w;
        sum = sum + t;
        last = t;
        if t.abs() <= T::epsilon() * T::c(1e-3) * sum.abs() && k > 4 * j + 16 {
            return (sum, t.abs());
        }
    }
    // v_k ~ C k^{-p}; p from the last octave
    let kh = k_max / 2;
    let (vk, vh) = (v[k_max], v[kh]);
    if kh > j && vk != T::zero() && (vk > T::zero()) == (vh > T::zero()) {
        let p = (vh / vk).ln() / T::c(2.0).ln() + T::from_usize_lossy(j);
        if p > T::c(1.05) {
            let kt = T::from_usize_lossy(k_max);
            let tail = last * kt / (p - T::one()) - last * T::c(0.5);
            return (sum + tail, tail.abs() * T::c(0.05) + last.abs());
        }
    }
    (sum, last.abs() * T::from_usize_lossy(k_max))
}

/// Finite part c(m, n) = Σ_{k≥1} v_k entering the leading band-edge term.
pub fn edge_correction<T: Real>(m: u32, n: u32, k_max: usize) -> Estimate<T> {
    if m == n {
        return Estimate {
            value: T::zero(),
            error: T::zero(),
        };
    }
    let v = scaled_tail_coefficients::<T>(m, n, k_max);
    let (value, error) = lagged_sum(&v, 0);
    Estimate { value, error }
}

fn log_one_minus_t<T: Real>(f: FrequencyPoint<T>) -> T {
    // 1 − 4/α² = (α−2)(α+2)/α², kept accurate as α → 2
    let a = f.alpha();
    (f.alpha_minus_2() * (a + T::c(2.0)) / (a * a)).ln()
}

fn edge_prefactor<T: Real>(s: u32, f: FrequencyPoint<T>) -> T {
    let st = s as i32;
    let sign = if s.is_multiple_of(2) { T::one() } else { -T::one() };
    let two_a = T::c(2.0) * f.alpha();
    // (−4)^s/(2α)^{1+s} = ±(2/α)^s / (2α)
    sign * (T::c(2.0) / f.alpha()).powi(st) / (two_a * T::PI())
}

/// Logarithmic analytic continuation of the hypergeometric representation,
/// valid on and beyond the circle of convergence (α² ≥ 4, α > 2).
pub fn greens_band_edge_continuation<T: Real>(
    idx: GreensIndex,
    f: FrequencyPoint<T>,
    j_max: usize,
    k_max: usize,
) -> Result<Estimate<T>> {
    if !(f.alpha() > T::c(2.0)) {
        return Err(domain("greens_band_edge_continuation", "requires alpha > 2"));
    }
    let (m, n) = idx.canonical();
    let s = m + n;
    let a = (T::one() + T::from_u32(s).unwrap()) * T::c(0.5);
    let big_l = log_one_minus_t(f);
    let one_minus_t = big_l.exp();
    let v = scaled_tail_coefficients::<T>(m, n, k_max.max(j_max + 2));
    let gamma = T::c(EULER_GAMMA);

    // r_k = 𝔉(k)/((a)_k)² = v_k/(k−1)!
    let mut r = vec![T::one(); j_max + 1];
    let mut fact = T::one();
    for k in 1..=j_max {
        if k > 1 {
            fact = fact * T::from_usize_lossy(k - 1);
        }
        r[k] = v[k] / fact;
    }
    let harmonic = |n: usize| (1..=n).fold(T::zero(), |h, i| h + T::one() / T::from_usize_lossy(i));

    let mut total = T::zero();
    let mut aj = T::one(); // ((a)_j/j!)² (1−t)^j
    let mut jfact = T::one();
    let mut tail_err = T::zero();
    let mut prev_mag = T::infinity();
    let mut last_mag = T::zero();
    let mut quiet = 0;
    for j in 0..=j_max {
        let jt = T::from_usize_lossy(j);
        if j > 0 {
            let q = (a + jt - T::one()) / jt;
            aj = aj * q * q * one_minus_t;
            jfact = jfact * jt;
        }
        let psi_j = -gamma + harmonic(j);
        let psi_aj = digamma(a + jt)?;
        let mut first = T::zero();
        let mut coef = T::one(); // (−j)_k
        for (k, &rk) in r.iter().enumerate().take(j + 1) {
            if k > 0 {
                coef = coef * (T::from_usize_lossy(k - 1) - jt);
            }
            let bracket = -gamma + harmonic(j - k) + psi_j - T::c(2.0) * psi_aj - big_l;
            first = first + coef * rk * bracket;
        }
        let (lag, lag_err) = lagged_sum(&v, j);
        let sign = if j % 2 == 0 { T::one() } else { -T::one() };
        let second = sign * jfact * lag;
        let term = aj * (first + second);
        tail_err = tail_err + aj * jfact * lag_err;
        total = total + term;
        last_mag = term.abs();
        if last_mag <= T::epsilon() * T::c(0.1) * total.abs() {
            quiet += 1;
            if quiet >= 2 {
                break;
            }
        } else {
            quiet = 0;
        }
        if j == j_max && last_mag > prev_mag && last_mag > T::c(1e-8) * total.abs() {
            return Err(Error::NonConvergence {
                func: "greens_band_edge_continuation",
                terms: j_max,
            });
        }
        prev_mag = last_mag;
    }
    let pre = edge_prefactor::<T>(s, f);
    Ok(Estimate {
        value: pre * total,
        error: pre.abs() * (tail_err + last_mag),
    })
}

fn require_edge_window<T: Real>(f: FrequencyPoint<T>, func: &'static str) -> Result<()> {
    if f.alpha() > T::c(2.0) && f.alpha() <= T::c(EDGE_ALPHA_MAX) {
        Ok(())
    } else {
        Err(domain(
            func,
            format!("alpha = {} outside (2, {EDGE_ALPHA_MAX}]", f.alpha()),
        ))
    }
}

/// j = 0 term of the continuation: the leading log-singular behaviour.
pub fn greens_band_edge_leading<T: Real>(idx: GreensIndex, f: FrequencyPoint<T>) -> Result<Estimate<T>> {
    require_edge_window(f, "greens_band_edge_leading")?;
    let (m, n) = idx.canonical();
    let s = m + n;
    let a = (T::one() + T::from_u32(s).unwrap()) * T::c(0.5);
    let gamma = T::c(EULER_GAMMA);
    let big_l = log_one_minus_t(f);
    let c = edge_correction::<T>(m, n, DEFAULT_K_MAX);
    let bracket = -T::c(2.0) * gamma - T::c(2.0) * digamma(a)? - big_l + c.value;
    let pre = edge_prefactor::<T>(s, f);
    // size of the j = 1 term: a²(1−t) times a bracket of the same order
    let next = a * a * big_l.exp() * (bracket.abs() + T::one());
    Ok(Estimate {
        value: pre * bracket,
        error: pre.abs() * (next + c.error),
    })
}

/// Leading band-edge form along a bond line (index (k,0)) or diagonal (index (k,k)).
pub fn band_edge_ray_forms<T: Real>(ray: Ray, k: u32, f: FrequencyPoint<T>) -> Result<Estimate<T>> {
    let idx = match ray {
        Ray::Bond => GreensIndex::new(k as i64, 0),
        Ray::Diag => GreensIndex::new(k as i64, k as i64),
    };
    greens_band_edge_leading(idx, f)
}

/// Large-k version of the ray forms: ψ replaced by its logarithmic asymptote and
/// the bond correction by its limit −ln 2.
pub fn band_edge_ray_far<T: Real>(ray: Ray, k: u32, f: FrequencyPoint<T>) -> Result<Estimate<T>> {
    require_edge_window(f, "band_edge_ray_far")?;
    if k == 0 {
        return Err(domain("band_edge_ray_far", "k must be at least 1"));
    }
    let kt = T::from_u32(k).unwrap();
    let gamma = T::c(EULER_GAMMA);
    let big_l = log_one_minus_t(f);
    let two = T::c(2.0);
    let (s, bracket) = match ray {
        Ray::Bond => (k, -two * gamma - two * (kt / two).ln() - big_l - T::LN_2()),
        Ray::Diag => (2 * k, -two * gamma - two * kt.ln() - big_l),
    };
    let pre = edge_prefactor::<T>(s, f);
    Ok(Estimate {
        value: pre * bracket,
        error: pre.abs() / kt,
    })
}

fn mode_scale(cfg: &DefectConfig, mode: &ModeSolution) -> f64 {
    (1.0 - cfg.mass_ratio()) * mode.omega * mode.omega
}

/// Far field of a mode along the defect line, u(n₁, 0) for n₁ well past the defect.
pub fn field_far_parallel(cfg: &DefectConfig, mode: &ModeSolution, n1: i64) -> Result<Estimate<f64>> {
    let f = FrequencyPoint::new(mode.omega)?;
    let scale = mode_scale(cfg, mode);
    let mut acc = Estimate { value: 0.0, error: 0.0 };
    for (p, &u) in mode.eigenvector.iter().enumerate() {
        let g = greens_far_parallel(n1 - p as i64, f)?;
        acc.value += u * g.value;
        acc.error += u.abs() * g.error;
    }
    Ok(Estimate {
        value: scale * acc.value,
        error: scale * acc.error,
    })
}

/// Far field of a mode perpendicular to the defect line, u(p′, n₂).
pub fn field_far_perpendicular(
    cfg: &DefectConfig,
    mode: &ModeSolution,
    p_prime: i64,
    n2: i64,
) -> Result<Estimate<f64>> {
    let f = FrequencyPoint::new(mode.omega)?;
    let scale = mode_scale(cfg, mode);
    let mut acc = Estimate { value: 0.0, error: 0.0 };
    for (p, &u) in mode.eigenvector.iter().enumerate() {
        let g = greens_far_perpendicular(p_prime, n2, p as i64, f)?;
        acc.value += u * g.value;
        acc.error += u.abs() * g.error;
    }
    Ok(Estimate {
        value: scale * acc.value,
        error: scale * acc.error,
    })
}

/// Band-edge approximation of a mode field. `Bond` samples u(k, 0); `Diag` samples
/// u(k, k), where each source p contributes the leading form at offset (k − p, k).
pub fn field_band_edge(cfg: &DefectConfig, mode: &ModeSolution, ray: Ray, k: i64) -> Result<Estimate<f64>> {
    let f = FrequencyPoint::new(mode.omega)?;
    let scale = mode_scale(cfg, mode);
    let mut acc = Estimate { value: 0.0, error: 0.0 };
    for (p, &u) in mode.eigenvector.iter().enumerate() {
        let idx = match ray {
            Ray::Bond => GreensIndex::new(k - p as i64, 0),
            Ray::Diag => GreensIndex::new(k - p as i64, k),
        };
        let g = greens_band_edge_leading(idx, f)?;
        acc.value += u * g.value;
        acc.error += u.abs() * g.error;
    }
    Ok(Estimate {
        value: scale * acc.value,
        error: scale * acc.error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::{greens_auto, greens_hypergeometric, greens_single_integral};
    use crate::specfun::{frak_f, pochhammer, SeriesControl};

    fn fa(alpha: f64) -> FrequencyPoint<f64> {
        FrequencyPoint::from_omega2(2.0 * alpha + 4.0).unwrap()
    }

    #[test]
    fn scaled_coefficients_match_direct_sum() {
        for (m, n) in [(1u32, 0u32), (3, 0), (2, 1), (5, 2)] {
            let v = scaled_tail_coefficients::<f64>(m, n, 12);
            let a = (1.0 + (m + n) as f64) / 2.0;
            let mut fact = 1.0;
            for k in 1..=12u32 {
                if k > 1 {
                    fact *= (k - 1) as f64;
                }
                let direct = fact * frak_f::<f64>(m, n, k) / pochhammer(a, k).unwrap().powi(2);
                assert!(
                    (v[k as usize] - direct).abs() <= 1e-8 * direct.abs().max(1e-12),
                    "({m},{n}) k={k} {} {direct}",
                    v[k as usize]
                );
            }
        }
        assert!(scaled_tail_coefficients::<f64>(3, 3, 50).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn bond_corrections_closed_forms() {
        let ln2 = std::f64::consts::LN_2;
        let pi = std::f64::consts::PI;
        let c1 = edge_correction::<f64>(1, 0, DEFAULT_K_MAX);
        let c2 = edge_correction::<f64>(2, 0, DEFAULT_K_MAX);
        assert!((c1.value - (4.0 * ln2 - pi)).abs() < 5e-9, "{}", c1.value);
        assert!((c2.value - (12.0 - 4.0 * pi)).abs() < 5e-9, "{}", c2.value);
        let c40 = edge_correction::<f64>(40, 0, DEFAULT_K_MAX).value;
        assert!((c40 + ln2).abs() < 1e-3);
    }

    #[test]
    fn continuation_overlaps_hypergeometric() {
        let ctl = SeriesControl::default();
        for alpha in [2.05, 2.1, 2.2, 2.3] {
            for (m, n) in [(0, 0), (1, 0), (3, 1), (2, 2), (3, 3)] {
                let f = fa(alpha);
                let idx = GreensIndex::new(m, n);
                let c = greens_band_edge_continuation(idx, f, DEFAULT_J_MAX, DEFAULT_K_MAX).unwrap();
                let h = greens_hypergeometric(idx, f, &ctl).unwrap();
                assert!(
                    (c.value - h).abs() < 1e-9,
                    "alpha={alpha} ({m},{n}): {} vs {h}",
                    c.value
                );
                assert!(c.error < 1e-8);
            }
        }
    }

    #[test]
    fn continuation_diverges_logarithmically_at_edge() {
        let idx = GreensIndex::new(0, 0);
        let mut prev = 0.0;
        for e in [1e-2, 1e-4, 1e-6, 1e-8] {
            let v = greens_band_edge_continuation(idx, fa(2.0 + e), 40, 2000).unwrap().value;
            assert!(v > prev);
            prev = v;
        }
        assert!(greens_band_edge_continuation(idx, fa(2.0), 40, 2000).is_err());
    }

    #[test]
    fn leading_term_near_single_integral() {
        let f = fa(2.01);
        let idx = GreensIndex::new(1, 0);
        let lead = greens_band_edge_leading(idx, f).unwrap().value;
        let exact = greens_single_integral(idx, f, 1e-13).unwrap();
        assert!(((lead - exact) / exact).abs() < 0.05);
        assert!(greens_band_edge_leading(idx, fa(2.5)).is_err());
    }

    #[test]
    fn ray_sign_structure() {
        for alpha in [2.006, 2.01] {
            let f = fa(alpha);
            let bond: Vec<f64> = (0..8)
                .map(|k| band_edge_ray_forms(Ray::Bond, k, f).unwrap().value)
                .collect();
            for w in bond.windows(2) {
                assert!(w[0] * w[1] < 0.0, "bond signs at {alpha}: {bond:?}");
            }
        }
        // diagonal keeps one sign while k²(α−2) stays small
        for (alpha, kmax) in [(2.006, 7u32), (2.01, 5)] {
            let f = fa(alpha);
            assert!((0..=kmax).all(|k| band_edge_ray_forms(Ray::Diag, k, f).unwrap().value > 0.0));
        }
    }

    #[test]
    fn ray_forms_track_exact_close_to_the_source() {
        let f = fa(2.006);
        for k in 0..=2u32 {
            let lead = band_edge_ray_forms(Ray::Diag, k, f).unwrap().value;
            let exact = greens_auto(GreensIndex::new(k as i64, k as i64), f).unwrap();
            assert!(((lead - exact) / exact).abs() < 0.1, "k={k}");
        }
    }

    #[test]
    fn far_ray_forms_close_at_large_k() {
        let f = fa(2.01);
        for ray in [Ray::Bond, Ray::Diag] {
            let a = band_edge_ray_forms(ray, 30, f).unwrap().value;
            let b = band_edge_ray_far(ray, 30, f).unwrap().value;
            assert!(((a - b) / a).abs() < 0.02);
        }
        let gap = |k: f64| (digamma((1.0 + k) / 2.0).unwrap() - (k / 2.0).ln()).abs();
        assert!(gap(10.0) > gap(30.0) && gap(30.0) > gap(100.0));
    }

    #[test]
    fn far_parallel_accuracy_improves() {
        let f = FrequencyPoint::<f64>::from_omega2(10.0).unwrap();
        let mut prev = f64::INFINITY;
        for m in [5, 10, 20, 40] {
            let a = greens_far_parallel(m, f).unwrap();
            let e = greens_auto(GreensIndex::new(m, 0), f).unwrap();
            let rel = ((a.value - e) / e).abs();
            assert!(rel < prev);
            assert!(a.error >= (a.value - e).abs());
            prev = rel;
            if m == 20 {
                assert!(rel < 0.02);
            }
        }
    }

    #[test]
    fn perpendicular_reduces_to_parallel() {
        let f = FrequencyPoint::<f64>::from_omega2(10.0).unwrap();
        for n2 in 1..30 {
            let a = greens_far_perpendicular(4, n2, 4, f).unwrap().value;
            let b = greens_far_parallel(n2, f).unwrap().value;
            assert_eq!(a, b);
        }
        let e = greens_auto(GreensIndex::new(0, 20), f).unwrap();
        let a = greens_far_perpendicular(0, 20, 0, f).unwrap().value;
        assert!(((a - e) / e).abs() < 0.02);
        let shifted = greens_far_perpendicular(1, 20, 0, f).unwrap().value;
        assert!(shifted * a < 0.0 && shifted.abs() < a.abs());
    }

    #[test]
    fn far_parallel_structure() {
        let f = FrequencyPoint::<f64>::from_omega2(10.0).unwrap();
        let p = FarFieldParams::new(f).unwrap();
        assert!(p.c > 1.0 && p.decay_base.abs() < 1.0);
        let g20 = greens_far_parallel(20, f).unwrap().value;
        let g21 = greens_far_parallel(21, f).unwrap().value;
        let g40 = greens_far_parallel(40, f).unwrap().value;
        assert!(g20 * g21 < 0.0);
        let want = p.decay_base.powi(20) / 2f64.sqrt();
        assert!((g40 / g20 - want).abs() < 1e-12 * want.abs());
    }
}
