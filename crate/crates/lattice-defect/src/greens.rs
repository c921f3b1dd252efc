//! Stop-band lattice Green's function g(m, n₂; ω) of the square lattice.
//!
//! Four interchangeable evaluators: the defining double integral, the single
//! integral (production path), the Bessel integral and the ₄F₃ series. All of
//! them canonicalize the index first, so g(m,n) = g(|m|,|n|) = g(|n|,|m|) holds
//! bit-for-bit.

use crate::error::{domain, Error, Result};
use crate::quadrature::integrate;
use crate::scalar::Real;
use crate::specfun::{bessel_i_scaled, elliptic_e, elliptic_k, hyp_series, SeriesControl};

/// Below this α the hypergeometric series is too slow and `greens_auto` integrates instead.
pub const HYPER_ALPHA_MIN: f64 = 2.2;

/// Absolute accuracy `greens_auto` promises per entry.
pub const AUTO_ABS_TOL: f64 = 1e-10;

/// A radian frequency with its derived α = ω²/2 − 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyPoint<T> {
    omega: T,
    omega2: T,
    alpha: T,
    in_stop_band: bool,
}

impl<T: Real> FrequencyPoint<T> {
    pub fn new(omega: T) -> Result<Self> {
        if !(omega > T::zero() && omega.is_finite()) {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
        }
        Ok(Self::build(omega, omega * omega))
    }

    /// Build from ω² directly; avoids a square-root round trip near the band edge.
    pub fn from_omega2(omega2: T) -> Result<Self> {
        if !(omega2 > T::zero() && omega2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "omega^2 must be positive, got {omega2}"
            )));
        }
        Ok(Self::build(omega2.sqrt(), omega2))
    }

    fn build(omega: T, omega2: T) -> Self {
        let alpha = omega2 * T::c(0.5) - T::c(2.0);
        Self {
            omega,
            omega2,
            alpha,
            in_stop_band: alpha > T::c(2.0),
        }
    }

    pub fn omega(&self) -> T {
        self.omega
    }
    pub fn omega2(&self) -> T {
        self.omega2
    }
    pub fn alpha(&self) -> T {
        self.alpha
    }
    pub fn in_stop_band(&self) -> bool {
        self.in_stop_band
    }

    /// α − 2 computed without cancellation.
    pub fn alpha_minus_2(&self) -> T {
        (self.omega2 - T::c(8.0)) * T::c(0.5)
    }

    fn require_stop_band(&self, func: &'static str) -> Result<()> {
        if self.in_stop_band {
            Ok(())
        } else {
            Err(domain(
                func,
                format!("omega^2 = {} is not in the stop band (> 8)", self.omega2),
            ))
        }
    }
}

/// Offset (m = n₁ − p, n₂) into the shifted Green's matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GreensIndex {
    pub m: i64,
    pub n2: i64,
}

impl GreensIndex {
    pub fn new(m: i64, n2: i64) -> Self {
        Self { m, n2 }
    }

    /// (max, min) of the absolute offsets. Every evaluator starts here.
    pub fn canonical(&self) -> (u32, u32) {
        let (a, b) = (self.m.unsigned_abs() as u32, self.n2.unsigned_abs() as u32);
        (a.max(b), a.min(b))
    }
}

fn sign<T: Real>(k: u32) -> T {
    if k.is_multiple_of(2) {
        T::one()
    } else {
        -T::one()
    }
}

/// Quadrature of the defining double integral over [0,π]². Slow reference.
pub fn greens_double_integral<T: Real>(idx: GreensIndex, f: FrequencyPoint<T>, abs_tol: T) -> Result<T> {
    f.require_stop_band("greens_double_integral")?;
    let (m, n) = idx.canonical();
    let (mt, nt) = (T::from_u32(m).unwrap(), T::from_u32(n).unwrap());
    let two = T::c(2.0);
    let shift = two * f.alpha();
    let pi = T::PI();
    let scale = pi * pi;
    let inner_tol = abs_tol * scale / (T::c(4.0) * pi);
    let mut failure = None;
    let outer = integrate(
        |x2: T| {
            let d2 = shift + two * x2.cos();
            let inner = integrate(
                |x1: T| (mt * x1).cos() / (d2 + two * x1.cos()),
                &[T::zero(), T::FRAC_PI_2(), pi],
                inner_tol,
                T::zero(),
                400,
            );
            match inner {
                Ok(v) => v.value * (nt * x2).cos(),
                Err(e) => {
                    failure.get_or_insert(e);
                    T::zero()
                }
            }
        },
        &[T::zero(), T::FRAC_PI_2(), pi],
        abs_tol * scale / T::c(2.0),
        T::zero(),
        400,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(outer?.value / scale)
}

/// Single-integral representation; the production evaluator near the band edge.
///
/// With u = π − ξ the kernel peaks at u = 0 with width √(2(α−2)); the substitution
/// u = h·sinh τ, h = √(2(α−2)), flattens that peak so the quadrature sees a smooth integrand.
pub fn greens_single_integral<T: Real>(idx: GreensIndex, f: FrequencyPoint<T>, abs_tol: T) -> Result<T> {
    f.require_stop_band("greens_single_integral")?;
    let (m, n) = idx.canonical();
    let delta = f.alpha_minus_2();
    let two = T::c(2.0);
    let h = (two * delta).sqrt();
    let tau_max = (T::PI() / h).asinh();
    let nt = T::from_u32(n).unwrap();
    let integrand = |tau: T| {
        let u = h * tau.sinh();
        let s = (u * T::c(0.5)).sin();
        let am1 = delta + two * s * s;
        let root = (am1 * (am1 + two)).sqrt();
        let base = T::one() + am1 + root;
        (nt * u).cos() * base.powi(-(m as i32)) / root * h * tau.cosh()
    };
    let pieces: Vec<T> = (0..=6).map(|i| tau_max * T::from_u32(i).unwrap() / T::c(6.0)).collect();
    let r = integrate(integrand, &pieces, abs_tol * T::TAU(), T::zero(), 2000)?;
    Ok(sign::<T>(m + n) * r.value / T::TAU())
}

/// Bessel-integral representation (−1)^{m+n₂}/2 ∫₀^∞ I_m I_{n₂} e^{−αx} dx.
pub fn greens_bessel_integral<T: Real>(idx: GreensIndex, f: FrequencyPoint<T>, abs_tol: T) -> Result<T> {
    f.require_stop_band("greens_bessel_integral")?;
    let (m, n) = idx.canonical();
    let delta = f.alpha_minus_2();
    // tail ≤ ½∫_X^∞ e^{−δx}dx using e^{−x} I_k(x) ≤ 1
    let x_max = (T::c(2.0) / (delta * abs_tol)).ln() / delta;
    let n_seg = (x_max / T::c(10.0)).ceil().as_f64().clamp(4.0, 4000.0) as usize;
    let breaks: Vec<T> = (0..=n_seg)
        .map(|i| x_max * T::from_usize_lossy(i) / T::from_usize_lossy(n_seg))
        .collect();
    let mut failure = None;
    let r = integrate(
        |x: T| {
            let im = bessel_i_scaled(m, x);
            let i_n = bessel_i_scaled(n, x);
            match (im, i_n) {
                (Ok(a), Ok(b)) => a * b * (-delta * x).exp(),
                (Err(e), _) | (_, Err(e)) => {
                    failure.get_or_insert(e);
                    T::zero()
                }
            }
        },
        &breaks,
        abs_tol,
        T::zero(),
        20_000,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(sign::<T>(m + n) * T::c(0.5) * r?.value)
}

/// Hypergeometric representation, convergent for α > 2.
///
/// ((m+n₂)!)² ₄F̃₃ is evaluated as binom(m+n₂, m) · ₄F₃, the same number without
/// the Gamma-function overflow.
pub fn greens_hypergeometric<T: Real>(idx: GreensIndex, f: FrequencyPoint<T>, ctl: &SeriesControl<T>) -> Result<T> {
    f.require_stop_band("greens_hypergeometric")?;
    let (m, n) = idx.canonical();
    let s = m + n;
    let st = T::from_u32(s).unwrap();
    let half = T::c(0.5);
    let a1 = (T::one() + st) * half;
    let a2 = (T::c(2.0) + st) * half;
    let b1 = T::one() + T::from_u32(m).unwrap();
    let b2 = T::one() + T::from_u32(n).unwrap();
    let b3 = T::one() + st;
    let alpha = f.alpha();
    let z = T::c(4.0) / (alpha * alpha);
    let series = hyp_series(&[a1, a1, a2, a2], &[b1, b2, b3], z, ctl)?;
    let mut binom = T::one();
    for i in 1..=n {
        binom = binom * T::from_u32(m + i).unwrap() / T::from_u32(i).unwrap();
    }
    let pre = sign::<T>(s) * binom / (T::c(2.0) * alpha).powi(1 + s as i32);
    Ok(pre * series)
}

/// Cheapest representation that meets `AUTO_ABS_TOL`.
pub fn greens_auto<T: Real>(idx: GreensIndex, f: FrequencyPoint<T>) -> Result<T> {
    f.require_stop_band("greens_auto")?;
    if f.alpha() >= T::c(HYPER_ALPHA_MIN) {
        greens_hypergeometric(idx, f, &SeriesControl::default())
    } else {
        greens_single_integral(idx, f, T::c(1e-12).max(T::epsilon() * T::c(8.0)))
    }
}

/// g(0,0), K-seeded closed form.
pub fn greens_origin_closed_form<T: Real>(f: FrequencyPoint<T>) -> Result<T> {
    f.require_stop_band("greens_origin_closed_form")?;
    let a = f.alpha();
    Ok(elliptic_k(T::c(4.0) / (a * a))? / (T::PI() * a))
}

/// g(0,0), g(1,0), …, g(max_m,0) from the lattice equation, seeded by the K/E closed
/// forms and marched one anti-diagonal at a time. The last entry is re-checked
/// against `greens_auto`; a deviation above 1e-9 is reported as instability.
pub fn greens_row_recurrence<T: Real>(max_m: usize, f: FrequencyPoint<T>) -> Result<Vec<T>> {
    f.require_stop_band("greens_row_recurrence")?;
    if max_m > 64 {
        return Err(Error::InvalidParameter(format!("max_m = {max_m} exceeds 64")));
    }
    let a = f.alpha();
    let two = T::c(2.0);
    let t = T::c(4.0) / (a * a);
    let k = elliptic_k(t)?;
    let e = elliptic_e(t)?;
    let g00 = k / (T::PI() * a);
    let g10 = T::c(0.25) - k / T::TAU();
    let g20 = g00 - a * T::c(0.5) + a / T::PI() * e;
    let g11 = -(g20 + g00 + two * a * g10) * T::c(0.5);

    // tri[m][n] = g(m, n) for n ≤ m
    let levels = max_m.max(2);
    let mut tri: Vec<Vec<T>> = (0..=levels).map(|m| vec![T::zero(); m + 1]).collect();
    tri[0][0] = g00;
    tri[1][0] = g10;
    tri[1][1] = g11;
    tri[2][0] = g20;

    // diagonal via (2n+1) g_{n+1,n+1} = 2n(α²−2) g_{n,n} − (2n−1) g_{n−1,n−1}
    let mut diag = vec![g00, g11];
    let z4 = two * (a * a - two);
    while diag.len() <= levels / 2 + 1 {
        let n = diag.len() - 1;
        let nt = T::from_usize_lossy(n);
        let next = (z4 * nt * diag[n] - (two * nt - T::one()) * diag[n - 1]) / (two * nt + T::one());
        diag.push(next);
    }

    let get = |tri: &Vec<Vec<T>>, m: i64, n: i64| -> T {
        let (p, q) = (m.unsigned_abs() as usize, n.unsigned_abs() as usize);
        let (p, q) = (p.max(q), p.min(q));
        tri[p][q]
    };

    for s in 2..levels {
        let s1 = s + 1;
        if s1 % 2 == 0 {
            let kk = s1 / 2;
            tri[kk][kk] = diag[kk];
            for j in (0..=(s - 1) / 2).rev() {
                let (p, q) = ((s - j) as i64, j as i64);
                let v = -(get(&tri, p - 1, q) + get(&tri, p, q + 1) + get(&tri, p, q - 1) + two * a * get(&tri, p, q));
                tri[s1 - j][j] = v;
            }
        } else {
            let kk = s / 2;
            let ki = kk as i64;
            tri[kk + 1][kk] = -(get(&tri, ki, ki - 1) + a * get(&tri, ki, ki));
            for j in (0..kk).rev() {
                let (p, q) = ((s - j) as i64, j as i64);
                let v = -(get(&tri, p - 1, q) + get(&tri, p, q + 1) + get(&tri, p, q - 1) + two * a * get(&tri, p, q));
                tri[s1 - j][j] = v;
            }
        }
    }

    let row: Vec<T> = (0..=max_m).map(|m| tri[m][0]).collect();
    if max_m >= 3 {
        let check = greens_auto(GreensIndex::new(max_m as i64, 0), f)?;
        let dev = (check - row[max_m]).abs();
        if !(dev <= T::c(1e-9)) {
            return Err(Error::Instability {
                index: max_m,
                deviation: dev.as_f64(),
            });
        }
    }
    Ok(row)
}
