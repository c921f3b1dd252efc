//! Special functions used by the Green's-function representations.
//!
//! Elliptic integrals take the *parameter* `m = k²`, not the modulus. With that
//! convention `g(0,0) = K(4/α²)/(πα)`; the tests pin it against direct quadrature.

use crate::error::{domain, Error, Result};
use crate::scalar::{Real, EULER_GAMMA};

/// Truncation policy for the hypergeometric series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl<T> {
    pub rel_tol: T,
    pub max_terms: usize,
}

impl<T: Real> SeriesControl<T> {
    pub fn new(rel_tol: T, max_terms: usize) -> Result<Self> {
        if !(rel_tol > T::zero() && rel_tol < T::c(1e-3)) {
            return Err(Error::InvalidParameter(format!(
                "rel_tol must lie in (0, 1e-3), got {rel_tol}"
            )));
        }
        if max_terms < 100 {
            return Err(Error::InvalidParameter(format!(
                "max_terms must be at least 100, got {max_terms}"
            )));
        }
        Ok(Self { rel_tol, max_terms })
    }
}

impl<T: Real> Default for SeriesControl<T> {
    fn default() -> Self {
        // 1e-13 is below f32 resolution; clamp to a few ulps there.
        let floor = T::epsilon() * T::c(16.0);
        Self {
            rel_tol: T::c(1e-13).max(floor),
            max_terms: 10_000,
        }
    }
}

/// Complete elliptic integral of the first kind, K(m), via the AGM.
pub fn elliptic_k<T: Real>(m: T) -> Result<T> {
    if !(m >= T::zero() && m < T::one()) {
        return Err(domain("elliptic_k", format!("parameter {m} not in [0, 1)")));
    }
    let (a, _) = agm(T::one(), (T::one() - m).sqrt(), m.sqrt());
    Ok(T::FRAC_PI_2() / a)
}

/// Complete elliptic integral of the second kind, E(m).
pub fn elliptic_e<T: Real>(m: T) -> Result<T> {
    if !(m >= T::zero() && m <= T::one()) {
        return Err(domain("elliptic_e", format!("parameter {m} not in [0, 1]")));
    }
    if m == T::one() {
        return Ok(T::one());
    }
    let (a, csum) = agm(T::one(), (T::one() - m).sqrt(), m.sqrt());
    Ok(T::FRAC_PI_2() / a * (T::one() - csum))
}

// Returns the AGM and sum_n 2^(n-1) c_n^2 used by E.
fn agm<T: Real>(mut a: T, mut b: T, c0: T) -> (T, T) {
    let half = T::c(0.5);
    let mut csum = half * c0 * c0;
    let mut pow = half;
    for _ in 0..64 {
        if (a - b).abs() <= T::epsilon() * a {
            break;
        }
        let c = half * (a - b);
        let an = half * (a + b);
        b = (a * b).sqrt();
        a = an;
        pow = pow + pow;
        csum = csum + pow * c * c;
    }
    (a, csum)
}

/// Modified Bessel function I_n(x).
pub fn bessel_i<T: Real>(order: u32, x: T) -> Result<T> {
    if x > T::c(700.0) {
        return Err(Error::Overflow("bessel_i"));
    }
    let v = bessel_i_scaled(order, x)? * x.exp();
    if !v.is_finite() {
        return Err(Error::Overflow("bessel_i"));
    }
    Ok(v)
}

/// Exponentially scaled e^{-x} I_n(x); never overflows.
pub fn bessel_i_scaled<T: Real>(order: u32, x: T) -> Result<T> {
    if order > 200 {
        return Err(domain("bessel_i", format!("order {order} > 200")));
    }
    if !(x >= T::zero()) {
        return Err(domain("bessel_i", format!("x = {x} < 0")));
    }
    if x == T::zero() {
        return Ok(if order == 0 { T::one() } else { T::zero() });
    }
    if x <= T::c(2.0) {
        return Ok(bessel_series(order, x) * (-x).exp());
    }
    if x > T::c(50.0) {
        if let Some(v) = bessel_hankel(order, x) {
            return Ok(v);
        }
    }
    Ok(bessel_miller(order, x))
}

// Ascending series; all terms positive so no cancellation.
fn bessel_series<T: Real>(n: u32, x: T) -> T {
    let hx = T::c(0.5) * x;
    let mut term = T::one();
    for k in 1..=n {
        term = term * hx / T::from_u32(k).unwrap();
    }
    let q = hx * hx;
    let mut sum = term;
    let mut k = 1u32;
    loop {
        term = term * q / (T::from_u32(k).unwrap() * T::from_u32(k + n).unwrap());
        sum = sum + term;
        if term <= T::epsilon() * sum || k > 500 {
            break;
        }
        k += 1;
    }
    sum
}

// Large-x Hankel expansion of e^{-x} I_n(x); None when it cannot reach full precision.
fn bessel_hankel<T: Real>(n: u32, x: T) -> Option<T> {
    let mu = T::c(4.0) * T::from_u32(n * n).unwrap();
    let mut term = T::one();
    let mut sum = T::one();
    for k in 1..40u32 {
        let odd = T::from_u32(2 * k - 1).unwrap();
        let next = -term * (mu - odd * odd) / (T::from_u32(k).unwrap() * T::c(8.0) * x);
        if next.abs() >= term.abs() && term != T::zero() {
            return None;
        }
        term = next;
        sum = sum + term;
        if term.abs() <= T::epsilon() * sum.abs() {
            return Some(sum / (T::TAU() * x).sqrt());
        }
    }
    None
}

// Downward recurrence normalized by e^x = I_0 + 2 sum I_k.
fn bessel_miller<T: Real>(n: u32, x: T) -> T {
    let big = T::max_value().sqrt();
    let scale = T::one() / big;
    let reach = (n as f64).max(x.as_f64());
    let start = 2 * (reach as usize + 16 + (40.0 * reach).sqrt() as usize);
    let two_over_x = T::c(2.0) / x;
    let mut bip = T::zero();
    let mut bi = T::min_positive_value().sqrt();
    let mut ans = T::zero();
    let mut norm = T::zero();
    for j in (1..=start).rev() {
        let bim = bip + T::from_usize_lossy(j) * two_over_x * bi;
        bip = bi;
        bi = bim;
        if bi > big {
            bi = bi * scale;
            bip = bip * scale;
            ans = ans * scale;
            norm = norm * scale;
        }
        // bi now holds I_{j-1}
        if j - 1 == n as usize {
            ans = bi;
        }
        if j > 1 {
            norm = norm + bi + bi;
        }
    }
    norm = norm + bi;
    ans / norm
}

/// Digamma ψ(x) for x > 0.
pub fn digamma<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) {
        return Err(domain("digamma", format!("x = {x} <= 0")));
    }
    let mut x = x;
    let mut acc = T::zero();
    while x < T::c(10.0) {
        acc = acc - x.recip();
        x = x + T::one();
    }
    // Bernoulli tail: B_2k / (2k x^2k)
    const B: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 120.0,
        1.0 / 252.0,
        -1.0 / 240.0,
        1.0 / 132.0,
        -691.0 / 32760.0,
        1.0 / 12.0,
    ];
    let inv2 = (x * x).recip();
    let mut p = inv2;
    let mut tail = T::zero();
    for b in B {
        tail = tail + T::c(b) * p;
        p = p * inv2;
    }
    Ok(acc + x.ln() - T::c(0.5) / x - tail)
}

/// Euler–Mascheroni constant in the requested precision.
pub fn euler_gamma<T: Real>() -> T {
    T::c(EULER_GAMMA)
}

const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Γ(x) for x > 0 (Lanczos, g = 7).
pub fn ln_gamma<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) {
        return Err(domain("ln_gamma", format!("x = {x} <= 0")));
    }
    if x < T::c(0.5) {
        let s = (T::PI() * x).sin();
        return Ok((T::PI() / s).ln() - ln_gamma(T::one() - x)?);
    }
    let x = x - T::one();
    let mut a = T::c(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a = a + T::c(c) / (x + T::from_usize_lossy(i));
    }
    let t = x + T::c(7.5);
    Ok(T::c(0.5) * T::TAU().ln() + (x + T::c(0.5)) * t.ln() - t + a.ln())
}

/// Γ(x) for x > 0.
pub fn gamma<T: Real>(x: T) -> Result<T> {
    let v = ln_gamma(x)?.exp();
    if !v.is_finite() {
        return Err(Error::Overflow("gamma"));
    }
    Ok(v)
}

/// Rising factorial (a)_k.
pub fn pochhammer<T: Real>(a: T, k: u32) -> Result<T> {
    let mut p = T::one();
    for i in 0..k {
        p = p * (a + T::from_u32(i).unwrap());
        if p == T::zero() {
            return Ok(p);
        }
    }
    if !p.is_finite() {
        return Err(Error::Overflow("pochhammer"));
    }
    Ok(p)
}

/// Plain pFq power series. `z` must lie inside the unit disc unless the series terminates.
pub fn hyp_series<T: Real>(tops: &[T], bots: &[T], z: T, ctl: &SeriesControl<T>) -> Result<T> {
    let mut term = T::one();
    let mut sum = T::one();
    for k in 0..ctl.max_terms {
        let kk = T::from_usize_lossy(k);
        let mut ratio = z / (kk + T::one());
        for &a in tops {
            ratio = ratio * (a + kk);
        }
        for &b in bots {
            ratio = ratio / (b + kk);
        }
        let next = term * ratio;
        if next == T::zero() {
            return Ok(sum);
        }
        if !next.is_finite() {
            return Err(Error::Overflow("hyp_series"));
        }
        term = next;
        sum = sum + term;
        // geometric tail bound once the ratio settles below one
        let q = ratio.abs();
        if q < T::one() && term.abs() * q / (T::one() - q) <= ctl.rel_tol * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        func: "hyp_series",
        terms: ctl.max_terms,
    })
}

/// Regularized ₄F̃₃[a1,a1,a2,a2; b1,b2,b3; z] = ₄F₃ / (Γ(b1)Γ(b2)Γ(b3)).
pub fn hyp_4f3_regularized<T: Real>(a1: T, a2: T, b1: T, b2: T, b3: T, z: T, ctl: &SeriesControl<T>) -> Result<T> {
    if !(z.abs() < T::one()) {
        return Err(domain("hyp_4f3_regularized", format!("|z| = {} >= 1", z.abs())));
    }
    for b in [b1, b2, b3] {
        if !(b > T::zero()) {
            return Err(domain(
                "hyp_4f3_regularized",
                format!("bottom parameter {b} must be positive"),
            ));
        }
    }
    let f = hyp_series(&[a1, a1, a2, a2], &[b1, b2, b3], z, ctl)?;
    let lg = ln_gamma(b1)? + ln_gamma(b2)? + ln_gamma(b3)?;
    Ok(f * (-lg).exp())
}

/// Terminating ₃F₂[a, a, −k; b1, b2; 1], summed exactly over its k+1 terms.
pub fn hyp_3f2_terminating<T: Real>(m_half: T, k: u32, b1: T, b2: T) -> Result<T> {
    for b in [b1, b2] {
        if b <= T::zero() && b == b.round() && (-b).as_f64() < k as f64 {
            return Err(domain(
                "hyp_3f2_terminating",
                format!("bottom parameter {b} vanishes before termination"),
            ));
        }
    }
    let mut term = T::one();
    let mut sum = T::one();
    for i in 0..k {
        let ii = T::from_u32(i).unwrap();
        term = term * (m_half + ii) * (m_half + ii) * (ii - T::from_u32(k).unwrap())
            / ((b1 + ii) * (b2 + ii) * (ii + T::one()));
        sum = sum + term;
    }
    Ok(sum)
}

/// Coefficient 𝔉(m, n, k) = (m)_k (n)_k / k! · ₃F₂[s/2, s/2, −k; m, n; 1], s = m + n,
/// written as a product sum so that n = 0 (bond rays) is covered.
pub fn frak_f<T: Real>(m: u32, n: u32, k: u32) -> T {
    let half_s = T::from_u32(m + n).unwrap() * T::c(0.5);
    let tf = |v: u32| T::from_u32(v).unwrap();
    let mut sum = T::zero();
    for i in 0..=k {
        // ((s/2)_i)^2 (-k)_i / i!  times  (m+i)_{k-i} (n+i)_{k-i}
        let mut t = T::one();
        for l in 0..i {
            t = t * (half_s + tf(l)) * (half_s + tf(l)) * (tf(l) - tf(k)) / tf(l + 1);
        }
        for l in i..k {
            t = t * tf(m + l) * tf(n + l);
        }
        sum = sum + t;
    }
    let mut kf = T::one();
    for l in 1..=k {
        kf = kf * tf(l);
    }
    sum / kf
}
