//! Globally adaptive 15-point Gauss–Kronrod quadrature.

use crate::error::{Error, Result};
use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
}

#[derive(Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn gk15<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> Segment<T> {
    let half = T::c(0.5);
    let c = half * (a + b);
    let h = half * (b - a);
    let fc = f(c);
    let mut k = fc * T::c(WGK[7]);
    let mut g = fc * T::c(WG[3]);
    for i in 0..7 {
        let dx = h * T::c(XGK[i]);
        let s = f(c - dx) + f(c + dx);
        k = k + T::c(WGK[i]) * s;
        if i % 2 == 1 {
            g = g + T::c(WG[i / 2]) * s;
        }
    }
    let value = k * h;
    // round-off floor keeps the estimate honest on flat segments
    let floor = T::epsilon() * T::c(50.0) * value.abs();
    Segment {
        a,
        b,
        value,
        error: ((k - g) * h).abs().max(floor),
    }
}

/// Integrate `f` over the consecutive intervals given by `breaks` (at least two points)
/// until the summed error estimate drops below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    breaks: &[T],
    abs_tol: T,
    rel_tol: T,
    max_segments: usize,
) -> Result<Estimate<T>> {
    debug_assert!(breaks.len() >= 2);
    let mut segs: Vec<Segment<T>> = breaks.windows(2).map(|w| gk15(&mut f, w[0], w[1])).collect();
    loop {
        let (value, error) = segs
            .iter()
            .fold((T::zero(), T::zero()), |(v, e), s| (v + s.value, e + s.error));
        let tol = abs_tol.max(rel_tol * value.abs());
        if error <= tol {
            return Ok(Estimate { value, error });
        }
        if segs.len() >= max_segments {
            return Err(Error::Tolerance {
                func: "integrate",
                tol: tol.as_f64(),
                estimate: error.as_f64(),
            });
        }
        let (worst, _) =
            segs.iter().enumerate().fold(
                (0, T::zero()),
                |(bi, be), (i, s)| {
                    if s.error > be {
                        (i, s.error)
                    } else {
                        (bi, be)
                    }
                },
            );
        let s = segs.swap_remove(worst);
        let mid = T::c(0.5) * (s.a + s.b);
        if !(mid > s.a && mid < s.b) {
            return Err(Error::Tolerance {
                func: "integrate",
                tol: tol.as_f64(),
                estimate: error.as_f64(),
            });
        }
        segs.push(gk15(&mut f, s.a, mid));
        segs.push(gk15(&mut f, mid, s.b));
    }
}
