//! Globally adaptive Gauss-Kronrod (7/15) quadrature for complex integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

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
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for k in 0..7 {
        let dx = h * XGK[k];
        let s = f(c - dx) + f(c + dx);
        kronrod += s * WGK[k];
        if k % 2 == 1 {
            gauss += s * WG[k / 2];
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).norm())
}

struct Piece {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[a, b]`, bisecting the worst interval until the summed
/// error estimate is below `tol`. `initial` equal pieces seed the refinement.
pub fn integrate<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    initial: usize,
    max_pieces: usize,
) -> Result<QuadratureResult> {
    let n0 = initial.max(1);
    let mut heap = BinaryHeap::with_capacity(2 * n0);
    let mut evaluations = 0;
    for k in 0..n0 {
        let lo = a + (b - a) * k as f64 / n0 as f64;
        let hi = a + (b - a) * (k + 1) as f64 / n0 as f64;
        let (value, error) = gk15(&mut f, lo, hi);
        evaluations += 15;
        heap.push(Piece { a: lo, b: hi, value, error });
    }
    loop {
        let total_err: f64 = heap.iter().map(|p| p.error).sum();
        if !total_err.is_finite() {
            return Err(Error::QuadratureNonConvergence { error: total_err });
        }
        if total_err <= tol {
            let value = heap.iter().map(|p| p.value).sum();
            return Ok(QuadratureResult { value, error: total_err, evaluations });
        }
        if heap.len() >= max_pieces {
            return Err(Error::QuadratureNonConvergence { error: total_err });
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gk15(&mut f, lo, hi);
            evaluations += 15;
            heap.push(Piece { a: lo, b: hi, value, error });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| Complex64::new(x.powi(5), -x * x), 0.0, 2.0, 1e-13, 1, 10).unwrap();
        assert!((r.value.re - 64.0 / 6.0).abs() < 1e-12);
        assert!((r.value.im + 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn log_singularity_converges() {
        // integral of ln x over (0,1] is -1
        let r = integrate(|x| Complex64::new(x.ln(), 0.0), 0.0, 1.0, 1e-11, 4, 2000).unwrap();
        assert!((r.value.re + 1.0).abs() < 1e-10, "{:?}", r.value);
    }

    #[test]
    fn arctangent_on_half_line() {
        // int_{-inf}^0 dt / (t^2 + 1) = pi / 2 after t = 1 - 1/s
        let r = integrate(
            |s| {
                let t = 1.0 - 1.0 / s;
                Complex64::new(1.0 / ((t * t + 1.0) * s * s), 0.0)
            },
            0.0,
            1.0,
            1e-12,
            8,
            4000,
        )
        .unwrap();
        assert!((r.value.re - std::f64::consts::FRAC_PI_2).abs() < 1e-11);
    }
}
