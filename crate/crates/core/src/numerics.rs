//! Adaptive Gauss-Kronrod quadrature with caller-supplied breakpoints and a
//! bisection root finder.

use thiserror::Error;

/// Absolute tolerance used for every engine integral.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Recursion budget for adaptive subdivision.
pub const MAX_DEPTH: u32 = 50;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("MaxDepthExceeded: tolerance unattainable within recursion depth {MAX_DEPTH} near x = {at}")]
    MaxDepthExceeded { at: f64 },
    #[error("InvalidInterval: need a <= b and tol > 0 (a = {a}, b = {b}, tol = {tol})")]
    InvalidInterval { a: f64, b: f64, tol: f64 },
    #[error("NoSignChange: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange { f_lo: f64, f_hi: f64 },
    #[error("InvalidBracket: lo = {lo} must be < hi = {hi}")]
    InvalidBracket { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Gauss-Kronrod 7/15 abscissae on [-1, 1] (non-negative half, centre last).
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
    0.209_482_141_084_728,
];
/// Gauss 7-point weights for the odd Kronrod nodes (XGK[1], XGK[3], XGK[5], centre).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Integrates `f` over `[a, b]`, splitting first at every breakpoint.
///
/// Each panel is refined by bisection until the Kronrod/Gauss difference is
/// within its share of `tol` (proportional to width). Panel endpoints are
/// never evaluated, so jumps placed on breakpoints cost nothing extra.
/// Breakpoints outside `(a, b)` are ignored.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: f64, breakpoints: &[f64]) -> Result<QuadResult, NumericsError>
where
    F: Fn(f64) -> f64,
{
    if !(a <= b) || !(tol > 0.0) {
        return Err(NumericsError::InvalidInterval { a, b, tol });
    }
    let mut result = QuadResult { value: 0.0, error_estimate: 0.0, evaluations: 0 };
    if a == b {
        return Ok(result);
    }

    let mut knots: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > a && x < b).collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    knots.insert(0, a);
    knots.push(b);

    let width = b - a;
    for pair in knots.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        refine(&f, lo, hi, tol * (hi - lo) / width, MAX_DEPTH, &mut result)?;
    }
    Ok(result)
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

fn refine<F>(f: &F, a: f64, b: f64, tol: f64, depth: u32, acc: &mut QuadResult) -> Result<(), NumericsError>
where
    F: Fn(f64) -> f64,
{
    let (value, err) = kronrod15(f, a, b);
    acc.evaluations += 15;
    if err <= tol {
        acc.value += value;
        acc.error_estimate += err;
        return Ok(());
    }
    let m = 0.5 * (a + b);
    if depth == 0 || m <= a || m >= b {
        return Err(NumericsError::MaxDepthExceeded { at: m });
    }
    refine(f, a, m, 0.5 * tol, depth - 1, acc)?;
    refine(f, m, b, 0.5 * tol, depth - 1, acc)
}

/// Bisection on a sign-changing bracket, stopping once the bracket is no
/// wider than `tol`. Returns an endpoint directly when `f` vanishes there.
pub fn find_root<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64, NumericsError>
where
    F: Fn(f64) -> f64,
{
    if !(lo < hi) {
        return Err(NumericsError::InvalidBracket { lo, hi });
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(NumericsError::NoSignChange { f_lo: fa, f_hi: fb });
    }
    while b - a > tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_on_unit_interval() {
        let r = integrate(|t| t * t, 0.0, 1.0, 1e-10, &[]).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() <= 1e-10);
        assert!(r.error_estimate <= 1e-10);
    }

    #[test]
    fn step_density_with_breakpoint() {
        let pdf = |t: f64| if (0.0..=0.25).contains(&t) { 4.0 } else { 0.0 };
        let r = integrate(pdf, 0.0, 0.5, 1e-10, &[0.25]).unwrap();
        assert!((r.value - 1.0).abs() <= 1e-10, "{}", r.value);
    }

    #[test]
    fn boarding_integrand_at_reference_scenario() {
        // 4 (0.075 t + t^2 / 2) on [0, 0.1]
        let r = integrate(|t| 4.0 * (0.075 + t), 0.0, 0.1, 1e-12, &[]).unwrap();
        assert!((r.value - 0.05).abs() <= 1e-12);
    }

    #[test]
    fn cubic_exact_on_arbitrary_interval() {
        let f = |t: f64| 2.0 * t * t * t - 3.0 * t * t + t - 7.0;
        let anti = |t: f64| 0.5 * t.powi(4) - t.powi(3) + 0.5 * t * t - 7.0 * t;
        let (a, b) = (-1.3, 2.7);
        let exact = anti(b) - anti(a);
        let r = integrate(f, a, b, 1e-6, &[]).unwrap();
        assert!(((r.value - exact) / exact).abs() <= 1e-12);
        assert_eq!(r.evaluations, 15);
    }

    #[test]
    fn empty_and_invalid_intervals() {
        assert_eq!(integrate(|t| t, 1.0, 1.0, 1e-10, &[]).unwrap().value, 0.0);
        assert!(matches!(
            integrate(|t| t, 1.0, 0.0, 1e-10, &[]),
            Err(NumericsError::InvalidInterval { .. })
        ));
        assert!(matches!(
            integrate(|t| t, 0.0, 1.0, 0.0, &[]),
            Err(NumericsError::InvalidInterval { .. })
        ));
    }

    #[test]
    fn unattainable_tolerance_reports_depth() {
        let jump = |t: f64| if t < 1.0 / 3.0 { 0.0 } else { 1.0 };
        let r = integrate(jump, 0.0, 1.0, 1e-12, &[]);
        assert!(matches!(r, Err(NumericsError::MaxDepthExceeded { .. })));
    }

    #[test]
    fn halving_tol_does_not_worsen() {
        let exact = 1.0 - (-3.0f64).exp();
        let mut last = f64::INFINITY;
        for k in 0..8 {
            let tol = 1e-4 / 2f64.powi(k);
            let e = (integrate(|t| (-t).exp(), 0.0, 3.0, tol, &[]).unwrap().value - exact).abs();
            assert!(e <= last + 1e-16, "tol {tol}: {e} > {last}");
            last = e;
        }
    }

    #[test]
    fn root_of_linear() {
        let x = find_root(|x| x - 0.3, 0.0, 1.0, 1e-9).unwrap();
        assert!((x - 0.3).abs() <= 1e-9);
    }

    #[test]
    fn root_of_cosine_is_half_pi() {
        let x = find_root(f64::cos, 1.0, 2.0, 1e-9).unwrap();
        assert!((x - std::f64::consts::FRAC_PI_2).abs() <= 1e-9);
    }

    #[test]
    fn root_errors() {
        assert!(matches!(
            find_root(|x| x * x, 1.0, 2.0, 1e-9),
            Err(NumericsError::NoSignChange { .. })
        ));
        assert!(matches!(
            find_root(|x| x, 0.0, 0.0, 1e-9),
            Err(NumericsError::InvalidBracket { .. })
        ));
    }

    #[test]
    fn root_is_deterministic() {
        let a = find_root(|x: f64| x.sin() - 0.2, 0.0, 1.0, 1e-12).unwrap();
        let b = find_root(|x: f64| x.sin() - 0.2, 0.0, 1.0, 1e-12).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn exact_for_cubics(
                c in prop::array::uniform4(-5.0f64..5.0),
                a in -10.0f64..10.0,
                w in 0.01f64..10.0,
            ) {
                let b = a + w;
                let f = |t: f64| ((c[3] * t + c[2]) * t + c[1]) * t + c[0];
                let anti = |t: f64| {
                    c[3] * t.powi(4) / 4.0 + c[2] * t.powi(3) / 3.0 + c[1] * t * t / 2.0 + c[0] * t
                };
                let exact = anti(b) - anti(a);
                let r = integrate(f, a, b, 1e-6, &[]).unwrap();
                let scale = exact.abs().max(1.0);
                prop_assert!((r.value - exact).abs() <= 1e-11 * scale);
            }
        }
    }
}
