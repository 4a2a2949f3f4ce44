//! Quadrature rules used throughout the engine.
//!
//! * globally adaptive Gauss–Kronrod (7/15) for real or complex integrands,
//! * Gauss–Jacobi rules for the weight `y^a` on `[0, 1]`,
//! * Gauss–Laguerre rules for the weight `e^{-x}` on `[0, ∞)`,
//! * Gauss–Legendre rules on `[-1, 1]`.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated: real or complex.
pub trait QuadValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

// Kronrod abscissae (descending, last is the centre) and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, &x) in XGK.iter().take(7).enumerate() {
        let pair = f(c - h * x) + f(c + h * x);
        kron = kron + pair * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).magnitude())
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-300,
            rel_tol: 1e-12,
            max_intervals: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub intervals: usize,
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Globally adaptive Gauss–Kronrod quadrature over the consecutive
/// intervals defined by `points` (at least two, strictly increasing).
pub fn integrate<T, F>(f: F, points: &[f64], opts: QuadOptions) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    if points.len() < 2 || points.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Quadrature(format!(
            "breakpoints must be strictly increasing, got {points:?}"
        )));
    }
    let mut heap = BinaryHeap::new();
    for w in points.windows(2) {
        let (value, error) = gk15(&f, w[0], w[1]);
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }
    loop {
        let (total, err) = heap
            .iter()
            .fold((T::default(), 0.0), |(s, e), p| (s + p.value, e + p.error));
        let target = opts.abs_tol.max(opts.rel_tol * total.magnitude());
        if err <= target {
            return Ok(QuadResult {
                value: sum_in_order(&heap),
                error: err,
                intervals: heap.len(),
            });
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::Quadrature(format!(
                "error estimate {err:e} above target {target:e} after {} intervals",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Panel cannot be split further in floating point; accept it.
            return Ok(QuadResult {
                value: sum_in_order(&heap) + worst.value,
                error: err,
                intervals: heap.len() + 1,
            });
        }
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gk15(&f, a, b);
            heap.push(Panel { a, b, value, error });
        }
    }
}

fn sum_in_order<T: QuadValue>(heap: &BinaryHeap<Panel<T>>) -> T {
    let mut panels: Vec<&Panel<T>> = heap.iter().collect();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    panels.iter().fold(T::default(), |s, p| s + p.value)
}

/// Fixed quadrature rule: nodes and weights.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn apply<T: QuadValue, F: Fn(f64) -> T>(&self, f: F) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::default(), |s, (&x, &w)| s + f(x) * w)
    }
}

/// Gauss–Legendre rule on `[-1, 1]` (Newton iteration on the recurrence).
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

/// Golub–Welsch: nodes and weights from a symmetric tridiagonal Jacobi matrix.
fn golub_welsch(diag: &[f64], offdiag: &[f64], mu0: f64) -> Rule {
    let n = diag.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = diag[i];
        if i + 1 < n {
            m[(i, i + 1)] = offdiag[i];
            m[(i + 1, i)] = offdiag[i];
        }
    }
    let eig = SymmetricEigen::new(m);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Gauss rule for `∫_0^1 y^a f(y) dy`, `a > -1`.
pub fn gauss_jacobi_power(n: usize, a: f64) -> Rule {
    assert!(n >= 1 && a > -1.0);
    // Jacobi weight (1-x)^0 (1+x)^a on [-1, 1], then y = (1+x)/2.
    let (al, be) = (0.0_f64, a);
    let diag: Vec<f64> = (0..n)
        .map(|k| {
            let k = k as f64;
            if k == 0.0 {
                (be - al) / (al + be + 2.0)
            } else {
                let s = 2.0 * k + al + be;
                (be * be - al * al) / (s * (s + 2.0))
            }
        })
        .collect();
    let offdiag: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            let s = 2.0 * k + al + be;
            (4.0 * k * (k + al) * (k + be) * (k + al + be) / (s * s * (s + 1.0) * (s - 1.0))).sqrt()
        })
        .collect();
    // mu0 of the [-1,1] weight is 2^(a+1)/(a+1); the map contributes 2^-(a+1).
    let rule = golub_welsch(&diag, &offdiag, 1.0 / (a + 1.0));
    Rule {
        nodes: rule.nodes.iter().map(|x| 0.5 * (1.0 + x)).collect(),
        weights: rule.weights,
    }
}

/// Gauss–Laguerre rule for `∫_0^∞ e^{-x} f(x) dx`.
///
/// Nodes come from Golub–Welsch and are polished by Newton steps on the
/// three-term recurrence; weights use the closed form in `L_{n+1}`.
pub fn gauss_laguerre(n: usize) -> Rule {
    assert!(n >= 1);
    let diag: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 + 1.0).collect();
    let offdiag: Vec<f64> = (1..n).map(|k| k as f64).collect();
    let rough = golub_welsch(&diag, &offdiag, 1.0);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &x0 in &rough.nodes {
        let mut x = x0;
        for _ in 0..4 {
            let (p, dp, _) = laguerre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-15 * x.abs() {
                break;
            }
        }
        let (_, _, pn1) = laguerre(n, x);
        let np1 = (n + 1) as f64;
        nodes.push(x);
        weights.push(x / (np1 * np1 * pn1 * pn1));
    }
    Rule { nodes, weights }
}

/// Returns `(L_n(x), L_n'(x), L_{n+1}(x))`.
fn laguerre(n: usize, x: f64) -> (f64, f64, f64) {
    let (mut l0, mut l1) = (1.0, 1.0 - x);
    for k in 1..n {
        let k = k as f64;
        let l2 = ((2.0 * k + 1.0 - x) * l1 - k * l0) / (k + 1.0);
        l0 = l1;
        l1 = l2;
    }
    // Here l1 = L_n, l0 = L_{n-1}.
    let (ln, lnm1) = if n == 0 { (1.0, 0.0) } else { (l1, l0) };
    let nf = n as f64;
    let dln = nf * (ln - lnm1) / x;
    let lnp1 = ((2.0 * nf + 1.0 - x) * ln - nf * lnm1) / (nf + 1.0);
    (ln, dln, lnp1)
}
