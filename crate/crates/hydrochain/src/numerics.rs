//! Small numerical kernels shared across the crate: Gauss–Legendre
//! quadrature, compensated summation and least-squares line fits.

use std::sync::OnceLock;

/// Order of the base Gauss–Legendre rule.
pub const GL_POINTS: usize = 32;

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre polynomial.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..(n + 1) / 2 {
        // Chebyshev-based initial guess for the k-th root.
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Evaluate P_n and P_n' by the three-term recurrence.
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for j in 2..=n {
            let jf = j as f64;
            let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[k] = -x;
        nodes[n - 1 - k] = x;
        weights[k] = w;
        weights[n - 1 - k] = w;
    }
    (nodes, weights)
}

fn gl_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_POINTS))
}

/// Composite Gauss–Legendre quadrature of a vector-valued integrand over
/// [a, b] split into `panels` equal panels. `f` writes its K components
/// into the scratch slice.
pub fn integrate_panels<const K: usize>(
    f: &mut impl FnMut(f64, &mut [f64; K]),
    a: f64,
    b: f64,
    panels: usize,
) -> [f64; K] {
    let (nodes, weights) = gl_rule();
    let mut acc = [0.0; K];
    let mut vals = [0.0; K];
    let width = (b - a) / panels as f64;
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let half = 0.5 * width;
        let mid = lo + half;
        for (x, w) in nodes.iter().zip(weights) {
            f(mid + half * x, &mut vals);
            for (s, v) in acc.iter_mut().zip(vals) {
                *s += w * half * v;
            }
        }
    }
    acc
}

/// Adaptive composite quadrature: doubles the panel count until two
/// successive levels agree to `rel_tol` on every component.
pub fn integrate_adaptive<const K: usize>(
    f: &mut impl FnMut(f64, &mut [f64; K]),
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<[f64; K], crate::Error> {
    let mut panels = 8;
    let mut prev = integrate_panels(f, a, b, panels);
    loop {
        panels *= 2;
        let next = integrate_panels(f, a, b, panels);
        // Components that vanish by symmetry never settle in a purely
        // relative sense; gauge everything against the dominant component.
        let scale = next
            .iter()
            .chain(prev.iter())
            .fold(1e-300_f64, |acc, v| acc.max(v.abs()));
        let ok = prev.iter().zip(&next).all(|(p, n)| (p - n).abs() <= rel_tol * scale);
        prev = next;
        if ok {
            return Ok(prev);
        }
        if panels > 4096 {
            return Err(crate::Error::QuadratureStall);
        }
    }
}

/// Neumaier compensated sum; keeps round-off near one ulp of the result
/// even under heavy cancellation.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Ordinary least-squares line fit.
#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fit y = a + b x; returns `None` for fewer than two points.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LineFit { slope, intercept: my - slope * mx, r_squared })
}

/// Mean and standard error of a sample.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, f64::INFINITY);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}
