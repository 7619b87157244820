//! Least-squares helpers shared by mode selection and the diagnostics fits.

/// y ~ slope*x + intercept.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// y ~ a2*x^2 + a1*x + a0.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ParabolaFit {
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
    pub r2: f64,
}

impl ParabolaFit {
    pub fn vertex(&self) -> f64 {
        -self.a1 / (2.0 * self.a2)
    }
}

fn r_squared(y: &[f64], pred: impl Fn(usize) -> f64) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|&v| (v - mean) * (v - mean)).sum();
    let ss_res: f64 = y.iter().enumerate().map(|(i, &v)| (v - pred(i)) * (v - pred(i))).sum();
    if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    }
}

pub(crate) fn fit_line(x: &[f64], y: &[f64]) -> LineFit {
    assert!(x.len() == y.len() && x.len() >= 2, "need two samples for a line");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|&v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = r_squared(y, |i| slope * x[i] + intercept);
    LineFit { slope, intercept, r2 }
}

pub(crate) fn fit_parabola(x: &[f64], y: &[f64]) -> ParabolaFit {
    assert!(x.len() == y.len() && x.len() >= 3, "need three samples for a parabola");
    // Center x for conditioning; un-center the coefficients at the end.
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let t: Vec<f64> = x.iter().map(|&v| v - mx).collect();
    let mut s = [0.0; 5];
    for &v in &t {
        let mut p = 1.0;
        for sk in s.iter_mut() {
            *sk += p;
            p *= v;
        }
    }
    let (mut b0, mut b1, mut b2) = (0.0, 0.0, 0.0);
    for (&v, &yy) in t.iter().zip(y) {
        b0 += yy;
        b1 += yy * v;
        b2 += yy * v * v;
    }
    // Normal equations: rows [s0 s1 s2; s1 s2 s3; s2 s3 s4] * [c0 c1 c2]' = [b0 b1 b2]'.
    let m = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
    let c = solve3(m, [b0, b1, b2]);
    // y = c0 + c1 (x-mx) + c2 (x-mx)^2.
    let a2 = c[2];
    let a1 = c[1] - 2.0 * c[2] * mx;
    let a0 = c[0] - c[1] * mx + c[2] * mx * mx;
    let r2 = r_squared(y, |i| a0 + a1 * x[i] + a2 * x[i] * x[i]);
    ParabolaFit { a2, a1, a0, r2 }
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for k in 0..3 {
        let p = (k..3).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs())).unwrap();
        m.swap(k, p);
        b.swap(k, p);
        for i in k + 1..3 {
            let f = m[i][k] / m[k][k];
            for j in k..3 {
                m[i][j] -= f * m[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = [0.0; 3];
    for k in (0..3).rev() {
        let mut acc = b[k];
        for j in k + 1..3 {
            acc -= m[k][j] * x[j];
        }
        x[k] = acc / m[k][k];
    }
    x
}

/// Golden-section minimum of a unimodal function on [lo, hi].
pub(crate) fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - phi * (hi - lo);
    let mut b = lo + phi * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    while hi - lo > tol {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - phi * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + phi * (hi - lo);
            fb = f(b);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}
