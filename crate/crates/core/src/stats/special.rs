//! Special functions and distribution tails.

use std::f64::consts::{PI, SQRT_2};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

const EPS: f64 = 1e-15;
const MAX_ITER: usize = 500;

/// Natural log of the gamma function (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
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
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + G + 0.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Standard normal CDF.
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

pub fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Regularized incomplete beta I_x(a, b) by continued fraction.
pub fn beta_reg(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_cf(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_cf(b, a, 1.0 - x) / b
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Upper tail P(F > f) of the F distribution.
pub fn f_sf(f: f64, d1: f64, d2: f64) -> f64 {
    if f.is_nan() {
        return f64::NAN;
    }
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    beta_reg(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))
}

/// Two-sided tail P(|T| > |t|) of Student's t.
pub fn t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    beta_reg(df / 2.0, 0.5, df / (df + t * t))
}

/// Gauss-Legendre nodes and weights on [-1, 1].
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let j = j as f64;
                let p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn nodes() -> &'static [(f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| gauss_legendre(20))
}

/// Composite Gauss-Legendre over `pieces` equal subintervals.
fn integrate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, pieces: usize) -> f64 {
    let h = (hi - lo) / pieces as f64;
    let mut total = 0.0;
    for p in 0..pieces {
        let a = lo + p as f64 * h;
        let mid = a + h / 2.0;
        for &(x, w) in nodes() {
            total += w * f(mid + x * h / 2.0);
        }
    }
    total * h / 2.0
}

/// CDF of the range of `k` standard normals.
fn range_cdf_normal(q: f64, k: f64) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    let inner = |z: f64| {
        let d = norm_cdf(z) - norm_cdf(z - q);
        if d <= 0.0 {
            0.0
        } else {
            norm_pdf(z) * d.powf(k - 1.0)
        }
    };
    (k * integrate(inner, -8.5, 8.5, 12)).clamp(0.0, 1.0)
}

/// CDF of the studentized range for `k` means and `df` error degrees of
/// freedom.
pub fn ptukey(q: f64, k: usize, df: f64) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    let k = k as f64;
    if df > 25_000.0 {
        return range_cdf_normal(q, k);
    }
    // density of s = sqrt(chi2_df / df)
    let ln_c = (df / 2.0) * df.ln() - ln_gamma(df / 2.0) - (df / 2.0 - 1.0) * 2f64.ln();
    let density = |s: f64| {
        if s <= 0.0 {
            0.0
        } else {
            (ln_c + (df - 1.0) * s.ln() - df * s * s / 2.0).exp()
        }
    };
    let spread = 10.0 / (2.0 * df).sqrt();
    let lo = (1.0 - spread).max(0.0);
    let hi = 1.0 + spread + 6.0 / df;
    integrate(|s| density(s) * range_cdf_normal(q * s, k), lo, hi, 12).clamp(0.0, 1.0)
}

/// Critical value of the studentized range at level `alpha`, by bisection.
/// Results are memoized per `(alpha, k, df)`.
pub fn q_crit(alpha: f64, k: usize, df: f64) -> f64 {
    type Cache = Mutex<HashMap<(u64, usize, u64), f64>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let key = (alpha.to_bits(), k, df.to_bits());
    let cache = CACHE.get_or_init(Default::default);
    if let Some(&q) = cache.lock().expect("q_crit cache").get(&key) {
        return q;
    }
    let q = solve_q_crit(alpha, k, df);
    cache.lock().expect("q_crit cache").insert(key, q);
    q
}

fn solve_q_crit(alpha: f64, k: usize, df: f64) -> f64 {
    let target = 1.0 - alpha;
    let (mut lo, mut hi) = (0.0, 1.0);
    while ptukey(hi, k, df) < target {
        hi *= 2.0;
        if hi > 1e4 {
            break;
        }
    }
    while hi - lo > 1e-5 {
        let mid = (lo + hi) / 2.0;
        if ptukey(mid, k, df) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / 2.0
}
