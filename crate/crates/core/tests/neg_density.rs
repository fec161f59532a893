use negfuse_core::distributions::{neg_log_density, neg_log_density_grad};
use negfuse_core::NegParams;

const AXIS: [f64; 3] = [0.1, 1.0, 10.0];

/// Integral of the density over the real line.
///
/// The half line is mapped through `beta = exp(t)` and integrated by
/// composite Simpson on `t` in `[-50, ln B]`. Beyond `B` the density decays
/// like `C beta^-(2 lambda + 1)`, whose tail integral is `f(B) B / (2 lambda)`.
fn total_mass(p: &NegParams) -> f64 {
    let f = |b: f64| neg_log_density(b, p).exp();
    let (lo, hi) = (-50.0_f64, (1e7_f64).ln());
    let n = 40_000;
    let h = (hi - lo) / n as f64;
    let g = |t: f64| {
        let b = t.exp();
        f(b) * b
    };
    let mut acc = g(lo) + g(hi);
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(lo + i as f64 * h);
    }
    let body = acc * h / 3.0;
    let near_zero = f(0.0) * lo.exp();
    let big = hi.exp();
    let tail = f(big) * big / (2.0 * p.lambda());
    2.0 * (near_zero + body + tail)
}

#[test]
fn density_integrates_to_one_on_the_parameter_grid() {
    for &l in &AXIS {
        for &g in &AXIS {
            let p = NegParams::new(l, g).unwrap();
            let mass = total_mass(&p);
            assert!((mass - 1.0).abs() < 1e-6, "lambda {l} gamma {g}: {mass}");
        }
    }
}

#[test]
fn gradient_agrees_with_central_differences() {
    for &l in &AXIS {
        for &g in &AXIS {
            let p = NegParams::new(l, g).unwrap();
            for k in 0..=40 {
                // log-spaced over [0.1, 50]
                let b = 0.1 * (500f64.ln() * k as f64 / 40.0).exp();
                let h = 1e-5 * b;
                let fd = (neg_log_density(b + h, &p) - neg_log_density(b - h, &p)) / (2.0 * h);
                let grad = neg_log_density_grad(b, &p).unwrap();
                let rel = (grad - fd).abs() / grad.abs().max(1e-12);
                assert!(rel < 1e-6, "lambda {l} gamma {g} beta {b}: {grad} vs {fd}");
            }
        }
    }
}

#[test]
fn large_shape_approaches_the_laplace_law() {
    let lambda = 1e4_f64;
    let xi = 1.0;
    let p = NegParams::new(lambda, (2.0 * lambda).sqrt() / xi).unwrap();
    let mut gap = 0.0_f64;
    for i in 0..=1000 {
        let b = -5.0 + 0.01 * i as f64;
        let laplace = 0.5 * xi * (-xi * b.abs()).exp();
        gap = gap.max((neg_log_density(b, &p).exp() - laplace).abs());
    }
    assert!(gap < 1e-2, "sup gap {gap}");
}
