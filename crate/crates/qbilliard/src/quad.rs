//! Quadrature primitives: composite Simpson (4th order) and Gauss–Legendre
//! nodes on an interval.

use num_complex::Complex64;

/// Composite Simpson rule with `panels` parabolic panels (2·panels + 1 evals).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let h = (b - a) / (2 * panels) as f64;
    let mut sum = f(a) + f(b);
    for i in 1..2 * panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Complex-valued composite Simpson rule.
pub fn simpson_complex<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, panels: usize) -> Complex64 {
    let panels = panels.max(1);
    let h = (b - a) / (2 * panels) as f64;
    let mut sum = f(a) + f(b);
    for i in 1..2 * panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += f(a + i as f64 * h) * w;
    }
    sum * (h / 3.0)
}

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut pm1 = 1.0;
    let mut p = x;
    for d in 1..n {
        let d = d as f64;
        let next = ((2.0 * d + 1.0) * x * p - d * pm1) / (d + 1.0);
        pm1 = p;
        p = next;
    }
    let d = n as f64 * (x * p - pm1) / (x * x - 1.0);
    (p, d)
}

/// Gauss–Legendre nodes and weights mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        x.iter().map(|&t| mid + half * t).collect(),
        w.iter().map(|&v| v * half).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn simpson_exact_on_cubics() {
        let v = simpson(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 1);
        assert_relative_eq!(v, 2.0, epsilon = 1e-13);
    }

    #[test]
    fn simpson_fourth_order_convergence() {
        let exact = 1.0f64.atan();
        let f = |x: f64| 1.0 / (1.0 + x * x);
        let e1 = (simpson(f, 0.0, 1.0, 4) - exact).abs();
        let e2 = (simpson(f, 0.0, 1.0, 8) - exact).abs();
        let order = (e1 / e2).log2();
        assert!(order > 3.5, "measured order {order}");
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(5);
        // degree 9 is exact for n = 5
        let val: f64 = x.iter().zip(&w).map(|(&t, &wi)| wi * t.powi(8)).sum();
        assert_relative_eq!(val, 2.0 / 9.0, epsilon = 1e-13);
        let sum: f64 = w.iter().sum();
        assert_relative_eq!(sum, 2.0, epsilon = 1e-13);
    }

    #[test]
    fn gauss_legendre_gaussian_integral() {
        let (x, w) = gauss_legendre_on(60, 0.0, 8.0);
        let val: f64 = x
            .iter()
            .zip(&w)
            .map(|(&t, &wi)| wi * t * (-t * t).exp())
            .sum();
        assert_relative_eq!(val, 0.5, epsilon = 1e-12);
    }
}
