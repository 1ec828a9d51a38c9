//! Gauss-Legendre rules and a globally adaptive bisection integrator.

use num_complex::Complex64;

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule; nodes by Newton iteration on the three-term recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate<T: Integrand>(&self, f: &impl Fn(f64) -> T, a: f64, b: f64) -> T {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(c + r * x).scale(w * r);
        }
        acc
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Values an integrator can accumulate.
pub trait Integrand: Copy + std::ops::Add<Output = Self> + std::ops::Sub<Output = Self> {
    fn zero() -> Self;
    fn scale(self, s: f64) -> Self;
    fn magnitude(self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Adaptive integration of `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Each interval is accepted when its 15-point Gauss value agrees with the
/// sum over its two halves. Integrable endpoint singularities such as
/// `log x` are handled by repeated bisection toward the endpoint.
pub fn adaptive<T: Integrand>(f: impl Fn(f64) -> T, a: f64, b: f64, tol: f64) -> T {
    let rule = GaussLegendre::new(15);
    let whole = rule.integrate(&f, a, b);
    recurse(&rule, &f, a, b, whole, tol, 0)
}

fn recurse<T: Integrand>(
    rule: &GaussLegendre,
    f: &impl Fn(f64) -> T,
    a: f64,
    b: f64,
    whole: T,
    tol: f64,
    depth: usize,
) -> T {
    let m = 0.5 * (a + b);
    let left = rule.integrate(f, a, m);
    let right = rule.integrate(f, m, b);
    let halves = left + right;
    let err = (halves - whole).magnitude();
    // below the rounding floor further bisection cannot help
    let floor = 64.0 * f64::EPSILON * (left.magnitude() + right.magnitude());
    if err <= tol.max(floor) || depth >= 60 || m <= a || m >= b {
        return halves;
    }
    recurse(rule, f, a, m, left, 0.5 * tol, depth + 1)
        + recurse(rule, f, m, b, right, 0.5 * tol, depth + 1)
}
