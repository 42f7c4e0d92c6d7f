//! Small dense linear-algebra helpers shared by the physics modules.
//!
//! Quadrature rules are generated by Golub-Welsch (eigenvalues of the Jacobi
//! matrix of the orthogonal-polynomial recurrence), periodic derivatives by
//! the trigonometric differentiation matrix, and matrix exponentials by
//! Pade-13 scaling and squaring.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Nodes and weights of an n-point Gauss rule on the real line.
#[derive(Debug, Clone)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Golub-Welsch: nodes are eigenvalues of the symmetric tridiagonal Jacobi
/// matrix with off-diagonal `beta`, weights are `mu0 * v0^2` with `v0` the
/// first component of each normalized eigenvector.
fn golub_welsch(beta: &[f64], mu0: f64) -> QuadRule {
    let n = beta.len() + 1;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for (k, &b) in beta.iter().enumerate() {
        jac[(k, k + 1)] = b;
        jac[(k + 1, k)] = b;
    }
    let eig = jac.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    QuadRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Gauss-Hermite rule for weight exp(-x^2) on (-inf, inf).
///
/// Exact for polynomials of degree <= 2n - 1 against the weight.
pub fn gauss_hermite(n: usize) -> QuadRule {
    assert!(n >= 1, "need at least one node");
    let beta: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    golub_welsch(&beta, std::f64::consts::PI.sqrt())
}

/// Gauss-Legendre rule for weight 1 on [-1, 1].
pub fn gauss_legendre(n: usize) -> QuadRule {
    assert!(n >= 1, "need at least one node");
    let beta: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    golub_welsch(&beta, 2.0)
}

/// Scheme used for periodic spatial derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DerivScheme {
    /// Trigonometric (spectral) differentiation matrix; exact for resolved modes.
    #[default]
    Spectral,
    /// Fourth-order centered finite differences with periodic wrap.
    Centered4,
}

/// Dense trigonometric differentiation matrix for n equispaced points on a
/// periodic domain of the given length.
pub fn spectral_diff_matrix(n: usize, length: f64) -> DMatrix<f64> {
    assert!(n >= 2);
    let scale = 2.0 * std::f64::consts::PI / length;
    let mut d = DMatrix::<f64>::zeros(n, n);
    let h = std::f64::consts::PI / n as f64;
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            let diff = j as isize - k as isize;
            let sign = if diff % 2 == 0 { 1.0 } else { -1.0 };
            let arg = h * diff as f64;
            d[(j, k)] = if n % 2 == 0 {
                0.5 * sign / arg.tan() * scale
            } else {
                0.5 * sign / arg.sin() * scale
            };
        }
    }
    d
}

/// Periodic derivative of equispaced samples.
pub fn periodic_derivative(values: &[f64], length: f64, scheme: DerivScheme) -> Vec<f64> {
    let n = values.len();
    match scheme {
        DerivScheme::Spectral => {
            let d = spectral_diff_matrix(n, length);
            let v = nalgebra::DVector::from_column_slice(values);
            (d * v).iter().copied().collect()
        }
        DerivScheme::Centered4 => {
            let h = length / n as f64;
            (0..n)
                .map(|j| {
                    let at = |off: isize| values[(j as isize + off).rem_euclid(n as isize) as usize];
                    (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) / (12.0 * h)
                })
                .collect()
        }
    }
}

/// Max absolute column sum.
pub fn norm_1(a: &DMatrix<f64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by Pade-13 approximation with scaling and squaring.
pub fn expm(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    const THETA_13: f64 = 5.371920351148152;
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("non-finite entry passed to expm".into()));
    }
    let norm = norm_1(a);
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let a = a / 2f64.powi(s as i32);
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let u_inner = &a6 * (B[13] * &a6 + B[11] * &a4 + B[9] * &a2)
        + B[7] * &a6
        + B[5] * &a4
        + B[3] * &a2
        + B[1] * &id;
    let u = &a * u_inner;
    let v = &a6 * (B[12] * &a6 + B[10] * &a4 + B[8] * &a2)
        + B[6] * &a6
        + B[4] * &a4
        + B[2] * &a2
        + B[0] * &id;
    let denom = &v - &u;
    let numer = &v + &u;
    let mut e = denom
        .lu()
        .solve(&numer)
        .ok_or_else(|| Error::Numerical("singular Pade denominator in expm".into()))?;
    for _ in 0..s {
        e = &e * &e;
    }
    if e.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical(
            "overflow in matrix exponential (t too large for this operator)".into(),
        ));
    }
    Ok(e)
}

/// Ordinary least squares for y = slope * x + intercept.
///
/// Returns (slope, intercept, rms residual). Needs at least three points for
/// a meaningful residual.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return Err(Error::InvalidInput(format!(
            "line fit needs >= 2 matched points, got {} and {}",
            n,
            ys.len()
        )));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("degenerate abscissae in line fit".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    Ok((slope, intercept, (ss / nf).sqrt()))
}

/// Log-log slope fit; all values must be positive.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.iter().chain(ys).any(|&v| v <= 0.0 || !v.is_finite()) {
        return Err(Error::InvalidInput(
            "log-log fit needs strictly positive finite data".into(),
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    fit_line(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hermite_low_moments() {
        // Against exp(-x^2): integral of 1 is sqrt(pi), of x^2 is sqrt(pi)/2,
        // of x^4 is 3 sqrt(pi)/4.
        let rule = gauss_hermite(8);
        let sp = std::f64::consts::PI.sqrt();
        let m0: f64 = rule.weights.iter().sum();
        let m2: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x * x)
            .sum();
        let m4: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x.powi(4))
            .sum();
        assert_relative_eq!(m0, sp, max_relative = 1e-13);
        assert_relative_eq!(m2, sp / 2.0, max_relative = 1e-13);
        assert_relative_eq!(m4, 3.0 * sp / 4.0, max_relative = 1e-13);
    }

    #[test]
    fn hermite_degree_exactness() {
        // n nodes integrate x^(2n-2) exactly: moment of exp(-x^2) is
        // (2k-1)!! sqrt(pi) / 2^k for x^(2k).
        let n = 5;
        let rule = gauss_hermite(n);
        let k = n - 1; // degree 2n-2 = 8
        let mut dfact = 1.0;
        let mut i = 2 * k - 1;
        while i >= 2 {
            dfact *= i as f64;
            i -= 2;
        }
        let exact = dfact * std::f64::consts::PI.sqrt() / 2f64.powi(k as i32);
        let got: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x.powi(2 * k as i32))
            .sum();
        assert_relative_eq!(got, exact, max_relative = 1e-12);
    }

    #[test]
    fn legendre_polynomial_exactness() {
        let rule = gauss_legendre(6);
        let m0: f64 = rule.weights.iter().sum();
        let m2: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x * x)
            .sum();
        let m10: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x.powi(10))
            .sum();
        assert_relative_eq!(m0, 2.0, max_relative = 1e-14);
        assert_relative_eq!(m2, 2.0 / 3.0, max_relative = 1e-13);
        assert_relative_eq!(m10, 2.0 / 11.0, max_relative = 1e-13);
    }

    #[test]
    fn spectral_derivative_of_sine_even_and_odd_n() {
        for n in [16usize, 17] {
            let length = 2.5;
            let xs: Vec<f64> = (0..n).map(|j| length * j as f64 / n as f64).collect();
            let k = 2.0 * std::f64::consts::PI / length;
            let f: Vec<f64> = xs.iter().map(|x| (k * x).sin()).collect();
            let df = periodic_derivative(&f, length, DerivScheme::Spectral);
            for (x, d) in xs.iter().zip(&df) {
                assert_relative_eq!(*d, k * (k * x).cos(), epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn centered4_derivative_converges() {
        let length = 1.0;
        let k = 2.0 * std::f64::consts::PI / length;
        let err = |n: usize| {
            let xs: Vec<f64> = (0..n).map(|j| length * j as f64 / n as f64).collect();
            let f: Vec<f64> = xs.iter().map(|x| (k * x).sin()).collect();
            let df = periodic_derivative(&f, length, DerivScheme::Centered4);
            xs.iter()
                .zip(&df)
                .map(|(x, d)| (d - k * (k * x).cos()).abs())
                .fold(0.0, f64::max)
        };
        let e1 = err(32);
        let e2 = err(64);
        let order = (e1 / e2).log2();
        assert!((order - 4.0).abs() < 0.2, "observed order {order}");
    }

    #[test]
    fn expm_matches_closed_forms() {
        // Diagonal.
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 0.5, 2.0]));
        let e = expm(&a).unwrap();
        for (i, lam) in [-1.0f64, 0.5, 2.0].iter().enumerate() {
            assert_relative_eq!(e[(i, i)], lam.exp(), max_relative = 1e-13);
        }
        // Jordan-like 2x2 with distinct eigenvalues -1, -2:
        // exp([[-1, 1], [0, -2]]) = [[e^-1, e^-1 - e^-2], [0, e^-2]].
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 0.0, -2.0]);
        let e = expm(&a).unwrap();
        assert_relative_eq!(e[(0, 0)], (-1f64).exp(), max_relative = 1e-13);
        assert_relative_eq!(e[(0, 1)], (-1f64).exp() - (-2f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(e[(1, 0)], 0.0, epsilon = 1e-15);
        assert_relative_eq!(e[(1, 1)], (-2f64).exp(), max_relative = 1e-13);
        // Rotation block: exp([[0, -t], [t, 0]]) = rotation by t.
        let t = 0.7;
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -t, t, 0.0]);
        let e = expm(&a).unwrap();
        assert_relative_eq!(e[(0, 0)], t.cos(), max_relative = 1e-13);
        assert_relative_eq!(e[(1, 0)], t.sin(), max_relative = 1e-13);
        // Large norm forces the squaring phase.
        let a = DMatrix::from_row_slice(2, 2, &[-40.0, 35.0, 0.0, -60.0]);
        let e = expm(&a).unwrap();
        let exact01 = 35.0 / 20.0 * ((-40f64).exp() - (-60f64).exp());
        assert_relative_eq!(e[(0, 1)], exact01, max_relative = 1e-10);
    }

    #[test]
    fn loglog_slope_of_power_law() {
        let xs: Vec<f64> = (1..8).map(|i| 10f64.powf(-(i as f64) / 2.0)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x * x).collect();
        let (slope, intercept, resid) = fit_loglog(&xs, &ys).unwrap();
        assert_relative_eq!(slope, 2.0, epsilon = 1e-12);
        assert_relative_eq!(intercept, 3f64.ln(), epsilon = 1e-11);
        assert!(resid < 1e-12);
    }
}
