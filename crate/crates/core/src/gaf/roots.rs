//! Simultaneous polynomial root finding (Aberth–Ehrlich) with Newton polishing.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `p(z)` and `p'(z)` by Horner's rule, coefficients in ascending order.
pub fn eval_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Newton correction `p(z) / p'(z)`. Outside the unit circle the reversed
/// polynomial is used so intermediate values stay bounded.
fn newton_ratio(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let n = coeffs.len() - 1;
    if z.norm() <= 1.0 {
        let (p, dp) = eval_with_derivative(coeffs, z);
        return p / dp;
    }
    // p(z) = z^n q(w), w = 1/z, q(w) = sum c_{n-k} w^k
    let w = z.inv();
    let mut q = Complex64::new(0.0, 0.0);
    let mut dq = Complex64::new(0.0, 0.0);
    for c in coeffs.iter() {
        dq = dq * w + q;
        q = q * w + c;
    }
    q / (w * (q * n as f64 - w * dq))
}

/// Starting points on circles whose radii come from the upper convex hull of
/// `(k, log|c_k|)` (the Newton polygon), spread in angle.
fn initial_guesses(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let logs: Vec<f64> = coeffs
        .iter()
        .map(|c| {
            if c.norm() > 0.0 {
                c.norm().ln()
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let mut hull: Vec<usize> = Vec::new();
    for k in 0..=n {
        if logs[k] == f64::NEG_INFINITY {
            continue;
        }
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // drop b if it lies on or below the chord a..k
            let cross = (b - a) as f64 * (logs[k] - logs[a]) - (k - a) as f64 * (logs[b] - logs[a]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    let mut guesses = Vec::with_capacity(n);
    let sigma = 0.7;
    for seg in hull.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let m = b - a;
        let r = ((logs[a] - logs[b]) / m as f64).exp();
        let phase = 2.0 * std::f64::consts::PI * a as f64 / n as f64;
        for j in 0..m {
            let t = 2.0 * std::f64::consts::PI * j as f64 / m as f64 + phase + sigma;
            guesses.push(Complex64::from_polar(r, t));
        }
    }
    guesses
}

/// Outcome of a root solve.
#[derive(Debug, Clone)]
pub struct Roots {
    pub roots: Vec<Complex64>,
    /// Whether the Aberth correction of each root fell below tolerance.
    pub converged: Vec<bool>,
    pub iterations: usize,
}

/// All roots of `sum c_k z^k` by Aberth–Ehrlich iteration, stopping each root
/// once its correction is below `tol` relative to its modulus.
pub fn aberth(coeffs: &[Complex64], max_iter: usize, tol: f64) -> Result<Roots> {
    let mut hi = coeffs.len();
    while hi > 0 && coeffs[hi - 1].norm() == 0.0 {
        hi -= 1;
    }
    if hi == 0 {
        return Err(Error::InvalidParameter("zero polynomial".into()));
    }
    let mut lo = 0;
    while coeffs[lo].norm() == 0.0 {
        lo += 1;
    }
    let core = &coeffs[lo..hi];
    let mut roots = vec![Complex64::new(0.0, 0.0); lo];
    let mut converged = vec![true; lo];
    let n = core.len() - 1;
    if n == 0 {
        return Ok(Roots {
            roots,
            converged,
            iterations: 0,
        });
    }
    if n == 1 {
        roots.push(-core[0] / core[1]);
        converged.push(true);
        return Ok(Roots {
            roots,
            converged,
            iterations: 0,
        });
    }
    let mut z = initial_guesses(core);
    let mut done = vec![false; n];
    let mut iterations = 0;
    while iterations < max_iter && done.iter().any(|d| !d) {
        iterations += 1;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let ratio = newton_ratio(core, z[i]);
            if !ratio.is_finite() {
                done[i] = true;
                continue;
            }
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    s += (z[i] - z[j]).inv();
                }
            }
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if w.is_finite() {
                z[i] -= w;
            }
            if !w.is_finite() || w.norm() <= tol * z[i].norm().max(f64::MIN_POSITIVE) {
                done[i] = true;
            }
        }
    }
    roots.extend_from_slice(&z);
    converged.extend_from_slice(&done);
    Ok(Roots {
        roots,
        converged,
        iterations,
    })
}

/// A few Newton steps against the coefficient form, keeping a step only when
/// it lowers the residual. Returns the polished root and whether any step was taken.
pub fn polish(coeffs: &[Complex64], mut z: Complex64, steps: usize) -> (Complex64, bool) {
    let mut res = eval_with_derivative(coeffs, z).0.norm();
    let mut moved = false;
    for _ in 0..steps {
        if res == 0.0 {
            break;
        }
        let cand = z - newton_ratio(coeffs, z);
        let r = eval_with_derivative(coeffs, cand).0.norm();
        if cand.is_finite() && r < res {
            z = cand;
            res = r;
            moved = true;
        } else {
            break;
        }
    }
    (z, moved)
}
