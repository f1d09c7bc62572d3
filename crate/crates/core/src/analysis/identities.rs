//! Discrete Gronwall bound and the algebraic identities used to split the
//! BDF2 time derivative.

use crate::error::{Error, Result};

/// Bound `y^m + k sum h^n <= exp(sigma M) (B + k sum_{n<=m} f^n)` of the
/// discrete Gronwall lemma, with `sigma = max_n (1 - k g^n)^{-1}` and
/// `M = k sum_{n<=m} g^n`.
///
/// Rejects sequences violating the hypothesis `k g^n < 1`.
pub fn discrete_gronwall_bound(b: f64, k: f64, g: &[f64], f: &[f64], m: usize) -> Result<f64> {
    if g.len() <= m || f.len() <= m {
        return Err(Error::InvalidArgument(format!(
            "need at least {} terms of g and f",
            m + 1
        )));
    }
    if !(k > 0.0) || b < 0.0 {
        return Err(Error::InvalidArgument("need k > 0 and B >= 0".into()));
    }
    let mut sigma: f64 = 0.0;
    let mut big_m = 0.0;
    let mut fsum = 0.0;
    for n in 0..=m {
        if g[n] < 0.0 || f[n] < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "sequences must be non-negative (index {n})"
            )));
        }
        let kg = k * g[n];
        if kg >= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "k g^{n} = {kg} violates k g^n < 1"
            )));
        }
        sigma = sigma.max(1.0 / (1.0 - kg));
        big_m += kg;
        fsum += f[n];
    }
    Ok((sigma * big_m).exp() * (b + k * fsum))
}

/// Relative residuals of
///
/// ```text
/// (i)  2<a, a-b> = |a|^2 + |a-b|^2 - |b|^2
/// (ii) 2<3a-4b+c, a> = |a|^2 + |2a-b|^2 + |a-2b+c|^2 - |b|^2 - |2b-c|^2
/// ```
///
/// for an arbitrary inner product `ip`. Each residual is scaled by the sum of
/// the magnitudes of its terms (or left absolute when all terms vanish).
pub fn splitting_identity_residuals(
    a: &[f64],
    b: &[f64],
    c: &[f64],
    ip: impl Fn(&[f64], &[f64]) -> f64,
) -> (f64, f64) {
    assert!(
        a.len() == b.len() && b.len() == c.len(),
        "vectors must have equal length"
    );
    let comb = |x: f64, u: &[f64], y: f64, v: &[f64], z: f64, w: &[f64]| -> Vec<f64> {
        (0..u.len())
            .map(|i| x * u[i] + y * v[i] + z * w[i])
            .collect()
    };
    let sq = |u: &[f64]| ip(u, u);
    let amb = comb(1.0, a, -1.0, b, 0.0, c);
    let t1 = [2.0 * ip(a, &amb), sq(a), sq(&amb), sq(b)];
    let r1 = t1[0] - (t1[1] + t1[2] - t1[3]);

    let d = comb(3.0, a, -4.0, b, 1.0, c);
    let two_a_b = comb(2.0, a, -1.0, b, 0.0, c);
    let a2bc = comb(1.0, a, -2.0, b, 1.0, c);
    let two_b_c = comb(0.0, a, 2.0, b, -1.0, c);
    let t2 = [
        2.0 * ip(&d, a),
        sq(a),
        sq(&two_a_b),
        sq(&a2bc),
        sq(b),
        sq(&two_b_c),
    ];
    let r2 = t2[0] - (t2[1] + t2[2] + t2[3] - t2[4] - t2[5]);

    let rel = |r: f64, terms: &[f64]| {
        let s: f64 = terms.iter().map(|t| t.abs()).sum();
        if s > 0.0 {
            r.abs() / s
        } else {
            r.abs()
        }
    };
    (rel(r1, &t1), rel(r2, &t2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euclid(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn gronwall_examples() {
        assert_eq!(
            discrete_gronwall_bound(2.0, 0.1, &[0.0; 4], &[1.0; 4], 3).unwrap(),
            2.0 + 0.1 * 4.0
        );
        let (k, c, m) = (0.1, 2.0, 5);
        let v = discrete_gronwall_bound(1.0, k, &[c; 6], &[0.0; 6], m).unwrap();
        let sigma = 1.0 / (1.0 - k * c);
        assert!((v - (sigma * k * (m as f64 + 1.0) * c).exp()).abs() < 1e-12);
        assert_eq!(
            discrete_gronwall_bound(3.0, 0.5, &[0.0], &[0.0], 0).unwrap(),
            3.0
        );
    }

    #[test]
    fn gronwall_rejects_violated_hypothesis() {
        assert!(discrete_gronwall_bound(1.0, 0.5, &[2.0, 0.0], &[0.0; 2], 1).is_err());
        assert!(discrete_gronwall_bound(1.0, 0.5, &[0.0, 3.0], &[0.0; 2], 1).is_err());
        assert!(discrete_gronwall_bound(1.0, 0.5, &[0.0], &[0.0], 3).is_err());
    }

    #[test]
    fn identity_examples() {
        let (r1, r2) = splitting_identity_residuals(&[1.0, 2.0], &[1.0, 2.0], &[1.0, 2.0], euclid);
        assert!(r1 < 1e-15 && r2 < 1e-15);
        let (r1, r2) = splitting_identity_residuals(&[1.0], &[0.0], &[0.0], euclid);
        assert_eq!((r1, r2), (0.0, 0.0));
        let (r1, r2) = splitting_identity_residuals(&[0.0], &[0.0], &[0.0], euclid);
        assert_eq!((r1, r2), (0.0, 0.0));
    }
}
