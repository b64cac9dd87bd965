//! Exact comparison of Euclidean distances from a center in ℚ(√2)ᵈ to
//! integer points.
//!
//! Each center coordinate is `(r_i + q_i·√2) / den`. The squared distance
//! to an integer point `p`, scaled by `den²`, is `A + B·√2` with
//!
//! ```text
//! A = Σ (den·p_i − r_i)² + 2·q_i²,   B = −2 Σ q_i·(den·p_i − r_i)
//! ```
//!
//! and two such values are equal iff both parts agree, since √2 is
//! irrational.

use std::cmp::Ordering;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurdPoint {
    pub den: i64,
    pub rational: Vec<i64>,
    pub irrational: Vec<i64>,
}

impl SurdPoint {
    /// `(√2, 1/3)`, the classical seed center for the planar lattice.
    pub fn sqrt2_third() -> Self {
        SurdPoint {
            den: 3,
            rational: vec![0, 1],
            irrational: vec![3, 0],
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        let d = self.den as f64;
        self.rational
            .iter()
            .zip(&self.irrational)
            .map(|(&r, &q)| (r as f64 + q as f64 * std::f64::consts::SQRT_2) / d)
            .collect()
    }

    /// Scaled squared distance to `p` as `(A, B)`, meaning `A + B·√2`.
    pub fn squared_distance(&self, p: &[i64]) -> (i128, i128) {
        let den = self.den as i128;
        let mut a = 0i128;
        let mut b = 0i128;
        for ((&pi, &r), &q) in p.iter().zip(&self.rational).zip(&self.irrational) {
            let u = den * pi as i128 - r as i128;
            let q = q as i128;
            a += u * u + 2 * q * q;
            b -= 2 * q * u;
        }
        (a, b)
    }
}

/// Exact order of `a₀ + a₁√2` and `b₀ + b₁√2`.
pub fn cmp_surd(a: (i128, i128), b: (i128, i128)) -> Ordering {
    // sign of x + y√2
    let x = a.0 - b.0;
    let y = a.1 - b.1;
    let sign = |v: i128| v.cmp(&0);
    match (sign(x), sign(y)) {
        (Ordering::Equal, s) | (s, Ordering::Equal) => s,
        (sx, sy) if sx == sy => sx,
        (sx, _) => {
            // x and y√2 have opposite signs: compare x² with 2y².
            let lhs = x * x;
            let rhs = 2 * y * y;
            match lhs.cmp(&rhs) {
                Ordering::Greater => sx,
                Ordering::Less => sx.reverse(),
                Ordering::Equal => Ordering::Equal,
            }
        }
    }
}

/// Sorts integer points by exact distance from `center` and reports
/// whether all distances are pairwise distinct.
pub fn exact_order(center: &SurdPoint, points: &[Vec<i64>]) -> (Vec<usize>, bool) {
    let keys: Vec<(i128, i128)> = points.iter().map(|p| center.squared_distance(p)).collect();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| cmp_surd(keys[i], keys[j]).then(i.cmp(&j)));
    let distinct = order
        .windows(2)
        .all(|w| cmp_surd(keys[w[0]], keys[w[1]]) != Ordering::Equal);
    (order, distinct)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt2_third_distances_are_distinct() {
        let c = SurdPoint::sqrt2_third();
        let pts: Vec<Vec<i64>> = (-12..=12)
            .flat_map(|i| (-12..=12).map(move |j| vec![i, j]))
            .collect();
        let (_, distinct) = exact_order(&c, &pts);
        assert!(distinct);
    }

    #[test]
    fn rational_center_can_tie() {
        let c = SurdPoint {
            den: 2,
            rational: vec![1, 0],
            irrational: vec![0, 0],
        };
        let (order, distinct) = exact_order(&c, &[vec![0, 0], vec![1, 0], vec![3, 0]]);
        assert!(!distinct);
        assert_eq!(order, vec![0, 1, 2]);
    }

    #[test]
    fn surd_comparison() {
        // 3 vs 2√2 ≈ 2.83
        assert_eq!(cmp_surd((3, 0), (0, 2)), Ordering::Greater);
        // 1 + √2 vs 2.41
        assert_eq!(cmp_surd((1, 1), (2, 0)), Ordering::Greater);
        assert_eq!(cmp_surd((5, -1), (5, -1)), Ordering::Equal);
        assert_eq!(cmp_surd((0, 1), (1, 0)), Ordering::Greater);
        assert_eq!(cmp_surd((1, 0), (0, 1)), Ordering::Less);
    }

    #[test]
    fn float_order_agrees_with_exact_order() {
        let c = SurdPoint::sqrt2_third();
        let cf = c.to_f64();
        let pts: Vec<Vec<i64>> = (-8..=8)
            .flat_map(|i| (-8..=8).map(move |j| vec![i, j]))
            .collect();
        let (order, _) = exact_order(&c, &pts);
        let d = |i: usize| {
            let p = &pts[i];
            ((p[0] as f64 - cf[0]).powi(2) + (p[1] as f64 - cf[1]).powi(2)).sqrt()
        };
        for w in order.windows(2) {
            assert!(d(w[0]) < d(w[1]));
        }
    }
}
