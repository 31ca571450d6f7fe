//! Triangle quadrature.
//!
//! The base rule is the symmetric 6-point Gauss rule (Strang–Fix / Dunavant), exact
//! for polynomials of degree 4. For discontinuous data each triangle can be split
//! uniformly into `k²` congruent sub-triangles before applying the base rule.

/// Barycentric points and weights (weights sum to one).
const A1: f64 = 0.445_948_490_915_965;
const B1: f64 = 0.108_103_018_168_070;
const W1: f64 = 0.223_381_589_678_011;
const A2: f64 = 0.091_576_213_509_771;
const B2: f64 = 0.816_847_572_980_459;
const W2: f64 = 0.109_951_743_655_322;

const BASE: [([f64; 3], f64); 6] = [
    ([B1, A1, A1], W1),
    ([A1, B1, A1], W1),
    ([A1, A1, B1], W1),
    ([B2, A2, A2], W2),
    ([A2, B2, A2], W2),
    ([A2, A2, B2], W2),
];

/// Quadrature rule in barycentric coordinates of a reference triangle.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    points: Vec<([f64; 3], f64)>,
}

impl TriangleRule {
    /// Degree-4, 6-point rule.
    pub fn degree4() -> Self {
        Self {
            points: BASE.to_vec(),
        }
    }

    /// Degree-4 rule on each of the `k²` sub-triangles of a uniform split.
    pub fn subdivided(k: usize) -> Self {
        let k = k.max(1);
        if k == 1 {
            return Self::degree4();
        }
        let kf = k as f64;
        let mut points = Vec::with_capacity(6 * k * k);
        let w = 1.0 / (kf * kf);
        // sub-triangle vertices in barycentric (l1, l2) lattice coordinates
        let mut push = |v: [[f64; 2]; 3]| {
            for (bary, wt) in BASE {
                let l1 = bary[0] * v[0][0] + bary[1] * v[1][0] + bary[2] * v[2][0];
                let l2 = bary[0] * v[0][1] + bary[1] * v[1][1] + bary[2] * v[2][1];
                points.push(([1.0 - l1 - l2, l1, l2], wt * w));
            }
        };
        for i in 0..k {
            for j in 0..k - i {
                let (a, b) = (i as f64 / kf, j as f64 / kf);
                let d = 1.0 / kf;
                push([[a, b], [a + d, b], [a, b + d]]);
                if i + j + 1 < k {
                    push([[a + d, b], [a + d, b + d], [a, b + d]]);
                }
            }
        }
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Physical points and weights (weights sum to `area`) on the triangle `x`.
    pub fn on(&self, x: &[[f64; 2]; 3], area: f64) -> impl Iterator<Item = ([f64; 2], [f64; 3], f64)> + '_ {
        let x = *x;
        self.points.iter().map(move |&(l, w)| {
            let px = l[0] * x[0][0] + l[1] * x[1][0] + l[2] * x[2][0];
            let py = l[0] * x[0][1] + l[1] * x[1][1] + l[2] * x[2][1];
            ([px, py], l, w * area)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    // ∫_{ref} x^a y^b = a! b! / (a + b + 2)!
    fn exact_monomial(a: u32, b: u32) -> f64 {
        factorial(a) * factorial(b) / factorial(a + b + 2)
    }

    fn integrate(rule: &TriangleRule, a: i32, b: i32) -> f64 {
        let x = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        rule.on(&x, 0.5).map(|(p, _, w)| w * p[0].powi(a) * p[1].powi(b)).sum()
    }

    #[test]
    fn degree_four_is_exact() {
        for rule in [TriangleRule::degree4(), TriangleRule::subdivided(3)] {
            for a in 0..=4u32 {
                for b in 0..=(4 - a) {
                    assert_relative_eq!(
                        integrate(&rule, a as i32, b as i32),
                        exact_monomial(a, b),
                        max_relative = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn degree_five_is_not() {
        let err = (integrate(&TriangleRule::degree4(), 5, 0) - exact_monomial(5, 0)).abs();
        assert!(err > 1e-8);
    }

    #[test]
    fn subdivided_weights() {
        let r = TriangleRule::subdivided(4);
        assert_eq!(r.len(), 6 * 16);
        let total: f64 = r.points.iter().map(|p| p.1).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-13);
        assert!(r.points.iter().all(|(l, _)| l.iter().all(|&c| c > 0.0)));
    }
}
