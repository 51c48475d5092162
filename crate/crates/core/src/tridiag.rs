//! Thomas algorithm for tridiagonal systems.

use alloc::vec::Vec;

/// Tridiagonal matrix stored as three diagonals of equal length `n`.
///
/// `lower[0]` and `upper[n - 1]` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    /// Sub-diagonal; `lower[i]` multiplies `u[i - 1]` in row `i`.
    pub lower: Vec<f64>,
    /// Main diagonal.
    pub diag: Vec<f64>,
    /// Super-diagonal; `upper[i]` multiplies `u[i + 1]` in row `i`.
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    /// Zero matrix of size `n`.
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: alloc::vec![0.0; n],
            diag: alloc::vec![0.0; n],
            upper: alloc::vec![0.0; n],
        }
    }

    /// Number of rows.
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    /// True for the empty system.
    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `A u` for a vector of matching length.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * u[i];
                if i > 0 {
                    v += self.lower[i] * u[i - 1];
                }
                if i + 1 < n {
                    v += self.upper[i] * u[i + 1];
                }
                v
            })
            .collect()
    }

    /// Solves `A u = rhs` without pivoting. Returns `None` on a zero pivot.
    pub fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        let n = self.len();
        assert_eq!(rhs.len(), n, "rhs length mismatch");
        if n == 0 {
            return Some(Vec::new());
        }
        let mut c = alloc::vec![0.0; n];
        let mut d = alloc::vec![0.0; n];
        let mut pivot = self.diag[0];
        if pivot == 0.0 {
            return None;
        }
        c[0] = self.upper[0] / pivot;
        d[0] = rhs[0] / pivot;
        for i in 1..n {
            pivot = self.diag[i] - self.lower[i] * c[i - 1];
            if pivot == 0.0 || !pivot.is_finite() {
                return None;
            }
            c[i] = if i + 1 < n {
                self.upper[i] / pivot
            } else {
                0.0
            };
            d[i] = (rhs[i] - self.lower[i] * d[i - 1]) / pivot;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Some(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn solves_poisson_matrix() {
        let n = 50;
        let mut a = Tridiagonal::zeros(n);
        for i in 0..n {
            a.lower[i] = -1.0;
            a.diag[i] = 2.0;
            a.upper[i] = -1.0;
        }
        let u_true: Vec<f64> = (0..n).map(|i| libm::sin(i as f64 * 0.3)).collect();
        let rhs = a.apply(&u_true);
        let u = a.solve(&rhs).unwrap();
        for (x, y) in u.iter().zip(&u_true) {
            assert!((x - y).abs() < 1e-11);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let a = Tridiagonal {
            lower: vec![0.0, 1.0],
            diag: vec![0.0, 1.0],
            upper: vec![1.0, 0.0],
        };
        assert!(a.solve(&[1.0, 1.0]).is_none());
    }

    proptest::proptest! {
        #[test]
        fn diagonally_dominant_roundtrip(vals in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64), 1..40)) {
            let n = vals.len();
            let mut a = Tridiagonal::zeros(n);
            let mut u = vec![0.0; n];
            for (i, (l, r, x)) in vals.iter().enumerate() {
                a.lower[i] = *l;
                a.upper[i] = *r;
                a.diag[i] = 2.5 + l.abs() + r.abs();
                u[i] = *x;
            }
            let got = a.solve(&a.apply(&u)).unwrap();
            for (g, e) in got.iter().zip(&u) {
                proptest::prop_assert!((g - e).abs() < 1e-12);
            }
        }
    }
}
