//! Pointwise exterior algebra over `m` generators.
//!
//! A form is a dense coefficient vector indexed by bitmask: bit `a` set means
//! generator `e_a` participates, and the basis monomial is `e_{a_1} ∧ ... ∧ e_{a_k}`
//! with `a_1 < ... < a_k`.

use num_complex::Complex64;

#[derive(Clone, Debug)]
pub struct ExteriorAlgebra {
    generators: usize,
}

impl ExteriorAlgebra {
    pub fn new(generators: usize) -> Self {
        assert!(generators <= 16);
        Self { generators }
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn size(&self) -> usize {
        1 << self.generators
    }

    pub fn zero(&self) -> Vec<Complex64> {
        vec![Complex64::default(); self.size()]
    }

    pub fn generator(&self, a: usize) -> Vec<Complex64> {
        let mut f = self.zero();
        f[1 << a] = Complex64::new(1.0, 0.0);
        f
    }

    /// Masks of degree `k` in increasing order.
    pub fn basis(&self, degree: usize) -> Vec<usize> {
        (0..self.size()).filter(|m| m.count_ones() as usize == degree).collect()
    }

    /// Sign of `e_A ∧ e_B` relative to the sorted monomial, or `None` if they overlap.
    pub fn wedge_sign(a: usize, b: usize) -> Option<f64> {
        if a & b != 0 {
            return None;
        }
        // count pairs (i in a, j in b) with i > j
        let mut swaps = 0u32;
        let mut bits = b;
        while bits != 0 {
            let j = bits.trailing_zeros();
            swaps += (a >> (j + 1)).count_ones();
            bits &= bits - 1;
        }
        Some(if swaps % 2 == 0 { 1.0 } else { -1.0 })
    }

    pub fn wedge(&self, x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
        let mut out = self.zero();
        for (a, xa) in x.iter().enumerate() {
            if *xa == Complex64::default() {
                continue;
            }
            for (b, yb) in y.iter().enumerate() {
                if *yb == Complex64::default() {
                    continue;
                }
                if let Some(s) = Self::wedge_sign(a, b) {
                    out[a | b] += xa * yb * s;
                }
            }
        }
        out
    }

    pub fn power(&self, x: &[Complex64], k: usize) -> Vec<Complex64> {
        let mut out = self.zero();
        out[0] = Complex64::new(1.0, 0.0);
        for _ in 0..k {
            out = self.wedge(&out, x);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anticommutes() {
        let alg = ExteriorAlgebra::new(4);
        let a = alg.generator(0);
        let b = alg.generator(2);
        let ab = alg.wedge(&a, &b);
        let ba = alg.wedge(&b, &a);
        assert_eq!(ab[0b101], Complex64::new(1.0, 0.0));
        assert_eq!(ba[0b101], Complex64::new(-1.0, 0.0));
        assert!(alg.wedge(&a, &a).iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn symplectic_square() {
        // (e0∧e1 + e2∧e3)^2 = 2 e0∧e1∧e2∧e3
        let alg = ExteriorAlgebra::new(4);
        let mut w = alg.zero();
        w[0b0011] = Complex64::new(1.0, 0.0);
        w[0b1100] = Complex64::new(1.0, 0.0);
        let w2 = alg.power(&w, 2);
        assert_eq!(w2[0b1111], Complex64::new(2.0, 0.0));
    }
}
